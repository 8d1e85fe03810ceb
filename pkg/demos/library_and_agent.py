"""
A tiny library and a three-turn conversation
============================================

Index a handful of tunes, find one by title and one by melody, then
hold a short conversation with the offline stub backend: a theory
question, a retrieval request, and a performance to analyze.
"""

import tempfile
from pathlib import Path

from barline.abcio import parse_abc, serialize_abc
from barline.agent import Attachment, StubBackend, create_session, run_turn
from barline.audio import render_reference, write_wav
from barline.events import render_performance, score_to_reference
from barline.library import index_library, match_implicit, search_explicit
from barline.smf import export_midi

TUNES = {
    "morning": "X:1\nT:Morning Air\nM:4/4\nL:1/8\nK:D\n"
               "DFAd fdAF | GBdg bgdB |]\n",
    "evening": "X:1\nT:Evening Round\nM:3/4\nL:1/8\nK:Am\n"
               "ABc Ace | agf edc |]\n",
    "kikujiro": "X:1\nT:Kikujiro's Summer\nM:4/4\nL:1/8\nK:C\n"
                "EGBA GECD | EGAE GBcB |]\n",
}

workdir = Path(tempfile.mkdtemp(prefix="barline-demo-"))
library_dir = workdir / "library"
library_dir.mkdir()
for slug, text in TUNES.items():
    (library_dir / f"{slug}.abc").write_text(text, encoding="utf-8")

index = index_library(library_dir)
print(f"indexed {len(index.entries)} tunes")

# explicit search is fuzzy over titles and composers
for hit in search_explicit(index, "evening round"):
    print(f"  title search: {hit.entry_id} score={hit.score:.3f}")

# implicit search fingerprints the melody itself
probe_score = parse_abc(TUNES["morning"])
probe = render_performance(score_to_reference(probe_score, 120.0), 120.0)
for hit in match_implicit(index, probe):
    print(f"  melody match: {hit.entry_id} score={hit.score:.3f}")

# stage a performance of one library tune for the third turn
take_score = parse_abc(TUNES["kikujiro"])
reference = score_to_reference(take_score, 120.0)
wav_path = workdir / "take.wav"
wav_path.write_bytes(write_wav(render_reference(reference, 120.0)))
abc_path = workdir / "take.abc"
abc_path.write_text(serialize_abc(take_score), encoding="utf-8")
midi_path = workdir / "take.mid"
midi_path.write_bytes(export_midi(render_performance(reference, 120.0)))

session = create_session(workdir, "demo", backend=StubBackend(),
                         library=index)
turns = [
    ("What interval results from inverting a diminished fifth?", []),
    ("Give me a song of Kikujiro's Summer", []),
    ("How is the tempo stability?", [Attachment.from_path(str(wav_path)),
                                     Attachment.from_path(str(abc_path))]),
]
for message, attachments in turns:
    out = run_turn(session, message, attachments)
    print(f"\nturn {out['turn']} [{out['intent']['kind']}] {message}")
    for step in out["trace"]:
        print(f"  {step['module']}: {step['detail']}")
    print("  " + out["response"].split("\n")[0])

print(f"\nsession memory: {len(session.memory.entries)} entries "
      f"in {session.memory.path}")
