"""Subcommand CLI; stdout carries machine output only.

Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.
Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .abcio import concat_measures, parse_abc, serialize_abc, split_measures
from .agent import (Attachment, HttpBackend, StubBackend, create_session,
                    run_turn)
from .align import result_to_json
from .audio import load_wav
from .config import AppConfig, load_config
from .errors import BackendTimeout, BarlineError, ModuleFailure
from .evaluate import build_report, evaluate_performance
from .events import notes_to_json
from .library import (INDEX_FILENAME, index_library, load_index,
                      match_implicit, save_index, search_explicit)
from .pipeline import (audio_alignment, load_performance, load_score,
                       symbolic_alignment)
from .smf import export_midi
from .textmetrics import (LsaVectorizer, levenshtein, lsa_cosine,
                          meteor_lite, rouge1, rougeL, tokenize)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


class _Parser(argparse.ArgumentParser):
    """Argparse that reports usage problems via our exit code."""

    def error(self, message: str) -> None:
        raise UsageError(message)


class UsageError(Exception):
    pass


def _emit(payload) -> None:
    sys.stdout.write(json.dumps(payload) + "\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="barline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse-abc", help="parse a tune and reprint it")
    p.add_argument("file")
    p.add_argument("--json", action="store_true",
                   help="emit the structured score instead of ABC text")

    p = sub.add_parser("abc-split", help="one ABC fragment per measure")
    p.add_argument("file")

    p = sub.add_parser("abc-concat", help="rebuild a tune from fragments")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("transcribe", help="WAV to note list")
    p.add_argument("wav")
    p.add_argument("--midi-out", help="also write a MIDI file")

    p = sub.add_parser("align", help="score-performance alignment")
    p.add_argument("--score", required=True)
    p.add_argument("--performance", required=True)
    p.add_argument("--tempo", type=float, default=None)
    p.add_argument("--symbolic", action="store_true",
                   help="note-level route even for WAV input")

    p = sub.add_parser("evaluate", help="per-measure evaluation report")
    p.add_argument("--score", required=True)
    p.add_argument("--performance", required=True)
    p.add_argument("--tempo", type=float, default=None)

    p = sub.add_parser("metrics", help="text similarity metrics")
    p.add_argument("name",
                   choices=["levenshtein", "rouge1", "rougel", "meteor",
                            "lsa"])
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)

    p = sub.add_parser("library", help="score library tools")
    lib_sub = p.add_subparsers(dest="library_command", required=True)
    q = lib_sub.add_parser("index", help="scan a directory")
    q.add_argument("directory")
    q.add_argument("--out", help=f"index path (default <dir>/{INDEX_FILENAME})")
    q = lib_sub.add_parser("search", help="explicit title/composer search")
    q.add_argument("directory")
    q.add_argument("--q", required=True)
    q = lib_sub.add_parser("match", help="implicit melodic match")
    q.add_argument("directory")
    q.add_argument("--performance", required=True)

    p = sub.add_parser("agent", help="stdin/stdout conversation loop")
    p.add_argument("--config", dest="config_path")
    p.add_argument("--session", default="cli")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", dest="config_path")
    p.add_argument("--port", type=int, default=None)

    return parser


def _config_for(args: argparse.Namespace) -> AppConfig:
    overrides = {}
    if getattr(args, "port", None) is not None:
        overrides["port"] = args.port
    return load_config(getattr(args, "config_path", None),
                       overrides=overrides)


def _metric_payload(name: str, ref: str, hyp: str):
    if name == "levenshtein":
        return levenshtein(ref, hyp)
    if name == "lsa":
        vec = LsaVectorizer().fit([ref, hyp])
        return lsa_cosine(vec, ref, hyp)
    ref_tokens = tokenize(ref)
    hyp_tokens = tokenize(hyp)
    if name == "rouge1":
        return rouge1(ref_tokens, hyp_tokens)
    if name == "rougel":
        return rougeL(ref_tokens, hyp_tokens)
    return meteor_lite(ref_tokens, hyp_tokens)


def _run_agent_repl(config: AppConfig, session_id: str) -> None:
    library = index_library(config.library_path) \
        if config.library_path else None
    if config.llm_url:
        backend = HttpBackend(url=config.llm_url, api_key=config.llm_key,
                              model=config.llm_model or "default",
                              timeout=config.llm_timeout)
    else:
        backend = StubBackend()
    session = create_session(Path(config.session_root), session_id,
                             backend=backend, library=library,
                             tempo_bpm=config.tempo_bpm)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        attachments = []
        words = []
        for word in line.split():
            if word.startswith("@") and len(word) > 1:
                attachments.append(Attachment.from_path(word[1:]))
            else:
                words.append(word)
        out = run_turn(session, " ".join(words), attachments)
        _emit({"turn": out["turn"], "intent": out["intent"],
               "trace": out["trace"], "response": out["response"]})
        sys.stdout.flush()


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "parse-abc":
        score = parse_abc(Path(args.file).read_text(encoding="utf-8"))
        if args.json:
            _emit(score.to_json_dict())
        else:
            sys.stdout.write(serialize_abc(score))
    elif args.command == "abc-split":
        score = parse_abc(Path(args.file).read_text(encoding="utf-8"))
        fragments = split_measures(score)
        _emit([{"abc": text, "time_signature": list(meter)}
               for text, meter in fragments])
    elif args.command == "abc-concat":
        fragments = []
        for name in args.files:
            payload = json.loads(Path(name).read_text(encoding="utf-8"))
            for item in payload:
                fragments.append((item["abc"],
                                  tuple(item["time_signature"])))
        sys.stdout.write(serialize_abc(concat_measures(fragments)))
    elif args.command == "transcribe":
        notes = load_performance(args.wav)
        if args.midi_out:
            Path(args.midi_out).write_bytes(export_midi(notes))
        _emit(notes_to_json(notes))
    elif args.command == "align":
        config = load_config()
        tempo = args.tempo if args.tempo is not None else config.tempo_bpm
        score = load_score(args.score)
        if args.performance.lower().endswith(".wav") and not args.symbolic:
            result = audio_alignment(score,
                                     load_wav(Path(args.performance)
                                              .read_bytes()), tempo)
        else:
            result = symbolic_alignment(score,
                                        load_performance(args.performance),
                                        tempo)
        _emit(result_to_json(result))
    elif args.command == "evaluate":
        config = load_config()
        tempo = args.tempo if args.tempo is not None else config.tempo_bpm
        score = load_score(args.score)
        notes = load_performance(args.performance)
        alignment = symbolic_alignment(score, notes, tempo)
        records, summary = evaluate_performance(score, notes, alignment,
                                                tempo)
        _emit(build_report(score.title or "untitled", tempo, records,
                           summary))
    elif args.command == "metrics":
        _emit(_metric_payload(args.name, args.ref, args.hyp))
    elif args.command == "library":
        if args.library_command == "index":
            index = index_library(args.directory)
            out = Path(args.out) if args.out \
                else Path(args.directory) / INDEX_FILENAME
            save_index(index, out)
            _emit({"entries": len(index.entries),
                   "skipped": index.skipped, "path": str(out)})
        else:
            index_path = Path(args.directory) / INDEX_FILENAME
            index = load_index(index_path) if index_path.exists() \
                else index_library(args.directory)
            if args.library_command == "search":
                hits = search_explicit(index, args.q)
            else:
                hits = match_implicit(index,
                                      load_performance(args.performance))
            _emit([{"entry_id": h.entry_id, "score": h.score,
                    "kind": h.kind} for h in hits])
    elif args.command == "agent":
        _run_agent_repl(_config_for(args), args.session)
    elif args.command == "serve":
        from .service import serve
        serve(_config_for(args))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _dispatch(args)
    except (BackendTimeout,) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except ModuleFailure as exc:
        if exc.stage == "backend":
            print(f"backend error: {exc}", file=sys.stderr)
            return EXIT_BACKEND
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BarlineError, OSError, ValueError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
