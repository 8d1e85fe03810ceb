"""HTTP surface: endpoint contracts, error shapes, session persistence."""

import warnings

import pytest
from fastapi.testclient import TestClient

import corpus
from barline.abcio import serialize_abc
from barline.agent import CompletionBackend, StubBackend
from barline.audio import render_reference, write_wav
from barline.config import AppConfig
from barline.errors import BackendTimeout, DegenerateData
from barline.events import (notes_to_json, render_performance,
                            score_to_reference)
from barline.library import index_library
from barline.service import create_app
from barline.smf import export_midi

MELODY = [60, 62, 64, 65, 67, 69, 71, 72]


@pytest.fixture(scope="module")
def library_index(tmp_path_factory):
    directory = tmp_path_factory.mktemp("svc-library")
    melodies = corpus.write_library(directory)
    return index_library(directory), melodies


@pytest.fixture()
def client(tmp_path, library_index):
    index, _ = library_index
    config = AppConfig(session_root=str(tmp_path))
    app = create_app(config, backend=StubBackend(), library=index)
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def _turn_piece_files():
    score = corpus.melody_score(MELODY, "Turn Piece", "Nobody")
    abc_bytes = serialize_abc(score).encode("utf-8")
    reference = score_to_reference(score, 120.0)
    wav_bytes = write_wav(render_reference(reference, 120.0))
    midi_bytes = export_midi(render_performance(reference, 120.0))
    return abc_bytes, wav_bytes, midi_bytes


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_transcribe_wav(client):
    _, wav_bytes, _ = _turn_piece_files()
    response = client.post(
        "/transcribe", files={"file": ("take.wav", wav_bytes, "audio/wav")})
    assert response.status_code == 200
    notes = response.json()
    assert [n["pitch"] for n in notes] == MELODY
    assert all(set(n) == {"pitch", "onset_sec", "offset_sec", "velocity"}
               for n in notes)


def test_transcribe_midi_roundtrip(client):
    _, _, midi_bytes = _turn_piece_files()
    response = client.post(
        "/transcribe", files={"file": ("take.mid", midi_bytes, "audio/midi")})
    assert response.status_code == 200
    assert [n["pitch"] for n in response.json()] == MELODY


def test_transcribe_rejects_garbage(client):
    response = client.post(
        "/transcribe", files={"file": ("x.wav", b"definitely not riff", "audio/wav")})
    assert response.status_code == 400
    body = response.json()
    assert body["code"] == "invalid_input"
    assert set(body) == {"code", "message", "detail"}


def test_align_symbolic_route(client):
    abc_bytes, _, midi_bytes = _turn_piece_files()
    response = client.post(
        "/align",
        files={"score": ("piece.abc", abc_bytes, "text/plain"),
               "performance": ("take.mid", midi_bytes, "audio/midi")})
    assert response.status_code == 200
    result = response.json()
    assert set(result) == {"path", "matched", "missing", "extra",
                           "onsets_sec", "log_prob"}
    assert len(result["matched"]) == len(MELODY)
    assert result["missing"] == []
    assert result["extra"] == []


def test_align_wav_defaults_to_audio_route(client):
    abc_bytes, wav_bytes, _ = _turn_piece_files()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateData)
        response = client.post(
            "/align",
            files={"score": ("piece.abc", abc_bytes, "text/plain"),
                   "performance": ("take.wav", wav_bytes, "audio/wav")})
    assert response.status_code == 200
    result = response.json()
    assert len(result["matched"]) == len(MELODY)
    assert result["missing"] == []


def test_align_is_idempotent(client):
    abc_bytes, _, midi_bytes = _turn_piece_files()
    files = {"score": ("piece.abc", abc_bytes, "text/plain"),
             "performance": ("take.mid", midi_bytes, "audio/midi")}
    first = client.post("/align", files=files)
    second = client.post("/align", files=files)
    assert first.status_code == second.status_code == 200
    assert first.json() == second.json()


def test_align_rejects_unparseable_score(client):
    _, _, midi_bytes = _turn_piece_files()
    response = client.post(
        "/align",
        files={"score": ("piece.abc", b"no headers here", "text/plain"),
               "performance": ("take.mid", midi_bytes, "audio/midi")})
    assert response.status_code == 400
    assert response.json()["code"] == "invalid_input"


def test_evaluate_self_rendered_is_perfect(client):
    abc_bytes, _, midi_bytes = _turn_piece_files()
    response = client.post(
        "/evaluate",
        files={"score": ("piece.abc", abc_bytes, "text/plain"),
               "performance": ("take.mid", midi_bytes, "audio/midi")})
    assert response.status_code == 200
    report = response.json()
    assert set(report) == {"piece", "tempo_bpm", "measures", "summary"}
    assert report["piece"] == "Turn Piece"
    assert report["tempo_bpm"] == 120.0
    assert all(m["eva_note"] == 1.0 for m in report["measures"])
    assert report["summary"]["eva_note"] == 1.0


def test_evaluate_honours_tempo_form_field(client):
    abc_bytes, _, midi_bytes = _turn_piece_files()
    response = client.post(
        "/evaluate",
        data={"tempo": "60"},
        files={"score": ("piece.abc", abc_bytes, "text/plain"),
               "performance": ("take.mid", midi_bytes, "audio/midi")})
    assert response.status_code == 200
    report = response.json()
    assert report["tempo_bpm"] == 60.0
    # played twice as fast as the nominal 60 BPM reading
    assert all(m["eva_speed"] == pytest.approx(0.5, abs=1e-9)
               for m in report["measures"])


def test_library_search_endpoint(client, library_index):
    _, melodies = library_index
    slug, title, _, _ = melodies[0]
    response = client.get("/library/search", params={"q": title})
    assert response.status_code == 200
    hits = response.json()["hits"]
    assert hits[0]["entry_id"] == slug
    assert hits[0]["score"] == 1.0
    assert set(hits[0]) == {"entry_id", "score", "kind"}


def test_library_search_no_hits(client):
    response = client.get("/library/search", params={"q": "zzzz9 qqqq"})
    assert response.status_code == 200
    assert response.json() == {"hits": []}


def test_library_match_endpoint(client, library_index):
    _, melodies = library_index
    slug, _, _, pitches = melodies[3]
    notes = notes_to_json(corpus.probe_notes(pitches[:12]))
    response = client.post("/library/match", json=notes)
    assert response.status_code == 200
    hits = response.json()["hits"]
    assert hits[0]["entry_id"] == slug


def test_library_match_rejects_empty_body(client):
    response = client.post("/library/match", json=[])
    assert response.status_code == 400
    assert response.json()["code"] == "invalid_input"


def test_library_endpoints_without_library(tmp_path):
    app = create_app(AppConfig(session_root=str(tmp_path)),
                     backend=StubBackend())
    with TestClient(app, raise_server_exceptions=False) as bare:
        response = bare.get("/library/search", params={"q": "anything"})
        assert response.status_code == 400
        assert response.json()["code"] == "no_library"


def test_agent_session_and_theory_message(client):
    created = client.post("/agent/session")
    assert created.status_code == 200
    session_id = created.json()["session_id"]

    response = client.post("/agent/message", data={
        "session_id": session_id,
        "text": "What interval results from inverting a diminished fifth?"})
    assert response.status_code == 200
    body = response.json()
    assert set(body) == {"response", "trace", "intent", "turn"}
    assert body["turn"] == 1
    assert body["intent"]["kind"] == "theory"
    assert body["trace"] == []
    assert body["response"].startswith("[stub] context sections: none;")

    memory = client.get("/agent/memory", params={"session_id": session_id})
    assert memory.status_code == 200
    entries = memory.json()["entries"]
    assert [e["kind"] for e in entries] == ["user_message", "model_response"]
    assert all(set(e) == {"turn", "kind", "payload", "timestamp"}
               for e in entries)


def test_agent_message_with_attachments(client):
    abc_bytes, wav_bytes, _ = _turn_piece_files()
    session_id = client.post("/agent/session").json()["session_id"]
    response = client.post(
        "/agent/message",
        data={"session_id": session_id,
              "text": "How is the tempo stability?"},
        files=[("files", ("take.wav", wav_bytes, "audio/wav")),
               ("files", ("piece.abc", abc_bytes, "text/plain"))])
    assert response.status_code == 200
    body = response.json()
    assert body["intent"]["kind"] == "performance_analysis"
    assert [t["module"] for t in body["trace"]] == [
        "audio-dsp", "hmm-align", "perf-eval"]

    followup = client.post("/agent/message", data={
        "session_id": session_id, "text": "And in measure 1?"})
    assert followup.status_code == 200
    assert followup.json()["intent"]["kind"] == "followup"
    assert followup.json()["trace"] == []
    assert followup.json()["turn"] == 2


def test_agent_unknown_session(client):
    response = client.post("/agent/message",
                           data={"session_id": "nope", "text": "hi"})
    assert response.status_code == 404
    assert response.json()["code"] == "unknown_session"

    memory = client.get("/agent/memory", params={"session_id": "nope"})
    assert memory.status_code == 404


def test_agent_retrieval_needs_library(tmp_path):
    app = create_app(AppConfig(session_root=str(tmp_path)),
                     backend=StubBackend())
    with TestClient(app, raise_server_exceptions=False) as bare:
        session_id = bare.post("/agent/session").json()["session_id"]
        response = bare.post("/agent/message", data={
            "session_id": session_id,
            "text": "Give me a song of Kikujiro's Summer"})
        assert response.status_code == 400
        assert response.json()["code"] == "module_failure"


def test_sessions_survive_process_restart(tmp_path, library_index):
    index, _ = library_index
    config = AppConfig(session_root=str(tmp_path))

    with TestClient(create_app(config, backend=StubBackend(),
                               library=index)) as first:
        session_id = first.post("/agent/session").json()["session_id"]
        first.post("/agent/message",
                   data={"session_id": session_id, "text": "What is a chord?"})

    with TestClient(create_app(config, backend=StubBackend(),
                               library=index)) as second:
        memory = second.get("/agent/memory",
                            params={"session_id": session_id})
        assert memory.status_code == 200
        assert len(memory.json()["entries"]) == 2
        reply = second.post("/agent/message",
                            data={"session_id": session_id,
                                  "text": "What is a cadence?"})
        assert reply.status_code == 200
        assert reply.json()["turn"] == 2


def test_upload_cap_maps_to_413(tmp_path):
    app = create_app(AppConfig(session_root=str(tmp_path), max_upload_mb=0),
                     backend=StubBackend())
    with TestClient(app, raise_server_exceptions=False) as capped:
        response = capped.post(
            "/transcribe", files={"file": ("x.wav", b"RIFF....", "audio/wav")})
        assert response.status_code == 413
        assert response.json()["code"] == "payload_too_large"


def test_backend_timeout_maps_to_504(tmp_path):
    class SlowBackend(CompletionBackend):
        def complete(self, prompt):
            raise BackendTimeout("no reply within 0.1 s")

    app = create_app(AppConfig(session_root=str(tmp_path)),
                     backend=SlowBackend())
    with TestClient(app, raise_server_exceptions=False) as slow:
        session_id = slow.post("/agent/session").json()["session_id"]
        response = slow.post("/agent/message", data={
            "session_id": session_id, "text": "What is a scale?"})
        assert response.status_code == 504
        assert response.json()["code"] == "backend_timeout"
