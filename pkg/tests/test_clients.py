import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from tempground.clients import (
    FileEmbeddingClient,
    RemoteEmbeddingClient,
    RemoteTransformClient,
    ReplayTranscriptClient,
    RuleFallbackClient,
)
from tempground.errors import ClientUnavailable, EmbeddingFailure


class _StubHandler(BaseHTTPRequestHandler):
    """Minimal transform + embed service used for wire-format tests."""

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        if self.path == "/v1/transform":
            if payload["task"] == "boom":
                body = {"ok": False, "error": "unsupported task"}
            else:
                body = {"ok": True, "output": {"echo": payload["inputs"]}}
        elif self.path == "/v1/embed_text":
            dim = 4 if payload["backend"] == "clip" else 3
            body = {"embeddings": [[float(len(t))] * dim for t in payload["texts"]]}
        else:
            self.send_response(404)
            self.end_headers()
            return
        data = json.dumps(body).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def stub_endpoint():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


class TestRuleFallbackClient:
    def test_all_protocol_tasks_are_total(self):
        client = RuleFallbackClient()
        cases = {
            "activate": {"query": "When did it happen?"},
            "decompose": {"event": "the person opens the door"},
            "task1_question": {"caption": "a person runs"},
            "task2_question": {"event_a": "a", "event_b": "b", "relation": "before"},
            "parse_timestamps": {"response": "at 3 seconds", "duration": 30},
            "classify_order": {"response": "Yes."},
            "correct": {
                "question": "when?", "response": "at 20 seconds",
                "facts": ["Fact: x occurs at 3.0 seconds."],
                "timestamps": [3.0], "duration": 30.0,
            },
        }
        for task, inputs in cases.items():
            output = client.transform(task, inputs)
            assert isinstance(output, dict) and output

    def test_parse_timestamps_emits_canonical_json(self):
        client = RuleFallbackClient()
        output = client.transform(
            "parse_timestamps", {"response": "from 3 to 5 seconds", "duration": 30}
        )
        assert output == {"points": [], "intervals": [[3.0, 5.0]]}

    def test_unknown_task(self):
        with pytest.raises(ClientUnavailable):
            RuleFallbackClient().transform("nope", {})


class TestRemoteTransformClient:
    def test_round_trip(self, stub_endpoint):
        client = RemoteTransformClient(stub_endpoint)
        output = client.transform("activate", {"query": "hi"})
        assert output == {"echo": {"query": "hi"}}

    def test_service_rejection(self, stub_endpoint):
        with pytest.raises(ClientUnavailable):
            RemoteTransformClient(stub_endpoint).transform("boom", {})

    def test_unreachable_endpoint(self):
        client = RemoteTransformClient("http://127.0.0.1:9", timeout=0.2, retries=0)
        with pytest.raises(ClientUnavailable):
            client.transform("activate", {"query": "hi"})


class TestReplayTranscriptClient:
    def test_replays_recorded_output(self, tmp_path):
        transcript = tmp_path / "transcript.json"
        transcript.write_text(json.dumps([
            {"task": "activate", "inputs": {"query": "q"},
             "output": {"needs_temporal_support": True, "event_texts": ["e"]}},
        ]))
        client = ReplayTranscriptClient(transcript)
        assert client.transform("activate", {"query": "q"})["event_texts"] == ["e"]

    def test_missing_entry(self, tmp_path):
        transcript = tmp_path / "transcript.json"
        transcript.write_text("[]")
        with pytest.raises(ClientUnavailable):
            ReplayTranscriptClient(transcript).transform("activate", {"query": "q"})


class TestFileEmbeddingClient:
    def test_load_and_lookup(self, tmp_path):
        path = tmp_path / "emb.json"
        path.write_text(json.dumps({
            "backend": "clip",
            "texts": ["a", "b"],
            "embeddings": [[1.0, 0.0], [0.0, 1.0]],
        }))
        client = FileEmbeddingClient([path])
        rows = client.embed_texts(["b", "a"], "clip")
        np.testing.assert_array_equal(rows, [[0.0, 1.0], [1.0, 0.0]])

    def test_missing_text(self):
        client = FileEmbeddingClient()
        with pytest.raises(EmbeddingFailure):
            client.embed_texts(["unknown"], "clip")

    def test_length_mismatch_rejected(self, tmp_path):
        path = tmp_path / "emb.json"
        path.write_text(json.dumps({"backend": "clip", "texts": ["a"], "embeddings": []}))
        with pytest.raises(EmbeddingFailure):
            FileEmbeddingClient([path])


class TestRemoteEmbeddingClient:
    def test_row_order_matches_input(self, stub_endpoint):
        client = RemoteEmbeddingClient(stub_endpoint)
        rows = client.embed_texts(["ab", "c"], "clip")
        assert rows.shape == (2, 4)
        assert rows[0, 0] == 2.0 and rows[1, 0] == 1.0

    def test_empty_texts_rejected(self, stub_endpoint):
        with pytest.raises(EmbeddingFailure):
            RemoteEmbeddingClient(stub_endpoint).embed_texts([], "clip")

    def test_unreachable(self):
        client = RemoteEmbeddingClient("http://127.0.0.1:9", timeout=0.2, retries=0)
        with pytest.raises(EmbeddingFailure):
            client.embed_texts(["x"], "clip")
