import io
import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import numpy as np
import pytest

from kfsearch import protocol
from kfsearch.backends import (
    FixtureEncoder,
    HttpTransport,
    ProcTransport,
    WireDetector,
    WireEncoder,
    make_detector,
    make_encoder,
    parse_backend_spec,
)
from kfsearch.errors import BackendError, ConfigError
from kfsearch.textstream import HashedBagOfWordsEncoder
from kfsearch.videostream import ScriptedDetector
from kfsearch.wireserver import handle_request

ROOT = Path(__file__).resolve().parent.parent
SCHEMA = json.loads((ROOT / "protocol" / "wire-schema.json").read_text())


class TestMessages:
    def test_embed_request_shape(self):
        req = protocol.build_embed_request(["a", "b"])
        required = SCHEMA["ops"]["embed"]["request"]["required"]
        assert set(req) == set(required)
        assert req["op"] == "embed"

    def test_detect_request_shape(self):
        req = protocol.build_detect_request([1, 2], ["dog"])
        required = SCHEMA["ops"]["detect"]["request"]["required"]
        assert set(req) == set(required)

    def test_roundtrip_encoding(self):
        req = protocol.build_detect_request([1], ["dog"])
        assert protocol.decode_message(protocol.encode_message(req).strip()) == req

    def test_malformed_line_rejected(self):
        with pytest.raises(BackendError):
            protocol.decode_message("not json at all")
        with pytest.raises(BackendError):
            protocol.decode_message("[1, 2]")

    def test_error_response_raises(self):
        with pytest.raises(BackendError, match="boom"):
            protocol.check_error_response({"error": "boom"})

    def test_embed_response_validation(self):
        ok = {"embeddings": [[0.1, 0.2], [0.3, 0.4]]}
        assert protocol.validate_embed_response(ok, 2) == ok["embeddings"]
        with pytest.raises(BackendError):
            protocol.validate_embed_response({"embeddings": [[0.1]]}, 2)
        with pytest.raises(BackendError):
            protocol.validate_embed_response({"embeddings": [[0.1], [0.2, 0.3]]}, 2)
        with pytest.raises(BackendError):
            protocol.validate_embed_response({}, 0)

    def test_detect_response_validation(self):
        ok = {"detections": [{"frame": 3, "name": "dog", "confidence": 0.5}]}
        assert protocol.validate_detect_response(ok) == ok["detections"]
        for bad in (
            {"detections": [{"frame": "3", "name": "dog", "confidence": 0.5}]},
            {"detections": [{"frame": 3, "name": "", "confidence": 0.5}]},
            {"detections": [{"frame": 3, "name": "dog", "confidence": 1.5}]},
            {"nope": []},
        ):
            with pytest.raises(BackendError):
                protocol.validate_detect_response(bad)


class TestWireServerHandler:
    def test_embed_round(self):
        enc = HashedBagOfWordsEncoder()
        resp = handle_request({"op": "embed", "texts": ["a", "a"]}, None, enc)
        vecs = protocol.validate_embed_response(resp, 2)
        assert vecs[0] == vecs[1]

    def test_detect_round(self):
        det = ScriptedDetector({7: [("dog", 0.9)]})
        resp = handle_request(
            {"op": "detect", "frames": [7, 8], "vocabulary": ["dog"]},
            det, HashedBagOfWordsEncoder(),
        )
        dets = protocol.validate_detect_response(resp)
        assert dets == [{"frame": 7, "name": "dog", "confidence": 0.9}]

    def test_empty_batch(self):
        det = ScriptedDetector({})
        resp = handle_request(
            {"op": "detect", "frames": [], "vocabulary": ["dog"]},
            det, HashedBagOfWordsEncoder(),
        )
        assert resp == {"detections": []}

    def test_unknown_op_is_error_response(self):
        resp = handle_request({"op": "transcribe"}, None, HashedBagOfWordsEncoder())
        assert "error" in resp

    def test_bad_arguments_are_error_responses(self):
        enc = HashedBagOfWordsEncoder()
        assert "error" in handle_request({"op": "embed", "texts": "not a list"}, None, enc)
        assert "error" in handle_request({"op": "detect", "frames": [1.5], "vocabulary": []}, None, enc)


class TestProcTransport:
    def make_server_cmd(self, fixture_path=None):
        flag = f" --detector-fixture {fixture_path}" if fixture_path else ""
        return f"{sys.executable} -m kfsearch.wireserver{flag}"

    def test_embed_through_child_process(self, monkeypatch):
        monkeypatch.setenv("PYTHONPATH", str(ROOT / "src"))
        with ProcTransport(self.make_server_cmd()) as transport:
            encoder = WireEncoder(transport)
            vecs = encoder.embed(["hello world", "hello world"])
            np.testing.assert_array_equal(vecs[0], vecs[1])
            local = HashedBagOfWordsEncoder().embed(["hello world"])
            np.testing.assert_allclose(vecs[0], local[0], atol=1e-12)

    def test_detect_through_child_process(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PYTHONPATH", str(ROOT / "src"))
        fixture = tmp_path / "d.json"
        fixture.write_text(json.dumps({"5": [{"name": "dog", "confidence": 0.75}]}))
        with ProcTransport(self.make_server_cmd(fixture)) as transport:
            detector = WireDetector(transport)
            out = detector.detect([5, 6], ["dog"])
            assert len(out) == 1
            assert out[0].frame == 5 and out[0].confidence == 0.75

    def test_dead_command_raises_backend_error(self):
        transport = ProcTransport("/no/such/binary --flag")
        with pytest.raises(BackendError):
            transport.call({"op": "embed", "texts": []})

    def test_process_closing_stdout_raises(self):
        transport = ProcTransport(f"{sys.executable} -c 'pass'")
        with pytest.raises(BackendError):
            transport.call({"op": "embed", "texts": []})


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        request = json.loads(self.rfile.read(length))
        response = handle_request(request, self.server.detector, self.server.encoder)
        body = json.dumps(response).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def http_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    server.detector = ScriptedDetector({3: [("dog", 0.6)]})
    server.encoder = HashedBagOfWordsEncoder()
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/"
    server.shutdown()


class TestHttpTransport:
    def test_embed_and_detect(self, http_server):
        encoder = WireEncoder(HttpTransport(http_server))
        vecs = encoder.embed(["x", "x"])
        np.testing.assert_array_equal(vecs[0], vecs[1])
        detector = WireDetector(HttpTransport(http_server))
        out = detector.detect([3], ["dog"])
        assert out[0].confidence == 0.6

    def test_dead_endpoint(self):
        transport = HttpTransport("http://127.0.0.1:9/", timeout_s=0.5)
        with pytest.raises(BackendError):
            transport.call({"op": "embed", "texts": []})


class TestBackendSpecs:
    def test_parse_specs(self):
        assert parse_backend_spec("stub:foo.json") == ("stub", "foo.json")
        assert parse_backend_spec("proc:python worker.py") == ("proc", "python worker.py")
        assert parse_backend_spec("http://host:1/x") == ("http", "http://host:1/x")
        with pytest.raises(ConfigError):
            parse_backend_spec("carrier-pigeon:coop")

    def test_make_detector_stub(self, tmp_path):
        fixture = tmp_path / "d.json"
        fixture.write_text(json.dumps({"1": [{"name": "dog", "confidence": 0.5}]}))
        detector = make_detector(f"stub:{fixture}")
        assert detector.detect([1], ["dog"])[0].frame == 1
        with pytest.raises(ConfigError):
            make_detector("stub:")

    def test_make_encoder_stub(self):
        assert isinstance(make_encoder("stub:"), HashedBagOfWordsEncoder)
        assert isinstance(make_encoder("stub:hash64"), HashedBagOfWordsEncoder)

    def test_fixture_encoder(self, tmp_path):
        fixture = tmp_path / "e.json"
        fixture.write_text(json.dumps({"hello": [1.0, 0.0], "world": [0.0, 1.0]}))
        encoder = make_encoder(f"stub:{fixture}")
        assert isinstance(encoder, FixtureEncoder)
        np.testing.assert_array_equal(encoder.embed(["hello"]), [[1.0, 0.0]])
        with pytest.raises(BackendError):
            encoder.embed(["unknown"])
