"""Backend construction from spec strings, plus process/HTTP transports.

Spec grammar:
  stub:PATH   in-process fixture backend (detector: scripted JSON fixture;
              encoder: built-in hashed encoder when PATH is empty, else a
              JSON text->vector fixture)
  proc:CMD    child process speaking the wire protocol on stdin/stdout
  http:URL    the same protocol, one request per HTTP POST body
"""

from __future__ import annotations

import json
import shlex
import subprocess
import urllib.error
import urllib.request
from pathlib import Path

import numpy as np

from . import protocol
from .errors import BackendError, ConfigError
from .textstream import HashedBagOfWordsEncoder
from .videostream import Detection, ScriptedDetector

HTTP_TIMEOUT_S = 60.0


class ProcTransport:
    """One long-lived child process; one request line per response line."""

    def __init__(self, cmdline: str):
        self.cmdline = cmdline
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.cmdline),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                    text=True,
                    bufsize=1,
                )
            except OSError as e:
                raise BackendError(f"cannot start backend process {self.cmdline!r}: {e}") from e
        return self._proc

    def call(self, request: dict) -> dict:
        proc = self._ensure()
        try:
            proc.stdin.write(protocol.encode_message(request))
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise BackendError(f"backend process pipe closed: {e}") from e
        while True:
            line = proc.stdout.readline()
            if line == "":
                raise BackendError(f"backend process {self.cmdline!r} closed its stdout")
            line = line.strip()
            if line:
                return protocol.decode_message(line)

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class HttpTransport:
    """POSTs each request as a JSON body and reads a JSON response body."""

    def __init__(self, url: str, timeout_s: float = HTTP_TIMEOUT_S):
        self.url = url
        self.timeout_s = timeout_s

    def call(self, request: dict) -> dict:
        body = protocol.encode_message(request).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                payload = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError, TimeoutError) as e:
            raise BackendError(f"http backend {self.url} failed: {e}") from e
        return protocol.decode_message(payload.strip() or "{}")

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class WireDetector:
    """Detector backed by a transport speaking the wire protocol."""

    def __init__(self, transport):
        self.transport = transport

    def detect(self, frame_indices: list[int], vocabulary: list[str]) -> list[Detection]:
        response = self.transport.call(protocol.build_detect_request(frame_indices, vocabulary))
        dets = protocol.validate_detect_response(response)
        return [
            Detection(frame=d["frame"], object_name=d["name"], confidence=float(d["confidence"]))
            for d in dets
        ]

    def close(self) -> None:
        self.transport.close()


class WireEncoder:
    """Text encoder backed by a transport speaking the wire protocol."""

    def __init__(self, transport):
        self.transport = transport

    def embed(self, texts: list[str]) -> np.ndarray:
        response = self.transport.call(protocol.build_embed_request(texts))
        embeddings = protocol.validate_embed_response(response, expected_count=len(texts))
        if not embeddings:
            return np.zeros((0, 0), dtype=np.float64)
        return np.asarray(embeddings, dtype=np.float64)

    def close(self) -> None:
        self.transport.close()


class FixtureEncoder:
    """Encoder that looks embeddings up in a JSON text->vector fixture."""

    def __init__(self, table: dict[str, list[float]]):
        if not table:
            raise ConfigError("encoder fixture is empty")
        dims = {len(v) for v in table.values()}
        if len(dims) != 1:
            raise ConfigError("encoder fixture vectors have inconsistent dimensions")
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureEncoder":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read encoder fixture {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("encoder fixture must map text to vectors")
        return cls(data)

    def embed(self, texts: list[str]) -> np.ndarray:
        rows = []
        for text in texts:
            if text not in self.table:
                raise BackendError(f"encoder fixture has no embedding for {text!r}")
            rows.append(self.table[text])
        return np.stack(rows) if rows else np.zeros((0, 0))

    def close(self) -> None:
        pass


def parse_backend_spec(spec: str) -> tuple[str, str]:
    """Split a backend spec into (kind, rest). http URLs pass through whole."""
    if spec.startswith(("http://", "https://")):
        return "http", spec
    kind, sep, rest = spec.partition(":")
    if not sep or kind not in ("stub", "proc", "http"):
        raise ConfigError(
            f"backend spec must be stub:PATH, proc:CMDLINE, or http:URL, got {spec!r}"
        )
    return kind, rest


def make_detector(spec: str):
    kind, rest = parse_backend_spec(spec)
    if kind == "stub":
        if not rest:
            raise ConfigError("detector stub spec needs a fixture path: stub:PATH")
        return ScriptedDetector.from_file(rest)
    if kind == "proc":
        return WireDetector(ProcTransport(rest))
    return WireDetector(HttpTransport(rest))


def make_encoder(spec: str):
    kind, rest = parse_backend_spec(spec)
    if kind == "stub":
        if not rest or rest == "hash64":
            return HashedBagOfWordsEncoder()
        return FixtureEncoder.from_file(rest)
    if kind == "proc":
        return WireEncoder(ProcTransport(rest))
    return WireEncoder(HttpTransport(rest))


def close_backend(backend) -> None:
    close = getattr(backend, "close", None)
    if close is not None:
        close()
