"""Newline-delimited JSON wire protocol shared by all remote backends.

Requests:  {"op": "embed", "texts": [...]}
           {"op": "detect", "frames": [...], "vocabulary": [...]}
Responses: {"embeddings": [[...], ...]}
           {"detections": [{"frame": i, "name": "...", "confidence": x}, ...]}
           {"error": "..."}  on any failure, without closing the stream

One JSON object per line in both directions. The same messages travel over
child-process standard streams or as an HTTP request/response body.
"""

from __future__ import annotations

import json
from numbers import Real

from .errors import BackendError


def build_embed_request(texts: list[str]) -> dict:
    return {"op": "embed", "texts": list(texts)}


def build_detect_request(frames: list[int], vocabulary: list[str]) -> dict:
    return {"op": "detect", "frames": [int(f) for f in frames], "vocabulary": list(vocabulary)}


def encode_message(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def decode_message(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise BackendError(f"malformed protocol message: {e}") from e
    if not isinstance(obj, dict):
        raise BackendError(f"protocol message must be a JSON object, got {type(obj).__name__}")
    return obj


def check_error_response(obj: dict) -> None:
    if "error" in obj:
        raise BackendError(f"backend reported error: {obj['error']}")


def validate_embed_response(obj: dict, expected_count: int) -> list[list[float]]:
    check_error_response(obj)
    embeddings = obj.get("embeddings")
    if not isinstance(embeddings, list):
        raise BackendError("embed response missing 'embeddings' list")
    if len(embeddings) != expected_count:
        raise BackendError(
            f"embed response has {len(embeddings)} vectors, expected {expected_count}"
        )
    dim = None
    for vec in embeddings:
        if not isinstance(vec, list) or not all(isinstance(x, Real) for x in vec):
            raise BackendError("embeddings must be lists of numbers")
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise BackendError("embedding vectors have inconsistent dimensions")
    return embeddings


def validate_detect_response(obj: dict) -> list[dict]:
    check_error_response(obj)
    detections = obj.get("detections")
    if not isinstance(detections, list):
        raise BackendError("detect response missing 'detections' list")
    for det in detections:
        if not isinstance(det, dict):
            raise BackendError("detections must be objects")
        if not isinstance(det.get("frame"), int):
            raise BackendError("detection missing integer 'frame'")
        if not isinstance(det.get("name"), str) or not det["name"]:
            raise BackendError("detection missing non-empty 'name'")
        conf = det.get("confidence")
        if not isinstance(conf, Real) or not (0.0 <= float(conf) <= 1.0):
            raise BackendError(f"detection confidence out of range: {conf!r}")
    return detections
