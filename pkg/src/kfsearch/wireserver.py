"""Stdio wire-protocol server over stub backends.

Lets the proc: backend path be exercised end to end without any real
models: detection replays a scripted JSON fixture, embedding uses the
hashed bag-of-words encoder. Run as:

    python -m kfsearch.wireserver [--detector-fixture PATH]

Malformed requests get an {"error": ...} response; the process keeps
serving until stdin closes.
"""

from __future__ import annotations

import argparse
import sys

from . import protocol
from .errors import BackendError, ConfigError
from .textstream import HashedBagOfWordsEncoder
from .videostream import ScriptedDetector


def handle_request(request: dict, detector, encoder) -> dict:
    op = request.get("op")
    if op == "embed":
        texts = request.get("texts")
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return {"error": "embed request needs a 'texts' list of strings"}
        return {"embeddings": encoder.embed(texts).tolist()}
    if op == "detect":
        frames = request.get("frames")
        vocabulary = request.get("vocabulary")
        if not isinstance(frames, list) or not all(isinstance(f, int) for f in frames):
            return {"error": "detect request needs a 'frames' list of integers"}
        if not isinstance(vocabulary, list) or not all(isinstance(v, str) for v in vocabulary):
            return {"error": "detect request needs a 'vocabulary' list of strings"}
        if detector is None:
            return {"error": "this server was started without a detector fixture"}
        detections = detector.detect(frames, vocabulary)
        return {
            "detections": [
                {"frame": d.frame, "name": d.object_name, "confidence": d.confidence}
                for d in detections
            ]
        }
    return {"error": f"unknown op: {op!r}"}


def serve(stdin, stdout, detector, encoder) -> None:
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = protocol.decode_message(line)
            response = handle_request(request, detector, encoder)
        except BackendError as e:
            response = {"error": str(e)}
        stdout.write(protocol.encode_message(response))
        stdout.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--detector-fixture", help="JSON fixture mapping frame -> detections")
    args = parser.parse_args(argv)
    detector = None
    if args.detector_fixture:
        try:
            detector = ScriptedDetector.from_file(args.detector_fixture)
        except ConfigError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    serve(sys.stdin, sys.stdout, detector, HashedBagOfWordsEncoder())
    return 0


if __name__ == "__main__":
    sys.exit(main())
