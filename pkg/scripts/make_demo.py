#!/usr/bin/env python3
"""Write a self-contained demo directory and print the CLI invocation.

The demo video is 1500 frames at 25 fps with one hot region around frame
505: the scripted detector fires there and one subtitle cue talks about the
same moment. Running the printed command should place all keyframes near it.

    python3 scripts/make_demo.py demo/
"""

import argparse
import json
import sys
from pathlib import Path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("directory", type=Path)
    args = parser.parse_args()
    out = args.directory
    out.mkdir(parents=True, exist_ok=True)

    (out / "video.srt").write_text(
        "1\n00:00:05,000 --> 00:00:07,000\nsoft piano music continues\n\n"
        "2\n00:00:18,000 --> 00:00:22,000\nsee the red umbrella appear by the garden gate\n\n"
        "3\n00:00:40,000 --> 00:00:43,000\ndistant traffic hums along\n\n",
        encoding="utf-8",
    )
    (out / "targets.json").write_text(
        json.dumps({"targets": ["red umbrella"], "cues": ["garden gate"]}, indent=2) + "\n"
    )
    script = {str(f): [{"name": "red umbrella", "confidence": 0.85}] for f in range(495, 516)}
    script["500"].append({"name": "garden gate", "confidence": 0.7})
    (out / "detector.json").write_text(json.dumps(script, indent=2) + "\n")
    (out / "run.conf").write_text(
        "text_weight = 0.7\nframe_budget = 128\nmax_grid_side = 4\ntop_k = 4\nrng_seed = 7\n"
    )

    print("demo written. Run:")
    print(
        f"  python3 -m kfsearch search --frames 1500 --fps 25 "
        f"--subtitles {out}/video.srt --targets {out}/targets.json "
        f"--detector stub:{out}/detector.json --encoder stub: "
        f"--query 'when does the red umbrella appear near the garden gate' "
        f"--config {out}/run.conf --output {out}/result.json"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
