"""Command-line front door.

Subcommands:
  search    run one keyframe search over real inputs
  bench     run the synthetic benchmark across one or more configs
  validate  check fixture files without running anything

Config values resolve in order: built-in defaults, then the key-value file
named by $VSI_CONFIG, then --config FILE, then explicit flags. Exit codes:
0 success, 2 flag/validation problems, 3 backend failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .backends import close_backend, make_detector, make_encoder
from .core import SearchConfig, VideoTimeline, parse_kv_file
from .errors import BackendError, ConfigError, KfSearchError, SearchError, SrtParseError
from .harness import (
    generate_corpus,
    load_corpus,
    run_benchmark,
    save_corpus,
)
from .search import search
from .subtitle import parse_srt
from .videostream import FileTargetPlanner, ScriptedDetector, plan_targets_from_file

CONFIG_ENV_VAR = "VSI_CONFIG"

# (flag/file key, SearchConfig field) pairs; flag names use dashes.
_CONFIG_FLAGS = [
    ("text-weight", "text_weight", float),
    ("sim-threshold", "sim_threshold", float),
    ("amplification", "amplification", float),
    ("segment-threshold", "segment_threshold", float),
    ("extension-radius", "extension_radius_s", float),
    ("detection-threshold", "detection_threshold", float),
    ("frame-budget", "frame_budget", int),
    ("max-grid-side", "max_grid_side", int),
    ("top-k", "top_k", int),
    ("znorm-epsilon", "znorm_epsilon", float),
    ("seed", "rng_seed", int),
]
_CONFIG_BOOL_FLAGS = [
    ("rescale-fused", "rescale_fused"),
    ("uncapped-batch", "uncapped_batch"),
]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for flag, dest, typ in _CONFIG_FLAGS:
        parser.add_argument(f"--{flag}", dest=dest, type=typ, default=None)
    for flag, dest in _CONFIG_BOOL_FLAGS:
        parser.add_argument(f"--{flag}", dest=dest, action="store_const", const=True, default=None)


def _load_file_settings(explicit_path: str | None) -> dict:
    """Merge $VSI_CONFIG then --config into one mapping."""
    settings: dict = {}
    env_path = os.environ.get(CONFIG_ENV_VAR)
    for path in (env_path, explicit_path):
        if path:
            settings.update(parse_kv_file(path))
    return settings


def _resolve_config(args: argparse.Namespace, file_settings: dict) -> SearchConfig:
    cfg = SearchConfig.from_mapping(file_settings, ignore_unknown=True)
    overrides = {}
    for _, dest, _ in _CONFIG_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            overrides[dest] = value
    for _, dest in _CONFIG_BOOL_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            overrides[dest] = value
    return cfg.with_overrides(**overrides) if overrides else cfg


def _resolve_str(args_value, file_settings: dict, key: str) -> str | None:
    if args_value is not None:
        return args_value
    value = file_settings.get(key)
    return str(value) if value is not None else None


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_search(args: argparse.Namespace) -> int:
    try:
        file_settings = _load_file_settings(args.config)
        cfg = _resolve_config(args, file_settings)
    except (ConfigError, OSError) as e:
        return _fail(str(e), 2)

    resolved = {
        key: _resolve_str(getattr(args, key), file_settings, key)
        for key in ("subtitles", "query", "targets", "detector", "encoder", "output", "trace")
    }
    frames = args.frames if args.frames is not None else file_settings.get("frames")
    fps = args.fps if args.fps is not None else file_settings.get("fps")
    lenient = args.lenient_srt or bool(file_settings.get("lenient_srt", False))

    missing = [
        f"--{name}"
        for name, value in [
            ("frames", frames),
            ("fps", fps),
            ("subtitles", resolved["subtitles"]),
            ("query", resolved["query"]),
            ("targets", resolved["targets"]),
            ("detector", resolved["detector"]),
            ("encoder", resolved["encoder"]),
        ]
        if value is None
    ]
    if missing:
        return _fail(f"missing required flag(s): {', '.join(missing)}", 2)

    try:
        timeline = VideoTimeline(frame_count=int(frames), fps=float(fps))
        raw = Path(resolved["subtitles"]).read_text(encoding="utf-8")
        track = parse_srt(raw, lenient=lenient)
        planner = FileTargetPlanner(resolved["targets"])
        plan_targets_from_file(resolved["targets"])  # validate before spawning backends
    except (KfSearchError, OSError, ValueError) as e:
        return _fail(str(e), 2)

    detector = encoder = None
    try:
        try:
            detector = make_detector(resolved["detector"])
            encoder = make_encoder(resolved["encoder"])
        except ConfigError as e:
            return _fail(str(e), 2)
        try:
            outcome = search(
                timeline,
                track,
                resolved["query"],
                cfg,
                detector,
                encoder,
                planner,
                collect_trace=resolved["trace"] is not None,
            )
        except ConfigError as e:
            return _fail(str(e), 2)
        except (SearchError, BackendError) as e:
            return _fail(str(e), 3)
    finally:
        for backend in (detector, encoder):
            if backend is not None:
                close_backend(backend)

    result = json.dumps(outcome.to_dict(timeline, cfg), indent=2) + "\n"
    if resolved["output"]:
        Path(resolved["output"]).write_text(result, encoding="utf-8")
    else:
        sys.stdout.write(result)
    if resolved["trace"]:
        with open(resolved["trace"], "w", encoding="utf-8") as fh:
            for entry in outcome.trace or ():
                fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
    return 0


def _parse_generate_spec(spec: str) -> tuple[int, int, dict]:
    parts = spec.split(",")
    if len(parts) < 2:
        raise ConfigError("--generate expects SEED,COUNT[,key=value...]")
    try:
        seed, count = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"--generate seed and count must be integers, got {spec!r}") from None
    if count < 1:
        raise ConfigError("--generate count must be >= 1")
    key_map = {
        "frames": ("n_frames", int),
        "fps": ("fps", float),
        "gt": ("n_gt", int),
        "alignment": ("subtitle_alignment", float),
        "distractor_rate": ("distractor_rate", float),
        "noise": ("noise", float),
        "radius": ("detection_radius", int),
    }
    params: dict = {}
    for part in parts[2:]:
        key, sep, value = part.partition("=")
        if not sep or key not in key_map:
            raise ConfigError(
                f"--generate parameter must be one of {sorted(key_map)}, got {part!r}"
            )
        name, typ = key_map[key]
        try:
            params[name] = typ(value)
        except ValueError:
            raise ConfigError(f"--generate parameter {part!r} is not a {typ.__name__}") from None
    return seed, count, params


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        file_settings = _load_file_settings(args.config_file)
        base_cfg = _resolve_config(args, file_settings)
    except (ConfigError, OSError) as e:
        return _fail(str(e), 2)

    try:
        if args.corpus:
            corpus = load_corpus(args.corpus)
        elif args.generate:
            seed, count, params = _parse_generate_spec(args.generate)
            corpus = generate_corpus(seed, count, **params)
            if args.save_corpus:
                save_corpus(corpus, args.save_corpus)
        else:
            return _fail("bench needs --corpus PATH or --generate SEED,COUNT", 2)
    except ConfigError as e:
        return _fail(str(e), 2)

    configs: list[tuple[str, SearchConfig]] = []
    try:
        for path in args.sweep_config or []:
            cfg = SearchConfig.from_file(path)
            configs.append((Path(path).stem, cfg))
        for tw in args.sweep_text_weight or []:
            configs.append((f"text_weight={tw:g}", base_cfg.with_overrides(text_weight=tw)))
    except (ConfigError, OSError) as e:
        return _fail(str(e), 2)
    if not configs:
        configs = [("default", base_cfg)]

    report = run_benchmark(corpus, configs, jobs=args.jobs)
    Path(args.report).write_text(report.to_json(), encoding="utf-8")
    text = report.to_text()
    if args.report_text:
        Path(args.report_text).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    failures = sum(r.failures for r in report.rows)
    total = sum(r.cases for r in report.rows)
    if failures:
        print(f"note: {failures} case run(s) failed", file=sys.stderr)
        if failures >= total:
            return _fail("every benchmark case failed", 3)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    checks = []
    if args.subtitles:
        checks.append(("subtitles", args.subtitles))
    if args.targets:
        checks.append(("targets", args.targets))
    if args.detector_fixture:
        checks.append(("detector-fixture", args.detector_fixture))
    if args.corpus:
        checks.append(("corpus", args.corpus))
    if not checks:
        return _fail("nothing to validate; pass --subtitles/--targets/--detector-fixture/--corpus", 2)

    status = 0
    for kind, path in checks:
        try:
            if kind == "subtitles":
                track = parse_srt(Path(path).read_text(encoding="utf-8"), lenient=args.lenient_srt)
                print(f"ok: {path}: {len(track)} segment(s)")
            elif kind == "targets":
                targets = plan_targets_from_file(path)
                print(f"ok: {path}: {len(targets.targets)} target(s), {len(targets.cues)} cue(s)")
            elif kind == "detector-fixture":
                detector = ScriptedDetector.from_file(path)
                print(f"ok: {path}: detections scripted for {len(detector.script)} frame(s)")
            else:
                corpus = load_corpus(path)
                print(f"ok: {path}: {len(corpus)} case(s)")
        except (SrtParseError, ConfigError, OSError) as e:
            print(f"error: {path}: {e}", file=sys.stderr)
            status = 2
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kfsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_search = sub.add_parser("search", help="run one keyframe search")
    p_search.add_argument("--frames", type=int, default=None, help="total frame count")
    p_search.add_argument("--fps", type=float, default=None, help="frames per second")
    p_search.add_argument("--subtitles", default=None, help="SRT subtitle file")
    p_search.add_argument("--query", default=None, help="natural-language query")
    p_search.add_argument("--targets", default=None, help="JSON targets/cues file")
    p_search.add_argument("--detector", default=None, help="detector backend spec")
    p_search.add_argument("--encoder", default=None, help="encoder backend spec")
    p_search.add_argument("--output", default=None, help="result JSON path (default: stdout)")
    p_search.add_argument("--trace", default=None, help="write per-iteration JSONL snapshots here")
    p_search.add_argument("--config", default=None, help="key-value config file")
    p_search.add_argument("--lenient-srt", action="store_true", help="accept '.' ms separator")
    _add_config_flags(p_search)
    p_search.set_defaults(func=cmd_search)

    p_bench = sub.add_parser("bench", help="run the synthetic benchmark")
    p_bench.add_argument("--corpus", default=None, help="corpus manifest JSON")
    p_bench.add_argument("--generate", default=None, metavar="SEED,COUNT[,k=v...]",
                         help="generate a corpus instead of loading one")
    p_bench.add_argument("--save-corpus", default=None, help="directory to save generated cases")
    p_bench.add_argument("--config", dest="config_file", default=None, help="base key-value config file")
    p_bench.add_argument("--sweep-config", action="append", metavar="PATH",
                         help="additional config file to benchmark (repeatable)")
    p_bench.add_argument("--text-weight", dest="sweep_text_weight", action="append", type=float,
                         metavar="X", help="benchmark the base config at this text weight (repeatable)")
    p_bench.add_argument("--report", default="bench-report.json", help="report JSON path")
    p_bench.add_argument("--report-text", default=None, help="also write the plain-text table here")
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel case workers")
    for flag, dest, typ in _CONFIG_FLAGS:
        if flag != "text-weight":
            p_bench.add_argument(f"--{flag}", dest=dest, type=typ, default=None)
    for flag, dest in _CONFIG_BOOL_FLAGS:
        p_bench.add_argument(f"--{flag}", dest=dest, action="store_const", const=True, default=None)
    p_bench.set_defaults(func=cmd_bench, text_weight=None)

    p_validate = sub.add_parser("validate", help="validate fixture files")
    p_validate.add_argument("--subtitles", default=None)
    p_validate.add_argument("--targets", default=None)
    p_validate.add_argument("--detector-fixture", default=None)
    p_validate.add_argument("--corpus", default=None)
    p_validate.add_argument("--lenient-srt", action="store_true")
    p_validate.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KfSearchError as e:
        return _fail(str(e), 2)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
