"""Synthetic corpus generation and the benchmark harness.

Each generated case plants ground-truth windows in a synthetic timeline,
scripts a detector that fires target objects only near those windows, and
(depending on the alignment knob) writes subtitle segments that lexically
match the query at the window centers. The stub text encoder is lexical, so
alignment directly controls how much signal the subtitle stream carries.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import SearchConfig, SemanticTargets, VideoTimeline
from .errors import ConfigError, KfSearchError
from .search import SearchOutcome, search
from .subtitle import SubtitleSegment, SubtitleTrack
from .textstream import HashedBagOfWordsEncoder
from .videostream import ScriptedDetector, StaticPlanner

log = logging.getLogger(__name__)

# Frame-distance window of the hit metric: a prediction within this many
# frames of a ground-truth keyframe counts.
HIT_WINDOW_FRAMES = 200

_TARGET_NAMES = [
    "red umbrella", "golden retriever", "vintage motorcycle", "wooden sailboat",
    "striped lighthouse", "copper kettle", "green tractor", "stone fountain",
    "yellow school bus", "silver telescope", "antique typewriter", "blue kayak",
]
_CUE_NAMES = [
    "park bench", "traffic cone", "street lamp", "shop window",
    "picnic table", "garden gate", "bus stop", "flower stall",
]
_FILLER_SENTENCES = [
    "soft piano music continues",
    "crowd murmurs quietly",
    "distant traffic hums along",
    "wind rustles through leaves",
    "footsteps echo on pavement",
    "birds chirp somewhere overhead",
    "rain patters against glass",
    "an engine idles nearby",
]


@dataclass(frozen=True)
class SyntheticCase:
    """One benchmark instance with planted ground truth."""

    timeline: VideoTimeline
    track: SubtitleTrack
    query: str
    targets: SemanticTargets
    detector_script: dict[int, list[tuple[str, float]]]
    gt_frames: tuple[int, ...]
    seed: int


def generate_case(
    seed: int,
    n_frames: int = 4000,
    fps: float = 30.0,
    n_gt: int = 1,
    subtitle_alignment: float = 1.0,
    distractor_rate: float = 0.002,
    noise: float = 0.0,
    detection_radius: int = 8,
    aligned_half_s: float = 3.0,
) -> SyntheticCase:
    """Build one deterministic synthetic case.

    ``subtitle_alignment`` is the probability that a ground-truth window
    receives a query-matching subtitle segment. ``distractor_rate`` is the
    per-frame probability of a spurious cue detection outside the windows.
    ``noise`` is the standard deviation of jitter added to every scripted
    confidence. Target detections never fire outside ``detection_radius``
    frames of a ground-truth frame.
    """
    if n_frames < 100:
        raise ConfigError(f"n_frames must be >= 100, got {n_frames}")
    if n_gt < 1:
        raise ConfigError(f"n_gt must be >= 1, got {n_gt}")
    rng = np.random.default_rng(seed)

    margin = 250
    min_separation = 2 * detection_radius + 800
    if margin * 2 + (n_gt - 1) * min_separation >= n_frames:
        raise ConfigError(
            f"cannot place {n_gt} ground-truth windows in {n_frames} frames"
        )
    gt_frames: list[int] = []
    for _ in range(200 * n_gt):
        candidate = int(rng.integers(margin, n_frames - margin))
        if all(abs(candidate - g) >= min_separation for g in gt_frames):
            gt_frames.append(candidate)
            if len(gt_frames) == n_gt:
                break
    if len(gt_frames) < n_gt:
        raise ConfigError(
            f"could not place {n_gt} ground-truth windows in {n_frames} frames"
        )
    gt_frames.sort()

    target = _TARGET_NAMES[int(rng.integers(len(_TARGET_NAMES)))]
    cue = _CUE_NAMES[int(rng.integers(len(_CUE_NAMES)))]
    query = f"when does the {target} appear near the {cue}"
    targets = SemanticTargets(targets=((target, 1.0),), cues=((cue, 0.5),))

    timeline = VideoTimeline(frame_count=n_frames, fps=fps)
    duration = timeline.duration_s

    def jitter(conf: float) -> float:
        if noise > 0:
            conf += float(rng.normal(0.0, noise))
        return float(min(max(conf, 0.0), 1.0))

    script: dict[int, list[tuple[str, float]]] = {}
    for g in gt_frames:
        lo = max(0, g - detection_radius)
        hi = min(n_frames - 1, g + detection_radius)
        for f in range(lo, hi + 1):
            entries = []
            if rng.random() < 0.85:
                entries.append((target, jitter(float(rng.uniform(0.6, 0.95)))))
            if rng.random() < 0.5:
                entries.append((cue, jitter(float(rng.uniform(0.4, 0.8)))))
            if entries:
                script.setdefault(f, []).extend(entries)

    # Distractors stay well clear of the ground truth (beyond twice the hit
    # window) so they can only mislead the search, never hand it a hit.
    near_gt = np.zeros(n_frames, dtype=bool)
    for g in gt_frames:
        near_gt[max(0, g - 2 * HIT_WINDOW_FRAMES) : g + 2 * HIT_WINDOW_FRAMES + 1] = True
    distractor_hits = np.flatnonzero((rng.random(n_frames) < distractor_rate) & ~near_gt)
    for f in distractor_hits:
        script.setdefault(int(f), []).append((cue, jitter(float(rng.uniform(0.3, 0.9)))))

    segments: list[SubtitleSegment] = []
    cue_idx = 1
    t = float(rng.uniform(2.0, 8.0))
    while t < duration - 4.0:
        text = _FILLER_SENTENCES[int(rng.integers(len(_FILLER_SENTENCES)))]
        d = float(rng.uniform(1.5, 3.0))
        segments.append(SubtitleSegment(index=cue_idx, begin_s=t, end_s=t + d, text=text))
        cue_idx += 1
        t += d + float(rng.uniform(8.0, 18.0))
    for g in gt_frames:
        if rng.random() < subtitle_alignment:
            center = timeline.frame_to_seconds(g)
            begin = max(0.0, center - aligned_half_s)
            end = min(duration, center + aligned_half_s)
            text = f"see the {target} appear near the {cue}"
            segments.append(
                SubtitleSegment(index=cue_idx, begin_s=begin, end_s=end, text=text)
            )
            cue_idx += 1

    return SyntheticCase(
        timeline=timeline,
        track=SubtitleTrack(segments=tuple(segments)),
        query=query,
        targets=targets,
        detector_script=script,
        gt_frames=tuple(gt_frames),
        seed=seed,
    )


def generate_corpus(master_seed: int, count: int, **params) -> list[SyntheticCase]:
    """Deterministic list of cases; per-case seeds derive from the master."""
    cases = []
    for i in range(count):
        case_seed = int(np.random.SeedSequence([master_seed, i]).generate_state(1)[0])
        cases.append(generate_case(case_seed, **params))
    return cases


def keyframe_hit(
    predicted: list[int], gt_frames: list[int], window: int = 200
) -> bool:
    """True when any prediction is within ``window`` frames (inclusive) of
    any ground-truth frame."""
    if not predicted:
        raise ConfigError("predicted frame list must be non-empty")
    return any(abs(p - g) <= window for p in predicted for g in gt_frames)


@dataclass(frozen=True)
class BenchmarkRow:
    label: str
    config: dict
    cases: int
    failures: int
    hits: int
    hit_rate: float
    mean_iterations: float
    mean_frames_examined: float


@dataclass(frozen=True)
class BenchmarkReport:
    window: int
    master_seed: int
    rows: tuple[BenchmarkRow, ...]
    metric_note: str = (
        "a case counts as a hit when any predicted keyframe lies within the "
        "window of any ground-truth frame"
    )

    def to_dict(self) -> dict:
        return {
            "metric_note": self.metric_note,
            "window": self.window,
            "master_seed": self.master_seed,
            "rows": [
                {
                    "label": r.label,
                    "config": r.config,
                    "cases": r.cases,
                    "failures": r.failures,
                    "hits": r.hits,
                    "hit_rate": r.hit_rate,
                    "mean_iterations": r.mean_iterations,
                    "mean_frames_examined": r.mean_frames_examined,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        header = f"{'config':<24} {'cases':>6} {'fail':>5} {'hit rate':>9} {'mean iters':>11} {'mean frames':>12}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.label:<24} {r.cases:>6d} {r.failures:>5d} {r.hit_rate:>9.4f} "
                f"{r.mean_iterations:>11.3f} {r.mean_frames_examined:>12.3f}"
            )
        return "\n".join(lines) + "\n"


def _case_seed_mix(master: int, case_seed: int) -> int:
    return int(np.random.SeedSequence([master, case_seed]).generate_state(1)[0])


def run_case(case: SyntheticCase, cfg: SearchConfig) -> SearchOutcome:
    """Run one search over a synthetic case with stub backends."""
    detector = ScriptedDetector(case.detector_script)
    encoder = HashedBagOfWordsEncoder()
    planner = StaticPlanner(case.targets)
    cfg_case = replace(cfg, rng_seed=_case_seed_mix(cfg.rng_seed, case.seed))
    return search(case.timeline, case.track, case.query, cfg_case, detector, encoder, planner)


def run_benchmark(
    corpus: list[SyntheticCase],
    configs: list[tuple[str, SearchConfig]],
    jobs: int = 1,
) -> BenchmarkReport:
    """Hit rate and iteration cost per config over the corpus.

    Individual case failures are counted and skipped; the benchmark
    continues. Results are reduced in corpus order, so the report is
    deterministic regardless of ``jobs``.
    """
    if not corpus:
        raise ConfigError("benchmark corpus is empty")
    rows = []
    for label, cfg in configs:
        outcomes: list[SearchOutcome | None] = []
        if jobs > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(run_case, case, cfg) for case in corpus]
                for case, fut in zip(corpus, futures):
                    try:
                        outcomes.append(fut.result())
                    except KfSearchError as e:
                        log.warning("case seed=%d failed: %s", case.seed, e)
                        outcomes.append(None)
        else:
            for case in corpus:
                try:
                    outcomes.append(run_case(case, cfg))
                except KfSearchError as e:
                    log.warning("case seed=%d failed: %s", case.seed, e)
                    outcomes.append(None)

        hits = 0
        iterations = []
        frames = []
        failures = 0
        for case, outcome in zip(corpus, outcomes):
            if outcome is None:
                failures += 1
                continue
            if keyframe_hit(outcome.keyframe_indices(), list(case.gt_frames), HIT_WINDOW_FRAMES):
                hits += 1
            iterations.append(outcome.iterations)
            frames.append(outcome.frames_examined)
        completed = len(corpus) - failures
        rows.append(
            BenchmarkRow(
                label=label,
                config=cfg.to_dict(),
                cases=len(corpus),
                failures=failures,
                hits=hits,
                hit_rate=hits / completed if completed else 0.0,
                mean_iterations=float(np.mean(iterations)) if iterations else 0.0,
                mean_frames_examined=float(np.mean(frames)) if frames else 0.0,
            )
        )
    master = configs[0][1].rng_seed if configs else 0
    return BenchmarkReport(window=HIT_WINDOW_FRAMES, master_seed=master, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Case and corpus serialization (JSON files + manifest)
# ---------------------------------------------------------------------------

def case_to_dict(case: SyntheticCase) -> dict:
    return {
        "seed": case.seed,
        "timeline": {"frame_count": case.timeline.frame_count, "fps": case.timeline.fps},
        "query": case.query,
        "targets": {
            "targets": [{"name": n, "weight": w} for n, w in case.targets.targets],
            "cues": [{"name": n, "weight": w} for n, w in case.targets.cues],
        },
        "subtitles": [
            {"index": s.index, "begin_s": s.begin_s, "end_s": s.end_s, "text": s.text}
            for s in case.track.segments
        ],
        "detector_script": {
            str(f): [{"name": n, "confidence": c} for n, c in dets]
            for f, dets in sorted(case.detector_script.items())
        },
        "gt_frames": list(case.gt_frames),
    }


def case_from_dict(data: dict) -> SyntheticCase:
    try:
        timeline = VideoTimeline(
            frame_count=int(data["timeline"]["frame_count"]),
            fps=float(data["timeline"]["fps"]),
        )
        segments = tuple(
            SubtitleSegment(
                index=int(s["index"]),
                begin_s=float(s["begin_s"]),
                end_s=float(s["end_s"]),
                text=str(s["text"]),
            )
            for s in data["subtitles"]
        )
        targets = SemanticTargets(
            targets=tuple((d["name"], float(d["weight"])) for d in data["targets"]["targets"]),
            cues=tuple((d["name"], float(d["weight"])) for d in data["targets"]["cues"]),
        )
        script = {
            int(f): [(str(d["name"]), float(d["confidence"])) for d in dets]
            for f, dets in data["detector_script"].items()
        }
        return SyntheticCase(
            timeline=timeline,
            track=SubtitleTrack(segments=segments),
            query=str(data["query"]),
            targets=targets,
            detector_script=script,
            gt_frames=tuple(int(g) for g in data["gt_frames"]),
            seed=int(data["seed"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed case file: {e}") from e


def save_corpus(cases: list[SyntheticCase], directory: str | Path) -> Path:
    """Write one JSON file per case plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, case in enumerate(cases):
        name = f"case_{i:04d}.json"
        (directory / name).write_text(
            json.dumps(case_to_dict(case), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        names.append(name)
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps({"cases": names}, indent=2) + "\n", encoding="utf-8")
    return manifest


def load_corpus(manifest_path: str | Path) -> list[SyntheticCase]:
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read corpus manifest {manifest_path}: {e}") from e
    names = manifest.get("cases")
    if not isinstance(names, list) or not names:
        raise ConfigError(f"corpus manifest {manifest_path} lists no cases")
    cases = []
    for name in names:
        path = manifest_path.parent / name
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read case file {path}: {e}") from e
        cases.append(case_from_dict(data))
    return cases
