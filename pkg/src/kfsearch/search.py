"""End-to-end keyframe search.

One run: plan the object vocabulary, compute the subtitle-match stream once
(it does not depend on sampling), then loop sample -> detect -> score ->
fuse -> update distribution until the frame budget runs out, every target
has been confidently seen, or no unvisited frames remain. The highest fused
scores among visited frames are the keyframes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import ScoreState, SearchConfig, VideoTimeline
from .errors import ConfigError, InvalidInputError, KfSearchError, SearchError
from .fusion import assign_scores, refresh_distribution, znorm
from .subtitle import SubtitleTrack
from .textstream import TextEncoderBackend, compute_text_scores
from .videostream import (
    DetectorBackend,
    TargetPlannerBackend,
    check_all_found,
    sample_frames,
    score_objects,
)

log = logging.getLogger(__name__)

TERMINATION_BUDGET = "budget_exhausted"
TERMINATION_FOUND = "all_targets_found"
TERMINATION_EXHAUSTED = "frames_exhausted"
VALID_TERMINATIONS = (TERMINATION_BUDGET, TERMINATION_FOUND, TERMINATION_EXHAUSTED)


@dataclass(frozen=True)
class SearchOutcome:
    """Result of one search run.

    ``keyframes`` holds (frame, fused score) pairs sorted by score
    descending, ties broken by ascending frame index.
    """

    keyframes: tuple[tuple[int, float], ...]
    iterations: int
    frames_examined: int
    termination: str
    trace: tuple[dict, ...] | None = None

    def keyframe_indices(self) -> list[int]:
        return [f for f, _ in self.keyframes]

    def to_dict(self, timeline: VideoTimeline, cfg: SearchConfig) -> dict:
        return {
            "keyframes": [
                {"frame": f, "score": s, "time_s": timeline.frame_to_seconds(f)}
                for f, s in self.keyframes
            ],
            "iterations": self.iterations,
            "frames_examined": self.frames_examined,
            "termination": self.termination,
            "config": cfg.to_dict(),
        }


def select_topk(state: ScoreState, k: int) -> list[tuple[int, float]]:
    """Best k visited frames by stored fused score.

    Unvisited frames never qualify; their interpolated scores only steer
    sampling. With fewer than k visited frames, all of them are returned.
    """
    if not state.visited:
        raise InvalidInputError("no visited frames to select from")
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    pairs = [(f, float(state.fused_scores[f])) for f in state.visited]
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs[:k]


def _fuse_batch(
    state: ScoreState,
    batch_frames: list[int],
    cfg: SearchConfig,
) -> list[tuple[int, float]]:
    """Fused scores for the batch frames.

    Text statistics come from the full timeline (the text stream is known
    everywhere); object statistics only from frames the detector has
    actually seen, which at this point includes the current batch.
    """
    text_z = znorm(state.text_scores, cfg.znorm_epsilon)
    observed = np.flatnonzero(state.visited_mask).tolist() + [
        f for f in batch_frames if not state.visited_mask[f]
    ]
    obj_observed = state.object_scores[np.asarray(observed, dtype=np.int64)]
    mu = float(obj_observed.mean())
    sigma = float(obj_observed.std())
    denom = sigma + cfg.znorm_epsilon
    w = cfg.text_weight
    fused = [
        (
            f,
            w * float(text_z[f]) + (1.0 - w) * ((float(state.object_scores[f]) - mu) / denom),
        )
        for f in batch_frames
    ]
    if cfg.rescale_fused:
        values = np.array([v for _, v in fused])
        lo, hi = float(values.min()), float(values.max())
        if hi > lo:
            fused = [(f, (v - lo) / (hi - lo)) for f, v in fused]
        else:
            fused = [(f, 0.5) for f, _ in fused]
    return fused


def search(
    timeline: VideoTimeline,
    track: SubtitleTrack,
    query: str,
    cfg: SearchConfig,
    detector: DetectorBackend,
    encoder: TextEncoderBackend,
    planner: TargetPlannerBackend,
    collect_trace: bool = False,
) -> SearchOutcome:
    """Run the full keyframe search. See the module docstring for the loop.

    Raises ConfigError when the planner yields no targets, and SearchError
    (carrying the partial trace) when a backend fails mid-run.
    """
    trace: list[dict] = []
    try:
        targets = planner.plan(query, cfg.top_k)
    except KfSearchError:
        raise
    except Exception as e:
        raise SearchError(f"target planner failed: {e}", trace=trace) from e
    if not targets.targets:
        raise ConfigError("planner returned no target objects; nothing to search for")
    vocabulary = targets.vocabulary()

    state = ScoreState(timeline.frame_count)
    try:
        state.text_scores = compute_text_scores(track, query, encoder, timeline, cfg)
    except KfSearchError as e:
        if isinstance(e, InvalidInputError):
            raise
        raise SearchError(f"text encoder failed: {e}", trace=trace) from e
    except Exception as e:
        raise SearchError(f"text encoder failed: {e}", trace=trace) from e
    if not track.segments and cfg.text_weight == 1.0:
        log.warning(
            "subtitle track is empty but text_weight is 1.0; "
            "ranking will degenerate to visit order"
        )

    rng = np.random.default_rng(cfg.rng_seed)
    remaining = cfg.frame_budget
    iterations = 0
    frames_examined = 0
    found_log: dict[str, float] = {}
    termination = TERMINATION_BUDGET

    while True:
        m_cap = timeline.frame_count if cfg.uncapped_batch else cfg.max_grid_side
        batch = sample_frames(state.distribution, remaining, state.visited_mask, m_cap, rng)
        if len(batch) == 0:
            termination = TERMINATION_EXHAUSTED
            break
        batch_frames = list(batch.indices)

        try:
            detections = detector.detect(batch_frames, vocabulary)
        except KfSearchError as e:
            raise SearchError(f"detector failed: {e}", trace=trace) from e
        except Exception as e:
            raise SearchError(f"detector failed: {e}", trace=trace) from e

        for frame, obj_score in score_objects(detections, targets, batch):
            state.object_scores[frame] = obj_score
        target_names = set(targets.target_names())
        for det in detections:
            if det.object_name in target_names:
                prev = found_log.get(det.object_name, 0.0)
                if det.confidence > prev:
                    found_log[det.object_name] = det.confidence

        newly_scored = _fuse_batch(state, batch_frames, cfg)
        assign_scores(state, newly_scored)

        iterations += 1
        frames_examined += len(batch)
        remaining -= len(batch)

        if check_all_found(found_log, targets, cfg.detection_threshold):
            # Scores are already in place; the distribution will never be
            # sampled again, so skip the rebuild.
            termination = TERMINATION_FOUND
            if collect_trace:
                trace.append({"iteration": iterations, "batch": batch_frames, "state": state.snapshot()})
            break

        refresh_distribution(state)
        if collect_trace:
            trace.append({"iteration": iterations, "batch": batch_frames, "state": state.snapshot()})

        if remaining <= 0:
            termination = TERMINATION_BUDGET
            break

    keyframes = tuple(select_topk(state, cfg.top_k)) if state.visited else ()
    return SearchOutcome(
        keyframes=keyframes,
        iterations=iterations,
        frames_examined=frames_examined,
        termination=termination,
        trace=tuple(trace) if collect_trace else None,
    )
