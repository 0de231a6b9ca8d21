"""Score fusion and the sampling-distribution update.

Both score streams are z-normalized and combined with a fixed weight. After
each batch the fused scores of newly visited frames are written into the
state, scores for unvisited frames are reconstructed by interpolation over
the visited ones, lower-bounded, pushed through a logistic squash, and
normalized into the next sampling distribution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .core import ScoreState
from .errors import InvalidInputError

log = logging.getLogger(__name__)

# Cubic splines can overshoot far beyond the observed score range; clamp the
# reconstruction so the sampling distribution cannot chase artifacts.
INTERP_CLIP_LO = -1.0
INTERP_CLIP_HI = 3.0


@dataclass(frozen=True)
class FusedScores:
    values: np.ndarray
    text_weight_used: float


def znorm(stream: np.ndarray, epsilon: float) -> np.ndarray:
    """Z-score normalization with an epsilon-padded denominator.

    Uses the population standard deviation; a constant stream maps to all
    zeros. Monotone affine, so rankings are preserved.
    """
    stream = np.asarray(stream, dtype=np.float64)
    if stream.size == 0:
        raise InvalidInputError("cannot z-normalize an empty stream")
    mu = float(stream.mean())
    sigma = float(stream.std())
    return (stream - mu) / (sigma + epsilon)


def fuse(
    text_scores: np.ndarray,
    object_scores: np.ndarray,
    text_weight: float,
    epsilon: float,
) -> FusedScores:
    """Weighted sum of the z-normalized streams.

    With weight 1 (or 0) the output equals the z-normalized text (object)
    stream exactly.
    """
    text_scores = np.asarray(text_scores, dtype=np.float64)
    object_scores = np.asarray(object_scores, dtype=np.float64)
    if text_scores.shape != object_scores.shape:
        raise InvalidInputError(
            f"stream length mismatch: {text_scores.shape} vs {object_scores.shape}"
        )
    if text_weight == 1.0:
        values = znorm(text_scores, epsilon)
    elif text_weight == 0.0:
        values = znorm(object_scores, epsilon)
    else:
        values = text_weight * znorm(text_scores, epsilon) + (1.0 - text_weight) * znorm(
            object_scores, epsilon
        )
    return FusedScores(values=values, text_weight_used=text_weight)


def assign_scores(state: ScoreState, newly_scored: list[tuple[int, float]]) -> None:
    """Write fused scores for newly examined frames and mark them visited.

    A frame repeated within one call keeps the last score (logged).
    """
    seen: set[int] = set()
    for frame, score in newly_scored:
        frame = int(frame)
        if not (0 <= frame < state.frame_count):
            raise InvalidInputError(f"frame {frame} outside [0, {state.frame_count})")
        if frame in seen:
            log.warning("frame %d scored twice in one update; last write wins", frame)
        seen.add(frame)
        state.fused_scores[frame] = float(score)
        state.mark_visited(frame)


def _interpolate_unvisited(state: ScoreState) -> np.ndarray:
    """Reconstruct a full-length score curve from the visited samples.

    Natural cubic spline through the visited (frame, score) points, falling
    back to piecewise-linear below 4 points and a constant with a single
    point. Outside the visited span the nearest visited score is held.
    """
    xs = np.sort(np.asarray(state.visited, dtype=np.int64))
    ys = state.fused_scores[xs]
    n = state.frame_count
    if len(xs) == 1:
        return np.full(n, float(ys[0]), dtype=np.float64)
    if len(xs) <= 3:
        return np.interp(np.arange(n, dtype=np.float64), xs.astype(np.float64), ys)
    curve = np.empty(n, dtype=np.float64)
    spline = CubicSpline(xs.astype(np.float64), ys, bc_type="natural")
    lo, hi = int(xs[0]), int(xs[-1])
    curve[lo : hi + 1] = spline(np.arange(lo, hi + 1, dtype=np.float64))
    curve[:lo] = ys[0]
    curve[hi + 1 :] = ys[-1]
    return curve


def refresh_distribution(state: ScoreState) -> None:
    """Recompute the sampling distribution from the current scores.

    Pipeline: interpolate over visited frames (visited keep their stored
    scores verbatim), clamp reconstruction overshoot, lower-bound every
    frame at 1/N, logistic squash, normalize to sum 1. The lower bound keeps
    every probability strictly positive.
    """
    if not state.visited:
        raise InvalidInputError("cannot refresh distribution with no visited frames")
    n = state.frame_count
    curve = _interpolate_unvisited(state)
    curve = np.clip(curve, INTERP_CLIP_LO, INTERP_CLIP_HI)
    curve = np.where(state.visited_mask, state.fused_scores, curve)
    floored = np.maximum(1.0 / n, curve)
    squashed = 1.0 / (1.0 + np.exp(-floored))
    state.distribution = squashed / squashed.sum()


def update_distribution(
    state: ScoreState, newly_scored: list[tuple[int, float]]
) -> ScoreState:
    """Assign new scores, then rebuild the sampling distribution."""
    assign_scores(state, newly_scored)
    refresh_distribution(state)
    return state
