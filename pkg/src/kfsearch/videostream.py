"""Visual search stream: budgeted weighted frame sampling and object scoring.

Frames are drawn in grid-sized batches (m*m per detector call) without
replacement, skipping anything already visited. Each sampled frame's object
score is the best weighted detection confidence among the planned target and
cue vocabulary.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .core import SemanticTargets
from .errors import ConfigError, InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameBatch:
    """One detector batch. ``partial`` marks a batch cut short because fewer
    unvisited frames remained than the grid wanted."""

    indices: tuple[int, ...]
    grid_side: int
    partial: bool = False

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise InvalidInputError("batch contains duplicate frames")
        if self.grid_side < 1:
            raise InvalidInputError(f"grid_side must be >= 1, got {self.grid_side}")

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class Detection:
    """One named object found in one frame."""

    frame: int
    object_name: str
    confidence: float

    def __post_init__(self):
        if not self.object_name:
            raise InvalidInputError("object_name must be non-empty")
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidInputError(
                f"confidence must be in [0, 1], got {self.confidence}"
            )


class DetectorBackend(Protocol):
    """Runs detection over a batch of frames against a name vocabulary."""

    def detect(self, frame_indices: list[int], vocabulary: list[str]) -> list[Detection]: ...


class TargetPlannerBackend(Protocol):
    """Turns a query into target/cue object vocabularies."""

    def plan(self, query: str, k: int) -> SemanticTargets: ...


def _draw_weighted(
    weights: np.ndarray, count: int, rng: np.random.Generator
) -> list[int]:
    """Sequential weighted draws without replacement via inverse CDF.

    Each draw renormalizes over the remaining positive-weight entries.
    """
    weights = weights.astype(np.float64, copy=True)
    chosen: list[int] = []
    for _ in range(count):
        total = float(weights.sum())
        if total <= 0.0:
            break
        cum = np.cumsum(weights)
        u = rng.random() * total
        idx = int(np.searchsorted(cum, u, side="right"))
        idx = min(idx, len(weights) - 1)
        chosen.append(idx)
        weights[idx] = 0.0
    return chosen


def sample_frames(
    distribution: np.ndarray,
    remaining_budget: int,
    visited_mask: np.ndarray,
    m_max: int,
    rng: np.random.Generator,
) -> FrameBatch:
    """Draw the next grid batch from the sampling distribution.

    The grid side is the largest m with m*m within the remaining budget,
    capped at ``m_max`` and floored at 1. Draws are without replacement,
    restricted to unvisited frames, each draw proportional to the
    distribution renormalized over still-eligible frames. Returns an empty
    (partial) batch when every frame has been visited.
    """
    if remaining_budget < 1:
        raise InvalidInputError(f"remaining_budget must be >= 1, got {remaining_budget}")
    m = max(1, min(int(math.isqrt(remaining_budget)), m_max))
    want = m * m

    eligible = ~visited_mask
    n_eligible = int(eligible.sum())
    if n_eligible == 0:
        return FrameBatch(indices=(), grid_side=m, partial=True)

    if n_eligible < want:
        indices = tuple(int(i) for i in np.flatnonzero(eligible))
        return FrameBatch(indices=indices, grid_side=m, partial=True)
    weights = np.where(eligible, distribution, 0.0)
    drawn = _draw_weighted(weights, want, rng)
    return FrameBatch(indices=tuple(drawn), grid_side=m, partial=False)


def score_objects(
    detections: list[Detection],
    targets: SemanticTargets,
    batch: FrameBatch,
) -> list[tuple[int, float]]:
    """Best weighted detection per batch frame.

    Score of a frame is max(confidence * object weight) over its detections
    whose name is in the planned vocabulary; 0 with no matching detection.
    Detections naming unknown objects are ignored with a log line rather
    than failing the run.
    """
    batch_set = set(batch.indices)
    best: dict[int, float] = {f: 0.0 for f in batch.indices}
    for det in detections:
        if det.frame not in batch_set:
            log.warning("detector returned frame %d outside the batch; ignored", det.frame)
            continue
        weight = targets.weight_of(det.object_name)
        if weight is None:
            log.warning(
                "detector returned unknown object %r; ignored", det.object_name
            )
            continue
        value = det.confidence * weight
        if value > best[det.frame]:
            best[det.frame] = value
    return [(f, best[f]) for f in batch.indices]


def check_all_found(
    found_log: dict[str, float],
    targets: SemanticTargets,
    detection_threshold: float,
) -> bool:
    """True when every target (cues excluded) has been seen at or above the
    confidence threshold."""
    return all(
        found_log.get(name, -1.0) >= detection_threshold
        for name in targets.target_names()
    )


def _parse_weighted_names(entries, default_weight: float, kind: str) -> list[tuple[str, float]]:
    out = []
    for entry in entries:
        if isinstance(entry, str):
            out.append((entry, default_weight))
        elif isinstance(entry, dict):
            name = entry.get("name")
            if not isinstance(name, str) or not name:
                raise ConfigError(f"{kind} entry missing a non-empty 'name': {entry!r}")
            weight = entry.get("weight", default_weight)
            out.append((name, float(weight)))
        else:
            raise ConfigError(f"{kind} entries must be strings or objects, got {entry!r}")
    return out


DEFAULT_TARGET_WEIGHT = 1.0
DEFAULT_CUE_WEIGHT = 0.5


def plan_targets_from_file(path: str | Path) -> SemanticTargets:
    """Load targets/cues from a JSON file.

    Entries are bare strings or {"name": ..., "weight": ...} objects;
    omitted weights default to 1.0 for targets and 0.5 for cues. At least
    one target is required and names must be unique.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read targets file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("targets file must hold a JSON object")
    targets = _parse_weighted_names(data.get("targets", []), DEFAULT_TARGET_WEIGHT, "target")
    cues = _parse_weighted_names(data.get("cues", []), DEFAULT_CUE_WEIGHT, "cue")
    if not targets:
        raise ConfigError("targets file must name at least one target object")
    try:
        return SemanticTargets(targets=tuple(targets), cues=tuple(cues))
    except InvalidInputError as e:
        raise ConfigError(str(e)) from e


@dataclass
class FileTargetPlanner:
    """Planner backed by a user-supplied targets file; ignores the query."""

    path: str | Path

    def plan(self, query: str, k: int) -> SemanticTargets:
        return plan_targets_from_file(self.path)


@dataclass
class StaticPlanner:
    """Planner that always returns a fixed vocabulary."""

    targets: SemanticTargets

    def plan(self, query: str, k: int) -> SemanticTargets:
        return self.targets


class ScriptedDetector:
    """Replays a frame -> detections fixture verbatim, filtered to the
    requested frames and vocabulary. Deterministic, no I/O after load."""

    def __init__(self, script: dict[int, list[tuple[str, float]]]):
        self.script = {int(f): [(str(n), float(c)) for n, c in dets] for f, dets in script.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedDetector":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read detector fixture {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("detector fixture must map frame index to detection list")
        script: dict[int, list[tuple[str, float]]] = {}
        for key, dets in data.items():
            try:
                frame = int(key)
            except ValueError:
                raise ConfigError(f"detector fixture key {key!r} is not a frame index") from None
            if not isinstance(dets, list):
                raise ConfigError(f"detector fixture entry for frame {frame} must be a list")
            parsed = []
            for det in dets:
                if not isinstance(det, dict) or "name" not in det or "confidence" not in det:
                    raise ConfigError(
                        f"detector fixture frame {frame}: entries need 'name' and 'confidence'"
                    )
                parsed.append((str(det["name"]), float(det["confidence"])))
            script[frame] = parsed
        return cls(script)

    def detect(self, frame_indices: list[int], vocabulary: list[str]) -> list[Detection]:
        vocab = set(vocabulary)
        out = []
        for frame in frame_indices:
            for name, conf in self.script.get(int(frame), []):
                if name in vocab:
                    out.append(Detection(frame=int(frame), object_name=name, confidence=conf))
        return out
