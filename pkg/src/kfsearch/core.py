"""Domain types shared by every stage of the keyframe search.

Frames are 0-indexed everywhere. Subtitle timing and kernel widths are in
seconds; conversion to frame indices happens only when per-frame scores are
materialized.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInputError


@dataclass(frozen=True)
class VideoTimeline:
    """The search space: a frame-indexed video with a fixed frame rate."""

    frame_count: int
    fps: float

    def __post_init__(self):
        if self.frame_count < 1:
            raise InvalidInputError(f"frame_count must be >= 1, got {self.frame_count}")
        if not (math.isfinite(self.fps) and self.fps > 0):
            raise InvalidInputError(f"fps must be a positive finite number, got {self.fps}")

    def frame_to_seconds(self, frame: int) -> float:
        return frame / self.fps

    def seconds_to_frame(self, t: float) -> int:
        """Map a timestamp to the frame index shown at that instant.

        Clamped to the valid index range; non-finite input is rejected.
        """
        if not math.isfinite(t):
            raise InvalidInputError(f"timestamp must be finite, got {t}")
        return int(min(max(math.floor(t * self.fps), 0), self.frame_count - 1))

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.fps


def seconds_to_frame(t: float, timeline: VideoTimeline) -> int:
    return timeline.seconds_to_frame(t)


@dataclass(frozen=True)
class SemanticTargets:
    """Object vocabularies steering the visual stream.

    ``targets`` are entities the query is directly about; ``cues`` are
    contextual hints. Each entry is (name, importance weight in (0, 1]).
    Names must be unique across the union of both lists.
    """

    targets: tuple[tuple[str, float], ...]
    cues: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple((str(n), float(w)) for n, w in self.targets))
        object.__setattr__(self, "cues", tuple((str(n), float(w)) for n, w in self.cues))
        seen = set()
        for name, weight in self.targets + self.cues:
            if not name:
                raise InvalidInputError("object names must be non-empty")
            if name in seen:
                raise InvalidInputError(f"duplicate object name: {name!r}")
            seen.add(name)
            if not (0.0 < weight <= 1.0):
                raise InvalidInputError(f"weight for {name!r} must be in (0, 1], got {weight}")

    def vocabulary(self) -> list[str]:
        """All object names, targets first."""
        return [n for n, _ in self.targets] + [n for n, _ in self.cues]

    def target_names(self) -> list[str]:
        return [n for n, _ in self.targets]

    def weight_of(self, name: str) -> float | None:
        for n, w in self.targets + self.cues:
            if n == name:
                return w
        return None


# Keys are the documented config-file keys; they match the field names.
@dataclass(frozen=True)
class SearchConfig:
    """Tunables for one search run.

    ``text_weight`` is the fusion weight of the subtitle stream; the visual
    stream gets ``1 - text_weight``. ``frame_budget`` caps the total number
    of frames the detector may ever see across all iterations.
    """

    text_weight: float = 0.7
    sim_threshold: float = 0.5
    amplification: float = 2.0
    segment_threshold: float = 0.2
    extension_radius_s: float = 2.0
    detection_threshold: float = 0.5
    frame_budget: int = 128
    max_grid_side: int = 8
    top_k: int = 4
    znorm_epsilon: float = 1e-6
    rng_seed: int = 0
    # Off-by-default variants kept for experimentation.
    rescale_fused: bool = False   # min-max rescale fused batch scores to [0,1]
    uncapped_batch: bool = False  # size batches purely from remaining budget

    def __post_init__(self):
        if not (0.0 <= self.text_weight <= 1.0):
            raise ConfigError(f"text_weight must be in [0, 1], got {self.text_weight}")
        for name in ("sim_threshold", "segment_threshold", "detection_threshold"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not (math.isfinite(self.amplification) and self.amplification >= 0):
            raise ConfigError(f"amplification must be finite and >= 0, got {self.amplification}")
        if not (math.isfinite(self.extension_radius_s) and self.extension_radius_s >= 0):
            raise ConfigError(f"extension_radius_s must be finite and >= 0, got {self.extension_radius_s}")
        if self.frame_budget < 1:
            raise ConfigError(f"frame_budget must be >= 1, got {self.frame_budget}")
        if self.max_grid_side < 1:
            raise ConfigError(f"max_grid_side must be >= 1, got {self.max_grid_side}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if not (math.isfinite(self.znorm_epsilon) and self.znorm_epsilon > 0):
            raise ConfigError(f"znorm_epsilon must be finite and > 0, got {self.znorm_epsilon}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_mapping(cls, mapping: dict, ignore_unknown: bool = False) -> "SearchConfig":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            if key not in known:
                if ignore_unknown:
                    continue
                raise ConfigError(f"unknown config key: {key!r}")
            kwargs[key] = _coerce_field(key, value)
        return cls(**kwargs)

    def to_kv_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, float):
                rendered = repr(value)
            else:
                rendered = str(value)
            lines.append(f"{f.name} = {rendered}")
        return "\n".join(lines) + "\n"

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(self.to_kv_text(), encoding="utf-8")

    @classmethod
    def from_file(cls, path: str | Path) -> "SearchConfig":
        return cls.from_mapping(parse_kv_file(path))

    def with_overrides(self, **kwargs) -> "SearchConfig":
        return replace(self, **kwargs)


_BOOL_FIELDS = {"rescale_fused", "uncapped_batch"}
_INT_FIELDS = {"frame_budget", "max_grid_side", "top_k", "rng_seed"}


def _coerce_field(key: str, value):
    if key in _BOOL_FIELDS:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ConfigError(f"{key} expects true/false, got {value!r}")
    try:
        if key in _INT_FIELDS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} expects a number, got {value!r}") from None


def parse_kv_file(path: str | Path) -> dict:
    """Parse a ``key = value`` config file into a flat dict.

    Blank lines and ``#`` comments are skipped. Values that look like JSON
    scalars (numbers, true/false) are decoded; everything else stays a string.
    """
    out: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


class ScoreState:
    """Mutable per-run scoring state.

    Holds the per-frame score arrays, the ordered set of visited frames, and
    the current frame-sampling distribution. Owned by exactly one search run;
    not safe for concurrent mutation.
    """

    def __init__(self, frame_count: int):
        if frame_count < 1:
            raise InvalidInputError(f"frame_count must be >= 1, got {frame_count}")
        self.frame_count = frame_count
        self.object_scores = np.zeros(frame_count, dtype=np.float64)
        self.text_scores = np.zeros(frame_count, dtype=np.float64)
        self.fused_scores = np.zeros(frame_count, dtype=np.float64)
        self.visited: list[int] = []
        self._visited_mask = np.zeros(frame_count, dtype=bool)
        self.distribution = np.full(frame_count, 1.0 / frame_count, dtype=np.float64)

    def is_visited(self, frame: int) -> bool:
        return bool(self._visited_mask[frame])

    def mark_visited(self, frame: int) -> None:
        if not (0 <= frame < self.frame_count):
            raise InvalidInputError(f"frame {frame} outside [0, {self.frame_count})")
        if not self._visited_mask[frame]:
            self._visited_mask[frame] = True
            self.visited.append(frame)

    @property
    def visited_mask(self) -> np.ndarray:
        return self._visited_mask

    def validate(self) -> None:
        n = self.frame_count
        for name in ("object_scores", "text_scores", "fused_scores", "distribution"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise InvalidInputError(f"{name} has shape {arr.shape}, expected ({n},)")
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"{name} contains non-finite values")
        if np.any(self.object_scores < 0) or np.any(self.object_scores > 1):
            raise InvalidInputError("object_scores outside [0, 1]")
        if np.any(self.text_scores < 0) or np.any(self.text_scores > 1):
            raise InvalidInputError("text_scores outside [0, 1]")
        if abs(float(self.distribution.sum()) - 1.0) > 1e-9:
            raise InvalidInputError("distribution does not sum to 1")
        if np.any(self.distribution <= 0):
            raise InvalidInputError("distribution has non-positive entries")
        if any(not (0 <= f < n) for f in self.visited):
            raise InvalidInputError("visited contains out-of-range frames")

    def snapshot(self) -> dict:
        """JSON-ready copy of the full state, used for tracing."""
        return {
            "object_scores": self.object_scores.tolist(),
            "text_scores": self.text_scores.tolist(),
            "fused_scores": self.fused_scores.tolist(),
            "visited": list(self.visited),
            "distribution": self.distribution.tolist(),
        }
