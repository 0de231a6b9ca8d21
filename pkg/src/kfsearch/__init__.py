"""Query-guided keyframe search for long videos.

Two evidence streams score frames against a textual query: subtitle
segments matched by sentence embedding, and object detections from a
pluggable visual backend. The fused scores steer an iterative, budgeted
frame-sampling loop whose top-scoring visited frames are the keyframes.
"""

from .core import ScoreState, SearchConfig, SemanticTargets, VideoTimeline
from .errors import (
    BackendError,
    ConfigError,
    InvalidInputError,
    KfSearchError,
    SearchError,
    SrtParseError,
)
from .fusion import FusedScores, fuse, update_distribution, znorm
from .harness import SyntheticCase, generate_case, generate_corpus, keyframe_hit, run_benchmark
from .search import SearchOutcome, search, select_topk
from .subtitle import SubtitleSegment, SubtitleTrack, parse_srt, segment_center, track_to_srt
from .textstream import (
    HashedBagOfWordsEncoder,
    aggregate_text_scores,
    compute_text_scores,
    gaussian_kernel,
    similarity_scores,
    soft_threshold,
)
from .videostream import (
    Detection,
    FileTargetPlanner,
    FrameBatch,
    ScriptedDetector,
    StaticPlanner,
    check_all_found,
    plan_targets_from_file,
    sample_frames,
    score_objects,
)

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "ConfigError",
    "Detection",
    "FileTargetPlanner",
    "FrameBatch",
    "FusedScores",
    "HashedBagOfWordsEncoder",
    "InvalidInputError",
    "KfSearchError",
    "ScoreState",
    "ScriptedDetector",
    "SearchConfig",
    "SearchError",
    "SearchOutcome",
    "SemanticTargets",
    "SrtParseError",
    "StaticPlanner",
    "SubtitleSegment",
    "SubtitleTrack",
    "SyntheticCase",
    "VideoTimeline",
    "aggregate_text_scores",
    "check_all_found",
    "compute_text_scores",
    "fuse",
    "gaussian_kernel",
    "generate_case",
    "generate_corpus",
    "keyframe_hit",
    "parse_srt",
    "plan_targets_from_file",
    "run_benchmark",
    "sample_frames",
    "score_objects",
    "search",
    "segment_center",
    "select_topk",
    "similarity_scores",
    "soft_threshold",
    "track_to_srt",
    "update_distribution",
    "znorm",
]
