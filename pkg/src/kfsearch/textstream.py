"""Subtitle-match stream: from query text to a per-frame relevance score.

Pipeline: embed query and segments in one batch, cosine similarity per
segment, soft-threshold amplification of strong matches, then spread each
surviving segment's score over nearby time with a Gaussian kernel and take
the per-frame maximum.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .core import SearchConfig, VideoTimeline
from .errors import InvalidInputError
from .subtitle import SubtitleSegment, SubtitleTrack


class TextEncoderBackend(Protocol):
    """Maps a batch of texts to one embedding vector each, same order.

    Must be deterministic within a session and return vectors of a single
    fixed dimension.
    """

    def embed(self, texts: list[str]) -> np.ndarray: ...


STUB_EMBED_DIM = 64


class HashedBagOfWordsEncoder:
    """Deterministic test encoder: token counts hashed into 64 buckets.

    L2-normalized, so cosine similarity reduces to a dot product. Texts
    sharing tokens get positive similarity; disjoint texts land near zero
    (up to bucket collisions). No I/O, no model weights.
    """

    def __init__(self, dim: int = STUB_EMBED_DIM):
        self.dim = dim

    @staticmethod
    def _tokens(text: str) -> list[str]:
        out = []
        word = []
        for ch in text.lower():
            if ch.isalnum():
                word.append(ch)
            elif word:
                out.append("".join(word))
                word = []
        if word:
            out.append("".join(word))
        return out

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed(self, texts: list[str]) -> np.ndarray:
        vecs = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in self._tokens(text):
                vecs[row, self._bucket(token)] += 1.0
            norm = np.linalg.norm(vecs[row])
            if norm > 0:
                vecs[row] /= norm
        return vecs


@dataclass(frozen=True)
class EnhancedSimilarity:
    """Per-segment raw cosine scores and their soft-threshold amplification."""

    raw: np.ndarray
    enhanced: np.ndarray


def similarity_scores(query_vec: np.ndarray, segment_vecs: np.ndarray) -> np.ndarray:
    """Cosine similarity of the query against each segment embedding.

    A zero segment vector scores 0. The query vector must be non-zero and
    match the segment dimension.
    """
    query_vec = np.asarray(query_vec, dtype=np.float64)
    segment_vecs = np.asarray(segment_vecs, dtype=np.float64)
    if segment_vecs.size == 0:
        return np.zeros(0, dtype=np.float64)
    if segment_vecs.ndim != 2 or segment_vecs.shape[1] != query_vec.shape[0]:
        raise InvalidInputError(
            f"dimension mismatch: query {query_vec.shape} vs segments {segment_vecs.shape}"
        )
    qnorm = np.linalg.norm(query_vec)
    if qnorm == 0:
        raise InvalidInputError("query vector is all zeros")
    seg_norms = np.linalg.norm(segment_vecs, axis=1)
    dots = segment_vecs @ query_vec
    out = np.zeros(len(segment_vecs), dtype=np.float64)
    nonzero = seg_norms > 0
    out[nonzero] = dots[nonzero] / (seg_norms[nonzero] * qnorm)
    return np.clip(out, -1.0, 1.0)


def soft_threshold(raw: np.ndarray, threshold: float, amplification: float) -> np.ndarray:
    """Amplify similarities above ``threshold``, capped at 1.0.

    Identity for scores at or below the threshold; monotone non-decreasing.
    """
    raw = np.asarray(raw, dtype=np.float64)
    return np.minimum(raw + amplification * np.maximum(raw - threshold, 0.0), 1.0)


def kernel_sigma(seg: SubtitleSegment, extension_radius_s: float) -> float:
    """Kernel width in seconds: a quarter of the extended segment span."""
    return (seg.end_s - seg.begin_s + 2.0 * extension_radius_s) / 4.0


def gaussian_kernel(
    seg: SubtitleSegment, amplitude: float, extension_radius_s: float, t: float
) -> float:
    """Propagated score of one segment at time ``t``.

    Peaks at the segment midpoint with value ``amplitude`` and decays with
    a standard deviation tied to the segment's extended duration. With a
    zero-width kernel (instant segment, zero radius) the score is the
    amplitude exactly at the midpoint and 0 elsewhere.
    """
    center = seg.center
    sigma = kernel_sigma(seg, extension_radius_s)
    if sigma == 0.0:
        return amplitude if t == center else 0.0
    return amplitude * math.exp(-((t - center) ** 2) / (2.0 * sigma * sigma))


def aggregate_text_scores(
    track: SubtitleTrack,
    enhanced: np.ndarray,
    timeline: VideoTimeline,
    cfg: SearchConfig,
) -> np.ndarray:
    """Per-frame text score: max kernel value over qualifying segments.

    A segment qualifies at frame time t when its enhanced score exceeds the
    segment threshold and t lies within the segment extended by the radius
    on both sides. Frames covered by no qualifying segment score 0.
    """
    enhanced = np.asarray(enhanced, dtype=np.float64)
    if len(enhanced) != len(track.segments):
        raise InvalidInputError(
            f"{len(enhanced)} enhanced scores for {len(track.segments)} segments"
        )
    n = timeline.frame_count
    fps = timeline.fps
    radius = cfg.extension_radius_s
    scores = np.zeros(n, dtype=np.float64)

    for seg, amp in zip(track.segments, enhanced):
        if not (amp > cfg.segment_threshold):
            continue
        lo_t = seg.begin_s - radius
        hi_t = seg.end_s + radius
        # Candidate index range padded by one frame, then masked by the exact
        # time-interval condition to stay bit-identical with a per-frame scan.
        f_lo = max(int(math.floor(lo_t * fps)) - 1, 0)
        f_hi = min(int(math.ceil(hi_t * fps)) + 1, n - 1)
        if f_hi < f_lo:
            continue
        frames = np.arange(f_lo, f_hi + 1)
        times = frames / fps
        inside = (times >= lo_t) & (times <= hi_t)
        if not inside.any():
            continue
        frames = frames[inside]
        times = times[inside]
        sigma = kernel_sigma(seg, radius)
        if sigma == 0.0:
            values = np.where(times == seg.center, amp, 0.0)
        else:
            values = amp * np.exp(-((times - seg.center) ** 2) / (2.0 * sigma * sigma))
        np.maximum.at(scores, frames, values)
    return np.clip(scores, 0.0, 1.0)


def compute_text_scores(
    track: SubtitleTrack,
    query: str,
    encoder: TextEncoderBackend,
    timeline: VideoTimeline,
    cfg: SearchConfig,
    return_detail: bool = False,
):
    """Full subtitle-match stream for one query.

    Embeds the query and every segment in one backend call, enhances the
    similarities, and aggregates kernels to a per-frame array in [0, 1].
    An empty track yields all zeros. When ``return_detail`` is set, also
    returns the per-segment EnhancedSimilarity.
    """
    if not track.segments:
        scores = np.zeros(timeline.frame_count, dtype=np.float64)
        detail = EnhancedSimilarity(raw=np.zeros(0), enhanced=np.zeros(0))
        return (scores, detail) if return_detail else scores
    vectors = np.asarray(encoder.embed([query] + track.texts()), dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] != len(track.segments) + 1:
        raise InvalidInputError(
            f"encoder returned shape {vectors.shape} for {len(track.segments) + 1} texts"
        )
    raw = similarity_scores(vectors[0], vectors[1:])
    enhanced = soft_threshold(raw, cfg.sim_threshold, cfg.amplification)
    scores = aggregate_text_scores(track, enhanced, timeline, cfg)
    if return_detail:
        return scores, EnhancedSimilarity(raw=raw, enhanced=enhanced)
    return scores
