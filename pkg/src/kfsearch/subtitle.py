"""SRT subtitle parsing and timed-text segment access.

The parser is strict by default: timestamps must follow
``HH:MM:SS,mmm --> HH:MM:SS,mmm`` with a comma millisecond separator. A
lenient mode additionally accepts ``.`` as the separator (some tools emit
it). Hours may have more than two digits for very long videos.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SrtParseError

_TAG_RE = re.compile(r"<[^>]*>")
_TIME_PART = r"(\d{2,}):([0-5]\d):([0-5]\d)([,.])(\d{3})"
_TIME_LINE_RE = re.compile(rf"^\s*{_TIME_PART}\s*-->\s*{_TIME_PART}\s*$")
_INDEX_LINE_RE = re.compile(r"^\s*\d+\s*$")


@dataclass(frozen=True)
class SubtitleSegment:
    """One timed cue: [begin_s, end_s] seconds plus its text.

    ``index`` is the cue's position in the source file; it is presentation
    metadata and does not participate in equality.
    """

    index: int = field(compare=False)
    begin_s: float
    end_s: float
    text: str

    def __post_init__(self):
        if self.begin_s < 0 or self.begin_s > self.end_s:
            raise ValueError(f"segment {self.index}: bad timing {self.begin_s}..{self.end_s}")
        if not self.text or self.text != self.text.strip():
            raise ValueError(f"segment {self.index}: text must be non-empty and stripped")

    @property
    def center(self) -> float:
        return (self.begin_s + self.end_s) / 2.0

    @property
    def duration_s(self) -> float:
        return self.end_s - self.begin_s


def segment_center(seg: SubtitleSegment) -> float:
    """Midpoint of the segment in seconds."""
    return seg.center


@dataclass(frozen=True)
class SubtitleTrack:
    """Segments sorted by begin time (stable on ties)."""

    segments: tuple[SubtitleSegment, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.segments, key=lambda s: s.begin_s))
        object.__setattr__(self, "segments", ordered)

    def __len__(self) -> int:
        return len(self.segments)

    def texts(self) -> list[str]:
        return [s.text for s in self.segments]


def _parse_timestamp(match_groups: tuple, offset: int) -> float:
    h, m, s, ms = (match_groups[offset + i] for i in (0, 1, 2, 4))
    return int(h) * 3600.0 + int(m) * 60.0 + int(s) + int(ms) / 1000.0


def parse_srt(raw: str, lenient: bool = False) -> SubtitleTrack:
    """Parse SRT text into a SubtitleTrack.

    Multi-line cue text is joined with a single space, markup tags are
    stripped, and cues that end up empty are dropped. Raises SrtParseError
    with a 1-based line number on a malformed timestamp line or a cue whose
    begin time is after its end.
    """
    if raw.startswith("﻿"):
        raw = raw[1:]
    lines = raw.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    segments: list[SubtitleSegment] = []
    i = 0
    n = len(lines)
    cue_counter = 0
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        # Optional numeric counter line directly before the timing line.
        if _INDEX_LINE_RE.match(lines[i]) and i + 1 < n and lines[i + 1].strip():
            time_lineno = i + 1
        else:
            time_lineno = i
        time_match = _TIME_LINE_RE.match(lines[time_lineno])
        if not time_match:
            raise SrtParseError(
                f"expected 'HH:MM:SS,mmm --> HH:MM:SS,mmm', got {lines[time_lineno].strip()!r}",
                line=time_lineno + 1,
            )
        groups = time_match.groups()
        if not lenient and (groups[3] != "," or groups[8] != ","):
            raise SrtParseError(
                "millisecond separator must be ',' (use lenient mode to accept '.')",
                line=time_lineno + 1,
            )
        begin_s = _parse_timestamp(groups, 0)
        end_s = _parse_timestamp(groups, 5)
        if begin_s > end_s:
            raise SrtParseError(
                f"begin {begin_s:.3f}s is after end {end_s:.3f}s", line=time_lineno + 1
            )

        i = time_lineno + 1
        text_lines = []
        while i < n and lines[i].strip():
            text_lines.append(lines[i])
            i += 1
        text = " ".join(_TAG_RE.sub("", part).strip() for part in text_lines)
        text = " ".join(text.split())
        if text:
            cue_counter += 1
            segments.append(
                SubtitleSegment(index=cue_counter, begin_s=begin_s, end_s=end_s, text=text)
            )
    return SubtitleTrack(segments=tuple(segments))


def _format_timestamp(seconds: float) -> str:
    total_ms = round(seconds * 1000.0)
    ms = total_ms % 1000
    total_s = total_ms // 1000
    s = total_s % 60
    total_m = total_s // 60
    m = total_m % 60
    h = total_m // 60
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def track_to_srt(track: SubtitleTrack) -> str:
    """Serialize a track back to SRT. Re-parsing yields an equal track."""
    blocks = []
    for pos, seg in enumerate(track.segments, start=1):
        blocks.append(
            f"{pos}\n{_format_timestamp(seg.begin_s)} --> {_format_timestamp(seg.end_s)}\n{seg.text}\n"
        )
    return "\n".join(blocks)
