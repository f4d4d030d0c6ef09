"""Per-frame prototype-similarity traces and their canonical file format.

A trace is one video reduced to a data stream: for every frame, one pooled
similarity score per prototype, plus video-level metadata (labels, length,
and the prototype catalog the scores are indexed by).

The on-disk format is line-oriented JSON: one header object, then one object
per frame, in frame order.  Floats are written with 17 significant digits so
that read(write(t)) reproduces every score bit-exactly.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

FORMAT_VERSION = "1"


class Label(str, enum.Enum):
    REAL = "REAL"
    FAKE = "FAKE"

    @property
    def index(self) -> int:
        """Class index used by the classifier head (REAL=0, FAKE=1)."""
        return 0 if self is Label.REAL else 1

    @property
    def opposite(self) -> "Label":
        return Label.FAKE if self is Label.REAL else Label.REAL


class TraceError(Exception):
    """Base class for trace reading/validation failures."""


class TraceParseError(TraceError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TraceInvariantError(TraceError):
    """A structurally parseable trace violates a named invariant."""

    def __init__(self, invariant: str, detail: str, line: int | None = None):
        self.invariant = invariant
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{invariant}: {detail}")


@dataclass(frozen=True)
class PrototypeMeta:
    """Identity and class assignment of one prototype in the catalog."""

    id: int
    class_label: Label


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    similarities: tuple[float, ...]


@dataclass(frozen=True)
class Trace:
    video_id: str
    frames: tuple[FrameRecord, ...]
    ground_truth: Label
    predicted: Label
    catalog: tuple[PrototypeMeta, ...]

    @property
    def length(self) -> int:
        """Number of frames (the trace horizon)."""
        return len(self.frames)

    @property
    def num_prototypes(self) -> int:
        return len(self.catalog)

    def score(self, frame: int, prototype: int) -> float:
        return self.frames[frame].similarities[prototype]

    def prototype_ids(self, class_label: Label) -> tuple[int, ...]:
        return tuple(p.id for p in self.catalog if p.class_label is class_label)

    def validate(self) -> None:
        """Raise TraceInvariantError on the first violated invariant."""
        validate_catalog(self.catalog)
        if self.length < 1:
            raise TraceInvariantError("trace length", "a trace needs at least one frame")
        m = self.num_prototypes
        for pos, frame in enumerate(self.frames):
            if frame.frame_index != pos:
                raise TraceInvariantError(
                    "frame index order",
                    f"expected frame_index {pos}, found {frame.frame_index}",
                )
            if len(frame.similarities) != m:
                raise TraceInvariantError(
                    "similarity arity mismatch",
                    f"frame {pos} has {len(frame.similarities)} scores, catalog has {m}",
                )
            for j, s in enumerate(frame.similarities):
                if not (0.0 < s <= 1.0):
                    raise TraceInvariantError(
                        "similarity out of range",
                        f"score {s!r} for prototype {j} at frame {pos} is outside (0, 1]",
                    )


def validate_catalog(catalog: Sequence[PrototypeMeta]) -> None:
    if not catalog:
        raise TraceInvariantError("catalog", "catalog is empty")
    ids = [p.id for p in catalog]
    if ids != list(range(len(catalog))):
        raise TraceInvariantError(
            "catalog ids", f"prototype ids must be 0..{len(catalog) - 1} in order, got {ids}"
        )


def format_float(x: float) -> str:
    """Canonical decimal rendering: 17 significant digits, round-trip exact."""
    return format(float(x), ".17g")


def _parse_label(raw: object, field: str, line: int) -> Label:
    try:
        return Label(raw)
    except ValueError:
        raise TraceParseError(f"{field} must be REAL or FAKE, got {raw!r}", line) from None


def _parse_catalog(raw: object, line: int) -> tuple[PrototypeMeta, ...]:
    if not isinstance(raw, list):
        raise TraceParseError("catalog must be a list", line)
    entries = []
    for entry in raw:
        if not isinstance(entry, dict) or set(entry) != {"class", "id"}:
            raise TraceParseError(
                f"catalog entries must be objects with keys class, id; got {entry!r}", line
            )
        if not isinstance(entry["id"], int):
            raise TraceParseError(f"catalog id must be an integer, got {entry['id']!r}", line)
        entries.append(PrototypeMeta(entry["id"], _parse_label(entry["class"], "catalog class", line)))
    return tuple(entries)


def read_trace(path: str | Path) -> Trace:
    """Parse a trace file, check every invariant, and return the Trace."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise TraceParseError("empty trace file", 1)

    def load(line_no: int, text: str) -> dict:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TraceParseError(f"invalid JSON ({exc.msg})", line_no) from None
        if not isinstance(obj, dict):
            raise TraceParseError("each line must be a JSON object", line_no)
        return obj

    header = load(1, lines[0])
    required = {"T_V", "catalog", "ground_truth", "predicted", "version", "video_id"}
    missing = required - set(header)
    if missing:
        raise TraceParseError(f"header missing fields: {sorted(missing)}", 1)
    if header["version"] != FORMAT_VERSION:
        raise TraceParseError(f"unsupported version {header['version']!r}", 1)
    if not isinstance(header["T_V"], int):
        raise TraceParseError(f"T_V must be an integer, got {header['T_V']!r}", 1)
    catalog = _parse_catalog(header["catalog"], 1)

    frames = []
    for offset, text in enumerate(lines[1:], start=2):
        obj = load(offset, text)
        if set(obj) != {"frame_index", "similarities"}:
            raise TraceParseError(
                f"frame lines need exactly frame_index and similarities, got keys {sorted(obj)}",
                offset,
            )
        if not isinstance(obj["frame_index"], int):
            raise TraceParseError("frame_index must be an integer", offset)
        sims = obj["similarities"]
        if not isinstance(sims, list) or not all(isinstance(s, (int, float)) for s in sims):
            raise TraceParseError("similarities must be a list of numbers", offset)
        frames.append(FrameRecord(obj["frame_index"], tuple(float(s) for s in sims)))

    trace = Trace(
        video_id=str(header["video_id"]),
        frames=tuple(frames),
        ground_truth=_parse_label(header["ground_truth"], "ground_truth", 1),
        predicted=_parse_label(header["predicted"], "predicted", 1),
        catalog=catalog,
    )
    trace.validate()
    if header["T_V"] != trace.length:
        raise TraceInvariantError(
            "trace length", f"header T_V={header['T_V']} but file has {trace.length} frames", 1
        )
    return trace


def trace_lines(trace: Trace) -> Iterable[str]:
    header = {
        "T_V": trace.length,
        "catalog": [{"class": p.class_label.value, "id": p.id} for p in trace.catalog],
        "ground_truth": trace.ground_truth.value,
        "predicted": trace.predicted.value,
        "version": FORMAT_VERSION,
        "video_id": trace.video_id,
    }
    yield json.dumps(header, sort_keys=True)
    for frame in trace.frames:
        scores = ", ".join(format_float(s) for s in frame.similarities)
        yield '{"frame_index": %d, "similarities": [%s]}' % (frame.frame_index, scores)


def write_trace(trace: Trace, path: str | Path) -> None:
    """Validate, then write the canonical serialization of `trace`."""
    trace.validate()
    Path(path).write_text("\n".join(trace_lines(trace)) + "\n", encoding="utf-8")
