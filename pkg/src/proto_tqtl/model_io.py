"""Canonical on-disk formats for prototype banks and latent-clip datasets.

Both are line-oriented JSON with sorted keys and 17-significant-digit float
rendering, like trace files, so write -> read -> write is byte-stable and
vectors survive bit-exactly.

Model file:   header {C, K, m, version}, one line per prototype
              {class, grounding, id, vector}, then one line {fc_weights}.
Dataset file: header {C, H, W, count, version}, one line per clip
              {label, patches} with patches nested H x W x C.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .prototypes import K_CLASSES, LatentClip, PrototypeBank
from .trace import FORMAT_VERSION, Label, PrototypeMeta, format_float


class ModelFileError(Exception):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _vector_json(values) -> str:
    return "[%s]" % ", ".join(format_float(v) for v in values)


def _load_line(text: str, line_no: int) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"invalid JSON ({exc.msg})", line_no) from None
    if not isinstance(obj, dict):
        raise ModelFileError("each line must be a JSON object", line_no)
    return obj


def write_model(bank: PrototypeBank, path: str | Path) -> None:
    lines = [
        json.dumps(
            {"C": bank.dim, "K": K_CLASSES, "m": bank.num_prototypes, "version": FORMAT_VERSION},
            sort_keys=True,
        )
    ]
    for meta in bank.catalog:
        grounding = (bank.grounding or {}).get(meta.id)
        gtext = "null" if grounding is None else "[%d, %d, %d]" % tuple(grounding)
        lines.append(
            '{"class": "%s", "grounding": %s, "id": %d, "vector": %s}'
            % (meta.class_label.value, gtext, meta.id, _vector_json(bank.vectors[meta.id]))
        )
    lines.append(
        '{"fc_weights": [%s]}' % ", ".join(_vector_json(row) for row in bank.fc_weights)
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_model(path: str | Path) -> PrototypeBank:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 3:
        raise ModelFileError("model file needs a header, prototypes, and fc_weights")
    header = _load_line(lines[0], 1)
    for key in ("C", "K", "m", "version"):
        if key not in header:
            raise ModelFileError(f"header missing {key}", 1)
    if header["version"] != FORMAT_VERSION:
        raise ModelFileError(f"unsupported version {header['version']!r}", 1)
    if header["K"] != K_CLASSES:
        raise ModelFileError(f"expected K={K_CLASSES}, got {header['K']}", 1)
    m, dim = header["m"], header["C"]
    if len(lines) != m + 2:
        raise ModelFileError(f"expected {m} prototype lines plus fc_weights, found {len(lines) - 1}")

    catalog: list[PrototypeMeta] = []
    vectors = np.zeros((m, dim))
    grounding: dict[int, tuple[int, int, int]] = {}
    for line_no, text in enumerate(lines[1 : 1 + m], start=2):
        obj = _load_line(text, line_no)
        if set(obj) != {"class", "grounding", "id", "vector"}:
            raise ModelFileError(f"bad prototype keys {sorted(obj)}", line_no)
        try:
            label = Label(obj["class"])
        except ValueError:
            raise ModelFileError(f"bad class {obj['class']!r}", line_no) from None
        vec = obj["vector"]
        if not isinstance(vec, list) or len(vec) != dim:
            raise ModelFileError(f"vector must have C={dim} entries", line_no)
        pid = obj["id"]
        if not isinstance(pid, int) or not (0 <= pid < m):
            raise ModelFileError(f"prototype id {pid!r} out of range", line_no)
        catalog.append(PrototypeMeta(pid, label))
        vectors[pid] = np.asarray(vec, dtype=np.float64)
        if obj["grounding"] is not None:
            g = obj["grounding"]
            if not (isinstance(g, list) and len(g) == 3 and all(isinstance(v, int) for v in g)):
                raise ModelFileError(f"grounding must be [clip, row, col], got {g!r}", line_no)
            grounding[pid] = tuple(g)

    fc_obj = _load_line(lines[1 + m], m + 2)
    if set(fc_obj) != {"fc_weights"}:
        raise ModelFileError("last line must hold fc_weights", m + 2)
    fc = np.asarray(fc_obj["fc_weights"], dtype=np.float64)
    if fc.shape != (K_CLASSES, m):
        raise ModelFileError(f"fc_weights must be {K_CLASSES} x {m}, got {fc.shape}", m + 2)
    try:
        return PrototypeBank(vectors, tuple(catalog), fc, grounding or None)
    except Exception as exc:
        raise ModelFileError(str(exc)) from None


def write_dataset(clips: list[LatentClip], path: str | Path) -> None:
    if not clips:
        raise ValueError("dataset must contain at least one clip")
    shapes = {clip.patches.shape for clip in clips}
    if len(shapes) != 1:
        raise ValueError(f"clips in one dataset file must share a grid shape, got {sorted(shapes)}")
    h, w, dim = clips[0].patches.shape
    lines = [
        json.dumps(
            {"C": dim, "H": h, "W": w, "count": len(clips), "version": FORMAT_VERSION},
            sort_keys=True,
        )
    ]
    for clip in clips:
        rows = ", ".join(
            "[%s]" % ", ".join(_vector_json(cell) for cell in row) for row in clip.patches
        )
        lines.append('{"label": "%s", "patches": [%s]}' % (clip.label.value, rows))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset(path: str | Path) -> list[LatentClip]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ModelFileError("empty dataset file", 1)
    header = _load_line(lines[0], 1)
    for key in ("C", "H", "W", "count", "version"):
        if key not in header:
            raise ModelFileError(f"header missing {key}", 1)
    if header["version"] != FORMAT_VERSION:
        raise ModelFileError(f"unsupported version {header['version']!r}", 1)
    expected_shape = (header["H"], header["W"], header["C"])
    if len(lines) - 1 != header["count"]:
        raise ModelFileError(f"header count={header['count']} but file has {len(lines) - 1} clips")

    clips = []
    for line_no, text in enumerate(lines[1:], start=2):
        obj = _load_line(text, line_no)
        if set(obj) != {"label", "patches"}:
            raise ModelFileError(f"bad clip keys {sorted(obj)}", line_no)
        try:
            label = Label(obj["label"])
        except ValueError:
            raise ModelFileError(f"bad label {obj['label']!r}", line_no) from None
        patches = np.asarray(obj["patches"], dtype=np.float64)
        if patches.shape != expected_shape:
            raise ModelFileError(
                f"patches shape {patches.shape} does not match header {expected_shape}", line_no
            )
        clips.append(LatentClip(patches, label))
    return clips
