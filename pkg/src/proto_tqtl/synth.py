"""Synthetic latent datasets and hand-scripted traces.

Every downstream piece is testable without real video: clips are drawn as
class center + isotropic Gaussian noise, and traces can be scripted directly
from a per-frame score table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .prototypes import LatentClip
from .trace import FrameRecord, Label, PrototypeMeta, Trace


def _default_centers() -> dict[Label, list[np.ndarray]]:
    # two well-separated Gaussians in 8 dimensions, distance 10 apart
    real = np.zeros(8)
    fake = np.zeros(8)
    real[0] = 5.0
    fake[0] = -5.0
    return {Label.REAL: [real], Label.FAKE: [fake]}


@dataclass
class SynthSpec:
    clips_per_class: int = 20
    grid_h: int = 4
    grid_w: int = 4
    dim: int = 8
    class_centers: dict[Label, list[np.ndarray]] = field(default_factory=_default_centers)
    noise_scale: float = 0.1
    seed: int = 7

    def __post_init__(self):
        if self.clips_per_class < 1:
            raise ValueError("clips_per_class must be >= 1")
        if min(self.grid_h, self.grid_w, self.dim) < 1:
            raise ValueError("grid and dim must be >= 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")
        centers = {}
        for label in Label:
            given = self.class_centers.get(label, [])
            if not given:
                raise ValueError(f"class {label.value} needs at least one center")
            arrays = [np.asarray(c, dtype=np.float64) for c in given]
            for c in arrays:
                if c.shape != (self.dim,):
                    raise ValueError(f"center shape {c.shape} does not match dim {self.dim}")
            centers[label] = arrays
        self.class_centers = centers


def spec_from_dict(raw: dict) -> SynthSpec:
    kwargs = dict(raw)
    if "class_centers" in kwargs:
        kwargs["class_centers"] = {
            Label(name): list(vs) for name, vs in kwargs["class_centers"].items()
        }
    return SynthSpec(**kwargs)


def spec_to_dict(spec: SynthSpec) -> dict:
    return {
        "clips_per_class": spec.clips_per_class,
        "grid_h": spec.grid_h,
        "grid_w": spec.grid_w,
        "dim": spec.dim,
        "class_centers": {
            label.value: [list(map(float, c)) for c in centers]
            for label, centers in spec.class_centers.items()
        },
        "noise_scale": spec.noise_scale,
        "seed": spec.seed,
    }


def load_spec(path: str | Path) -> SynthSpec:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError("synthetic data config must be a JSON object")
    return spec_from_dict(raw)


def generate_dataset(spec: SynthSpec) -> list[LatentClip]:
    """All REAL clips, then all FAKE clips; clip k uses its own derived seed
    (spec.seed + k), so generation parallelizes without changing output."""
    clips = []
    index = 0
    for label in Label:
        centers = spec.class_centers[label]
        for i in range(spec.clips_per_class):
            rng = np.random.default_rng(spec.seed + index)
            center = centers[i % len(centers)]
            noise = spec.noise_scale * rng.standard_normal((spec.grid_h, spec.grid_w, spec.dim))
            clips.append(LatentClip(center[None, None, :] + noise, label))
            index += 1
    return clips


def script_trace(
    schedule: list[list[float]],
    video_id: str,
    ground_truth: Label,
    predicted: Label,
    catalog: tuple[PrototypeMeta, ...],
) -> Trace:
    """Build a trace exactly matching a per-frame per-prototype score table."""
    frames = tuple(
        FrameRecord(i, tuple(float(s) for s in row)) for i, row in enumerate(schedule)
    )
    trace = Trace(video_id, frames, ground_truth, predicted, tuple(catalog))
    trace.validate()
    return trace
