"""Score a clip sequence with a trained bank and emit a verification trace."""

from __future__ import annotations

import numpy as np

from .prototypes import LatentClip, PrototypeBank, predict, prototype_layer
from .trace import FrameRecord, Label, Trace

AGGREGATIONS = ("avg", "sum")


def generate_trace(
    clips: list[LatentClip],
    bank: PrototypeBank,
    video_id: str,
    ground_truth: Label,
    aggregation: str = "avg",
) -> Trace:
    """One frame per clip; frame t's scores are the prototype layer on clips[t].

    The stored prediction pools per-frame score vectors across the whole
    sequence (mean by default, sum as the alternative) before the linear
    head, then takes the most probable class.
    """
    if not clips:
        raise ValueError("need at least one clip to build a trace")
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")

    per_frame = [prototype_layer(clip, bank) for clip in clips]
    pooled = np.mean(per_frame, axis=0) if aggregation == "avg" else np.sum(per_frame, axis=0)
    predicted = Label.REAL if int(np.argmax(predict(pooled, bank))) == 0 else Label.FAKE

    frames = tuple(
        FrameRecord(t, tuple(float(s) for s in scores)) for t, scores in enumerate(per_frame)
    )
    trace = Trace(video_id, frames, ground_truth, predicted, bank.catalog)
    trace.validate()
    return trace
