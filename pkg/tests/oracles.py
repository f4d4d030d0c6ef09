"""Independent scalar-loop implementations of the numeric operations.

Deliberately written with plain Python floats and explicit loops (no numpy
vectorization) so the package implementations are checked against a separate
computation path.
"""

from __future__ import annotations

import math

from proto_tqtl.trace import Label


def loop_patch_similarity(patch, proto) -> float:
    d2 = 0.0
    for a, b in zip(patch, proto):
        d2 += (float(a) - float(b)) ** 2
    return 1.0 / (1.0 + d2)


def loop_scores(clip, bank) -> list[float]:
    """Max-pooled similarity per prototype, scanning patches row-major."""
    h, w, _ = clip.patches.shape
    out = []
    for j in range(bank.num_prototypes):
        best = None
        for r in range(h):
            for c in range(w):
                s = loop_patch_similarity(clip.patches[r][c], bank.vectors[j])
                if best is None or s > best:
                    best = s
        out.append(best)
    return out


def loop_predict(scores, bank) -> list[float]:
    logits = []
    for k in range(bank.fc_weights.shape[0]):
        acc = 0.0
        for j, s in enumerate(scores):
            acc += float(bank.fc_weights[k][j]) * float(s)
        logits.append(acc)
    top = max(logits)
    exps = [math.exp(l - top) for l in logits]
    z = sum(exps)
    return [e / z for e in exps]


def loop_ce(clips, bank) -> float:
    total = 0.0
    for clip in clips:
        probs = loop_predict(loop_scores(clip, bank), bank)
        total += -math.log(probs[clip.label.index])
    return total / len(clips)


def _loop_min_sqdist(clip, bank, ids) -> float:
    h, w, _ = clip.patches.shape
    best = None
    for j in ids:
        for r in range(h):
            for c in range(w):
                d2 = 0.0
                for a, b in zip(clip.patches[r][c], bank.vectors[j]):
                    d2 += (float(a) - float(b)) ** 2
                if best is None or d2 < best:
                    best = d2
    return best


def loop_clus(clips, bank) -> float:
    total = 0.0
    for clip in clips:
        total += _loop_min_sqdist(clip, bank, bank.class_ids(clip.label))
    return total / len(clips)


def loop_sep(clips, bank) -> float:
    total = 0.0
    for clip in clips:
        total += _loop_min_sqdist(clip, bank, bank.class_ids(clip.label.opposite))
    return -total / len(clips)


def loop_div(bank, s_max) -> float:
    def norm(v):
        return math.sqrt(sum(float(x) ** 2 for x in v))

    total = 0.0
    for label in Label:
        ids = bank.class_ids(label)
        for i in ids:
            for j in ids:
                if i == j:
                    continue
                dot = sum(float(a) * float(b) for a, b in zip(bank.vectors[i], bank.vectors[j]))
                cos = dot / (norm(bank.vectors[i]) * norm(bank.vectors[j]))
                total += max(0.0, cos - s_max)
    return total


def loop_total(clips, bank, cfg) -> float:
    return (
        loop_ce(clips, bank)
        + cfg.lambda_cluster * loop_clus(clips, bank)
        + cfg.lambda_sep * loop_sep(clips, bank)
        + cfg.lambda_div * loop_div(bank, cfg.s_max)
    )
