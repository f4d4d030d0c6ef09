"""Prototype layer, classifier head, losses, gradients, and training.

A latent clip is an H x W grid of C-dimensional patch vectors (the stand-in
for an upstream video encoder, which is out of scope here).  The model keeps
m prototype vectors split evenly between the two classes plus a K x m linear
head.  Per-prototype similarity to a clip is

    score_j = max over patches z of 1 / (1 + ||z - p_j||^2)

which lies in (0, 1] and equals 1 exactly when some patch coincides with the
prototype.  The training objective is a weighted sum of cross-entropy, a
clustering term (mean squared distance from each clip to its nearest
same-class prototype), a separation term (negated mean squared distance to
the nearest wrong-class prototype), and a diversity hinge on pairwise cosine
similarity of same-class prototypes above a threshold.

All argmax / argmin ties break toward the lowest index (prototype id order,
then row-major patch order) so that training and projection are reproducible
and projection is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trace import Label, PrototypeMeta, validate_catalog

K_CLASSES = 2

# Stated-intent separation weight: positive, multiplying a non-positive
# separation loss, so larger wrong-class distances lower the objective.  The
# literal convention flips the sign of the default (see TrainConfig).
DEFAULT_LAMBDA_SEP = 0.2


class TrainingDiverged(Exception):
    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")


@dataclass
class LatentClip:
    """One clip's latent patch grid with its class label."""

    patches: np.ndarray  # (H, W, C) float64
    label: Label

    def __post_init__(self):
        self.patches = np.asarray(self.patches, dtype=np.float64)
        if self.patches.ndim != 3 or min(self.patches.shape) < 1:
            raise ValueError(f"patches must be a non-empty H x W x C grid, got shape {self.patches.shape}")
        if not np.all(np.isfinite(self.patches)):
            raise ValueError("patches must be finite")

    @property
    def patch_matrix(self) -> np.ndarray:
        """Patches flattened row-major to (H*W, C)."""
        h, w, c = self.patches.shape
        return self.patches.reshape(h * w, c)


@dataclass
class PrototypeBank:
    vectors: np.ndarray  # (m, C) float64
    catalog: tuple[PrototypeMeta, ...]
    fc_weights: np.ndarray  # (K, m) float64
    grounding: dict[int, tuple[int, int, int]] | None = None  # id -> (clip, row, col)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self.fc_weights = np.asarray(self.fc_weights, dtype=np.float64)
        validate_catalog(self.catalog)
        m = len(self.catalog)
        if self.vectors.shape[0] != m:
            raise ValueError(f"{self.vectors.shape[0]} vectors for a catalog of {m}")
        if self.fc_weights.shape != (K_CLASSES, m):
            raise ValueError(f"fc_weights must be ({K_CLASSES}, {m}), got {self.fc_weights.shape}")

    @property
    def num_prototypes(self) -> int:
        return len(self.catalog)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def class_ids(self, label: Label) -> list[int]:
        return [p.id for p in self.catalog if p.class_label is label]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrototypeBank):
            return NotImplemented
        return (
            np.array_equal(self.vectors, other.vectors)
            and self.catalog == other.catalog
            and np.array_equal(self.fc_weights, other.fc_weights)
            and self.grounding == other.grounding
        )


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    `lambda_sep` defaults to +0.2 so the separation term rewards distance
    from wrong-class prototypes; set `literal_lambda_signs` to default it to
    -0.2 instead (the sign-flipped composition, kept available for audit).
    An explicitly passed `lambda_sep` always wins.  The diversity sum runs
    over ordered pairs, so each unordered pair is counted twice.
    """

    lambda_cluster: float = 0.2
    lambda_sep: float | None = None
    lambda_div: float = 0.1
    s_max: float = 0.3
    m_k: int = 10
    lr_proto: float = 1e-3
    lr_fc: float = 1e-3
    epochs: int = 200
    projection_period: int = 5
    seed: int = 0
    literal_lambda_signs: bool = False

    def __post_init__(self):
        if self.lambda_sep is None:
            resolved = -DEFAULT_LAMBDA_SEP if self.literal_lambda_signs else DEFAULT_LAMBDA_SEP
            object.__setattr__(self, "lambda_sep", resolved)
        if self.projection_period < 1:
            raise ValueError("projection_period must be >= 1")
        if self.lr_proto <= 0 or self.lr_fc <= 0:
            raise ValueError("learning rates must be positive")
        if self.m_k < 1:
            raise ValueError("m_k must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


# --- forward pass -----------------------------------------------------------


def patch_similarity(patch: np.ndarray, proto: np.ndarray) -> float:
    """Inverted squared distance, 1 / (1 + ||patch - proto||^2)."""
    patch = np.asarray(patch, dtype=np.float64)
    proto = np.asarray(proto, dtype=np.float64)
    if patch.shape != proto.shape:
        raise ValueError(f"dimension mismatch: patch {patch.shape} vs prototype {proto.shape}")
    return 1.0 / (1.0 + float(np.sum((patch - proto) ** 2)))


def _check_dim(clip: LatentClip, bank: PrototypeBank) -> None:
    if clip.patches.shape[2] != bank.dim:
        raise ValueError(
            f"dimension mismatch: clip patches have C={clip.patches.shape[2]}, bank has C={bank.dim}"
        )


def _squared_distances(patches: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """(A, C) x (m, C) -> (A, m) squared euclidean distances."""
    diff = patches[:, None, :] - vectors[None, :, :]
    return np.sum(diff * diff, axis=2)


def prototype_layer(clip: LatentClip, bank: PrototypeBank) -> np.ndarray:
    """Per-prototype similarity scores, each max-pooled over the patch grid."""
    _check_dim(clip, bank)
    sims = 1.0 / (1.0 + _squared_distances(clip.patch_matrix, bank.vectors))
    return sims.max(axis=0)


def forward_scores(clips: list[LatentClip], bank: PrototypeBank) -> np.ndarray:
    return np.stack([prototype_layer(clip, bank) for clip in clips])


def predict(scores: np.ndarray, bank: PrototypeBank) -> np.ndarray:
    """Class probabilities softmax(W @ scores); shift-invariant in the logits."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (bank.num_prototypes,):
        raise ValueError(f"expected {bank.num_prototypes} scores, got shape {scores.shape}")
    logits = bank.fc_weights @ scores
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def accuracy(clips: list[LatentClip], bank: PrototypeBank) -> float:
    hits = sum(
        int(np.argmax(predict(prototype_layer(c, bank), bank)) == c.label.index) for c in clips
    )
    return hits / len(clips)


# --- loss terms --------------------------------------------------------------


def cross_entropy(probs: np.ndarray, labels: list[Label]) -> float:
    """Mean negative log-probability of the true class."""
    true = np.array([lab.index for lab in labels])
    return float(np.mean(-np.log(probs[np.arange(len(labels)), true])))


def loss_ce(clips: list[LatentClip], bank: PrototypeBank) -> float:
    probs = np.stack([predict(s, bank) for s in forward_scores(clips, bank)])
    return cross_entropy(probs, [c.label for c in clips])


def _nearest(clip: LatentClip, bank: PrototypeBank, ids: list[int]):
    """Min squared distance from the clip to prototypes `ids`.

    Returns (distance, prototype id, flat patch index); ties resolve to the
    lowest prototype id, then the lowest row-major patch index.
    """
    sqd = _squared_distances(clip.patch_matrix, bank.vectors[ids])  # (A, J)
    flat = np.argmin(sqd.T)  # J-major scan: prototype id outranks patch index
    j, a = divmod(int(flat), sqd.shape[0])
    return float(sqd[a, j]), ids[j], a


def loss_clus(clips: list[LatentClip], bank: PrototypeBank) -> float:
    """Mean squared distance to the nearest same-class prototype."""
    total = 0.0
    for clip in clips:
        ids = bank.class_ids(clip.label)
        if not ids:
            raise ValueError(f"no prototypes assigned to class {clip.label.value}")
        total += _nearest(clip, bank, ids)[0]
    return total / len(clips)


def loss_sep(clips: list[LatentClip], bank: PrototypeBank) -> float:
    """Negated mean squared distance to the nearest wrong-class prototype."""
    total = 0.0
    for clip in clips:
        ids = bank.class_ids(clip.label.opposite)
        if not ids:
            raise ValueError(f"no prototypes assigned to class {clip.label.opposite.value}")
        total += _nearest(clip, bank, ids)[0]
    return -total / len(clips)


def _cosine(u: np.ndarray, v: np.ndarray, nu: float, nv: float) -> float:
    return float(u @ v) / (nu * nv)


def loss_div(bank: PrototypeBank, s_max: float) -> float:
    """Hinge on same-class prototype cosines above s_max, over ordered pairs."""
    norms = np.linalg.norm(bank.vectors, axis=1)
    if np.any(norms == 0.0):
        zero = int(np.argmin(norms))
        raise ValueError(f"prototype {zero} is the zero vector; cosine undefined")
    total = 0.0
    for label in Label:
        ids = bank.class_ids(label)
        for i in ids:
            for j in ids:
                if i == j:
                    continue
                c = _cosine(bank.vectors[i], bank.vectors[j], norms[i], norms[j])
                total += max(0.0, c - s_max)
    return total


def loss_total(clips: list[LatentClip], bank: PrototypeBank, cfg: TrainConfig) -> float:
    """Weighted sum: CE + lc * cluster + ls * separation + ld * diversity."""
    return (
        loss_ce(clips, bank)
        + cfg.lambda_cluster * loss_clus(clips, bank)
        + cfg.lambda_sep * loss_sep(clips, bank)
        + cfg.lambda_div * loss_div(bank, cfg.s_max)
    )


# --- gradients ----------------------------------------------------------------


def gradients(clips: list[LatentClip], bank: PrototypeBank, cfg: TrainConfig):
    """Analytic gradient of loss_total w.r.t. (prototype vectors, fc weights).

    Max-pooled similarities and nearest-prototype minima contribute through
    the selected (tie-broken) patch only; the diversity hinge contributes
    nothing exactly at its boundary.
    """
    m, dim = bank.vectors.shape
    grad_p = np.zeros((m, dim))
    grad_w = np.zeros_like(bank.fc_weights)
    n = len(clips)

    for clip in clips:
        z = clip.patch_matrix
        sqd = _squared_distances(z, bank.vectors)  # (A, m)
        sims = 1.0 / (1.0 + sqd)
        best = sims.argmax(axis=0)  # first (lowest row-major) maximizer per prototype
        scores = sims[best, np.arange(m)]

        logits = bank.fc_weights @ scores
        shifted = np.exp(logits - logits.max())
        probs = shifted / shifted.sum()
        dlogits = probs.copy()
        dlogits[clip.label.index] -= 1.0
        dlogits /= n

        grad_w += np.outer(dlogits, scores)
        dscores = bank.fc_weights.T @ dlogits
        # d score_j / d p_j = 2 * score_j^2 * (z* - p_j) through the pooled patch
        grad_p += (dscores * 2.0 * scores**2)[:, None] * (z[best] - bank.vectors)

        same = bank.class_ids(clip.label)
        other = bank.class_ids(clip.label.opposite)
        if not same or not other:
            raise ValueError("both classes need at least one prototype")
        _, j_same, a_same = _nearest(clip, bank, same)
        grad_p[j_same] += cfg.lambda_cluster * (2.0 / n) * (bank.vectors[j_same] - z[a_same])
        _, j_other, a_other = _nearest(clip, bank, other)
        grad_p[j_other] += cfg.lambda_sep * (-2.0 / n) * (bank.vectors[j_other] - z[a_other])

    norms = np.linalg.norm(bank.vectors, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero-vector prototype; cosine undefined")
    for label in Label:
        ids = bank.class_ids(label)
        for i in ids:
            for j in ids:
                if i == j:
                    continue
                c = _cosine(bank.vectors[i], bank.vectors[j], norms[i], norms[j])
                if c - cfg.s_max > 0.0:
                    pi, pj = bank.vectors[i], bank.vectors[j]
                    grad_p[i] += cfg.lambda_div * (pj / (norms[i] * norms[j]) - c * pi / norms[i] ** 2)
                    grad_p[j] += cfg.lambda_div * (pi / (norms[i] * norms[j]) - c * pj / norms[j] ** 2)

    return grad_p, grad_w


# --- projection and training ---------------------------------------------------


def _class_patch_pool(clips: list[LatentClip], label: Label):
    """All patches of `label` clips in dataset order, with their coordinates."""
    arrays, coords = [], []
    for clip_index, clip in enumerate(clips):
        if clip.label is not label:
            continue
        h, w, _ = clip.patches.shape
        arrays.append(clip.patch_matrix)
        coords.extend((clip_index, r, col) for r in range(h) for col in range(w))
    if not arrays:
        raise ValueError(f"no training patches for class {label.value}")
    return np.concatenate(arrays, axis=0), coords


def project(bank: PrototypeBank, clips: list[LatentClip]) -> PrototypeBank:
    """Replace every prototype by its nearest same-class training patch.

    The replacement is the stored patch vector itself (bit-exact), the
    grounding map records (clip, row, col), and re-projection is a no-op.
    """
    vectors = bank.vectors.copy()
    grounding: dict[int, tuple[int, int, int]] = {}
    for label in Label:
        ids = bank.class_ids(label)
        if not ids:
            continue
        pool, coords = _class_patch_pool(clips, label)
        for pid in ids:
            sqd = np.sum((pool - bank.vectors[pid]) ** 2, axis=1)
            a = int(np.argmin(sqd))
            vectors[pid] = pool[a]
            grounding[pid] = coords[a]
    return PrototypeBank(vectors, bank.catalog, bank.fc_weights.copy(), grounding)


def make_catalog(m_k: int) -> tuple[PrototypeMeta, ...]:
    """m_k REAL prototypes (ids 0..m_k-1) followed by m_k FAKE ones."""
    reals = [PrototypeMeta(i, Label.REAL) for i in range(m_k)]
    fakes = [PrototypeMeta(m_k + i, Label.FAKE) for i in range(m_k)]
    return tuple(reals + fakes)


def init_bank(clips: list[LatentClip], cfg: TrainConfig, rng: np.random.Generator) -> PrototypeBank:
    """Randomly initialized prototypes with a class-aligned head.

    Head weights start at +1 toward a prototype's own class and -0.5 toward
    the other, so higher same-class similarity raises that class's logit.
    """
    catalog = make_catalog(cfg.m_k)
    dim = clips[0].patches.shape[2]
    vectors = rng.standard_normal((len(catalog), dim))
    fc = np.full((K_CLASSES, len(catalog)), -0.5)
    for meta in catalog:
        fc[meta.class_label.index, meta.id] = 1.0
    return PrototypeBank(vectors, catalog, fc)


@dataclass
class TrainResult:
    bank: PrototypeBank
    initial_loss: float
    final_loss: float
    losses: list[float] = field(repr=False, default_factory=list)


def train(clips: list[LatentClip], cfg: TrainConfig) -> TrainResult:
    """Full-batch gradient descent with periodic prototype projection.

    Deterministic given cfg.seed.  Raises TrainingDiverged if the loss stops
    being finite.
    """
    labels = {clip.label for clip in clips}
    if labels != {Label.REAL, Label.FAKE}:
        raise ValueError("training data must contain both classes")
    rng = np.random.default_rng(cfg.seed)
    bank = init_bank(clips, cfg, rng)

    losses = []
    for epoch in range(cfg.epochs):
        loss = loss_total(clips, bank, cfg)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch, loss)
        losses.append(loss)
        grad_p, grad_w = gradients(clips, bank, cfg)
        bank.vectors = bank.vectors - cfg.lr_proto * grad_p
        bank.fc_weights = bank.fc_weights - cfg.lr_fc * grad_w
        if (epoch + 1) % cfg.projection_period == 0:
            bank = project(bank, clips)

    final = loss_total(clips, bank, cfg)
    if not np.isfinite(final):
        raise TrainingDiverged(cfg.epochs, final)
    losses.append(final)
    return TrainResult(bank, losses[0], final, losses)
