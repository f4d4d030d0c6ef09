"""The three shipped trace specifications, as parameterized formula builders.

phi1 (key-frame): somewhere in the video there is a frozen frame t and a
prototype p of the video's own class whose score at t beats every
opposite-class prototype's score at every later in-range frame.

phi2 (non-relevance): at every frame, every opposite-class prototype scores
below a ceiling, and within the next `window` frames its score drifts by
less than `drift_bound`.

phi3 (relaxed): phi2 with the windowed drift conjunct removed.

The class atom compares against the video's predicted label by default
(the specifications audit the model's explanation for its own prediction);
`class_source` switches it to ground truth.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .formula import (
    Abs,
    Always,
    And,
    ClassOfVideo,
    Cmp,
    Const,
    Eventually,
    ExistsProto,
    ForallProto,
    Formula,
    Freeze,
    Implies,
    IntConst,
    Predicate,
    ProtoInClass,
    Sim,
    Sub,
    TimeConstraint,
    TimeVar,
    TraceEnd,
    VarPlus,
)
from .semantics import ClassSource, Verdict, evaluate, verdict_of
from .trace import Label, Trace


@dataclass(frozen=True)
class SpecParams:
    target_class: Label = Label.FAKE
    similarity_ceiling: float = 0.4
    drift_bound: float = 0.1
    window: int = 5
    class_source: ClassSource = ClassSource.PREDICTED

    def __post_init__(self):
        if not (0.0 < self.similarity_ceiling <= 1.0):
            raise ValueError("similarity_ceiling must lie in (0, 1]")
        if self.drift_bound <= 0.0:
            raise ValueError("drift_bound must be positive")
        if self.window < 0:
            raise ValueError("window must be >= 0")


def build_phi1(params: SpecParams = SpecParams(), literal: bool = False) -> Formula:
    """Key-frame specification.

    With `literal=True` the inner universal body is the bare conjunction
    "q is opposite-class and dominated", which fails whenever the quantifier
    visits a same-class prototype; the default guards the dominance with an
    implication so only opposite-class prototypes are constrained.
    """
    target = params.target_class
    dominance = Predicate(Sim("t", "p"), Cmp.GT, Sim("t'", "q"))
    opposite = ProtoInClass("q", target.opposite)
    body = And(opposite, dominance) if literal else Implies(opposite, dominance)
    in_range = And(
        TimeConstraint(IntConst(0), Cmp.LT, TimeVar("t'")),
        TimeConstraint(TimeVar("t'"), Cmp.LT, TraceEnd()),
    )
    later_frames = Always(Freeze("t'", Implies(in_range, ForallProto("q", "t'", body))))
    witness = And(ProtoInClass("p", target), later_frames)
    return Eventually(Freeze("t", ExistsProto("p", "t", Implies(ClassOfVideo(target), witness))))


def _phi2_antecedent(params: SpecParams) -> Formula:
    return And(
        ClassOfVideo(params.target_class),
        ProtoInClass("p", params.target_class.opposite),
    )


def _ceiling_clause(params: SpecParams) -> Formula:
    return Predicate(Sim("t", "p"), Cmp.LT, Const(params.similarity_ceiling))


def build_phi2(params: SpecParams = SpecParams()) -> Formula:
    """Non-relevance specification: low ceiling plus a windowed drift bound."""
    window_guard = And(
        TimeConstraint(TimeVar("t"), Cmp.LE, TimeVar("t'")),
        TimeConstraint(TimeVar("t'"), Cmp.LE, VarPlus("t", params.window)),
    )
    drift = Predicate(
        Abs(Sub(Sim("t'", "p"), Sim("t", "p"))), Cmp.LT, Const(params.drift_bound)
    )
    no_drift = Always(Freeze("t'", Implies(window_guard, drift)))
    consequent = And(_ceiling_clause(params), no_drift)
    return Always(Freeze("t", ForallProto("p", "t", Implies(_phi2_antecedent(params), consequent))))


def build_phi3(params: SpecParams = SpecParams()) -> Formula:
    """Relaxed non-relevance: the ceiling alone, no drift constraint."""
    return Always(
        Freeze("t", ForallProto("p", "t", Implies(_phi2_antecedent(params), _ceiling_clause(params))))
    )


BUILDERS = {"phi1": build_phi1, "phi2": build_phi2, "phi3": build_phi3}


# --- satisfaction reporting ---------------------------------------------------


class TraceGroup(enum.Enum):
    POSITIVE = "(+)"  # ground-truth FAKE traces
    NEGATIVE = "(-)"  # ground-truth REAL traces
    ALL = "all"


@dataclass(frozen=True)
class TraceResult:
    video_id: str
    ground_truth: Label
    predicted: Label
    robustness: float
    verdict: Verdict


@dataclass(frozen=True)
class GroupStats:
    total: int
    sat: int
    unsat: int
    inconclusive: int

    @property
    def percent_satisfied(self) -> float | None:
        """Share of satisfying traces; inconclusive ones count only in the base."""
        if self.total == 0:
            return None
        return 100.0 * self.sat / self.total


@dataclass(frozen=True)
class SatisfactionReport:
    results: tuple[TraceResult, ...]
    groups: dict[TraceGroup, GroupStats]


def _stats(results: list[TraceResult]) -> GroupStats:
    sat = sum(r.verdict is Verdict.SAT for r in results)
    unsat = sum(r.verdict is Verdict.UNSAT for r in results)
    inconclusive = sum(r.verdict is Verdict.INCONCLUSIVE for r in results)
    return GroupStats(len(results), sat, unsat, inconclusive)


def report(
    spec: Formula,
    traces: list[Trace],
    class_source: ClassSource = ClassSource.PREDICTED,
    group_by: ClassSource = ClassSource.GROUND_TRUTH,
    jobs: int = 1,
) -> SatisfactionReport:
    """Verdicts per trace plus percentage blocks over (+) / (-) / all traces.

    The (+) / (-) split keys on `group_by` (stored ground truth by default)
    while the formula's class atom reads the label selected by
    `class_source`.  Evaluation order never affects output order.
    """
    if not traces:
        raise ValueError("cannot report over an empty trace set")
    sizes = {t.num_prototypes for t in traces}
    if len(sizes) != 1:
        raise ValueError(f"traces disagree on catalog size: {sorted(sizes)}")

    def run(trace: Trace) -> TraceResult:
        robustness = evaluate(spec, trace, 0, class_source=class_source)
        return TraceResult(
            trace.video_id, trace.ground_truth, trace.predicted, robustness, verdict_of(robustness)
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, traces))
    else:
        results = [run(t) for t in traces]

    def key(result: TraceResult) -> Label:
        return result.ground_truth if group_by is ClassSource.GROUND_TRUTH else result.predicted

    groups = {
        TraceGroup.POSITIVE: _stats([r for r in results if key(r) is Label.FAKE]),
        TraceGroup.NEGATIVE: _stats([r for r in results if key(r) is Label.REAL]),
        TraceGroup.ALL: _stats(results),
    }
    return SatisfactionReport(tuple(results), groups)
