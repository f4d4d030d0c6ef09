"""Quantitative evaluation of formulas over traces.

The quality value of a formula is an extended real, represented as a plain
float so that +inf / -inf participate exactly in negation, max and min (the
only operations the semantics needs; no arithmetic ever mixes the two
infinities).  The clauses:

    true                      -> +inf
    e1 cmp e2                 -> signed margin (see _atomic_robustness)
    class / membership atoms  -> +inf when the fact holds, else -inf
    time constraint           -> +inf when satisfied, else -inf
    not f                     -> -value(f)
    f or g                    -> max(value(f), value(g))
    f until g  at frame i     -> max over j in [i, T) of
                                   min(value(g at j), min over k in [i, j) of value(f at k))
    freeze x . f  at frame i  -> value(f) with x bound to i
    exists p at x . f         -> max over prototype ids k of value(f) with p bound to k

A trace satisfies a formula when the quality value at frame 0 under the
empty environment is strictly positive; strictly negative refutes it; an
exact zero is reported as INCONCLUSIVE rather than silently picking a side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import formula as F
from .formula import Cmp, Formula
from .trace import Label, Trace

POS_INF = float("inf")
NEG_INF = float("-inf")


class ClassSource(enum.Enum):
    """Which stored label the class atom reads."""

    PREDICTED = "predicted"
    GROUND_TRUTH = "ground-truth"


class Verdict(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    INCONCLUSIVE = "INCONCLUSIVE"


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class Environment:
    """Immutable variable bindings; bind() returns an extended copy."""

    times: tuple[tuple[str, int], ...] = ()
    protos: tuple[tuple[str, int], ...] = ()

    def bind_time(self, name: str, frame: int) -> "Environment":
        return Environment(_update(self.times, name, frame), self.protos)

    def bind_proto(self, name: str, proto_id: int) -> "Environment":
        return Environment(self.times, _update(self.protos, name, proto_id))

    def time(self, name: str) -> int:
        for key, value in self.times:
            if key == name:
                return value
        raise EvaluationError(f"unbound time variable {name!r}")

    def proto(self, name: str) -> int:
        for key, value in self.protos:
            if key == name:
                return value
        raise EvaluationError(f"unbound prototype variable {name!r}")


def _update(bindings: tuple, name: str, value: int) -> tuple:
    for i, (key, _) in enumerate(bindings):
        if key == name:
            return bindings[:i] + ((name, value),) + bindings[i + 1 :]
    return bindings + ((name, value),)


EMPTY_ENV = Environment()


def video_class(trace: Trace, class_source: ClassSource) -> Label:
    return trace.predicted if class_source is ClassSource.PREDICTED else trace.ground_truth


def _score_value(expr: F.ScoreExpr, trace: Trace, env: Environment) -> float:
    if isinstance(expr, F.Sim):
        return trace.score(env.time(expr.time_var), env.proto(expr.proto_var))
    if isinstance(expr, F.Const):
        return expr.value
    if isinstance(expr, F.Abs):
        return abs(_score_value(expr.expr, trace, env))
    if isinstance(expr, F.Sub):
        return _score_value(expr.left, trace, env) - _score_value(expr.right, trace, env)
    raise TypeError(f"not a score expression: {expr!r}")


def _atomic_robustness(left: float, cmp: Cmp, right: float) -> float:
    """Signed margin whose sign matches the comparison's truth, 0 at ties."""
    if cmp in (Cmp.GT, Cmp.GE):
        return left - right
    if cmp in (Cmp.LT, Cmp.LE):
        return right - left
    if cmp is Cmp.EQ:
        return -abs(left - right)
    return abs(left - right)  # NE


def _time_value(term: F.TimeTerm, trace: Trace, env: Environment) -> int:
    if isinstance(term, F.TimeVar):
        return env.time(term.name)
    if isinstance(term, F.IntConst):
        return term.value
    if isinstance(term, F.TraceEnd):
        return trace.length
    if isinstance(term, F.VarPlus):
        return env.time(term.name) + term.offset
    raise TypeError(f"not a time term: {term!r}")


def evaluate(
    formula: Formula,
    trace: Trace,
    frame: int = 0,
    env: Environment = EMPTY_ENV,
    class_source: ClassSource = ClassSource.PREDICTED,
) -> float:
    """Quality value of `formula` over `trace` at `frame` under `env`.

    Sugar nodes are lowered on entry, so derived operators evaluate exactly
    as their core rewrites.  Pure and deterministic: identical inputs give
    bit-identical results.
    """
    if not (0 <= frame < trace.length):
        raise EvaluationError(f"frame {frame} outside [0, {trace.length})")
    core = formula if F.is_core(formula) else F.lower(formula)
    # memo key includes the environment: until windows revisit the same
    # (subformula, frame, bindings) triple many times
    cache: dict = {}

    def ev(node: Formula, i: int, e: Environment) -> float:
        key = (id(node), i, e)
        hit = cache.get(key)
        if hit is not None:
            return hit
        value = _clause(node, i, e)
        cache[key] = value
        return value

    def _clause(node: Formula, i: int, e: Environment) -> float:
        if isinstance(node, F.TrueFormula):
            return POS_INF
        if isinstance(node, F.Predicate):
            return _atomic_robustness(
                _score_value(node.left, trace, e), node.cmp, _score_value(node.right, trace, e)
            )
        if isinstance(node, F.ClassOfVideo):
            return POS_INF if video_class(trace, class_source) is node.label else NEG_INF
        if isinstance(node, F.ProtoInClass):
            proto_id = e.proto(node.proto_var)
            return POS_INF if trace.catalog[proto_id].class_label is node.label else NEG_INF
        if isinstance(node, F.TimeConstraint):
            holds = node.cmp.holds(_time_value(node.left, trace, e), _time_value(node.right, trace, e))
            return POS_INF if holds else NEG_INF
        if isinstance(node, F.Not):
            return -ev(node.child, i, e)
        if isinstance(node, F.Or):
            return max(ev(node.left, i, e), ev(node.right, i, e))
        if isinstance(node, F.Until):
            best = NEG_INF
            prefix = POS_INF  # running min of the left operand over [i, j)
            for j in range(i, trace.length):
                best = max(best, min(ev(node.right, j, e), prefix))
                prefix = min(prefix, ev(node.left, j, e))
                if prefix == NEG_INF:
                    break
            return best
        if isinstance(node, F.Freeze):
            return ev(node.child, i, e.bind_time(node.time_var, i))
        if isinstance(node, F.ExistsProto):
            e.time(node.at_time_var)  # anchor variable must be bound
            return max(
                ev(node.child, i, e.bind_proto(node.proto_var, k))
                for k in range(trace.num_prototypes)
            )
        raise TypeError(f"not a core formula node: {node!r}")

    return ev(core, frame, env)


def verdict_of(robustness: float) -> Verdict:
    if robustness > 0:
        return Verdict.SAT
    if robustness < 0:
        return Verdict.UNSAT
    return Verdict.INCONCLUSIVE


def satisfies(
    formula: Formula,
    trace: Trace,
    class_source: ClassSource = ClassSource.PREDICTED,
) -> Verdict:
    """Satisfaction verdict at frame 0 under the empty environment."""
    return verdict_of(evaluate(formula, trace, 0, EMPTY_ENV, class_source))


def boolean_oracle(
    formula: Formula,
    trace: Trace,
    frame: int = 0,
    env: Environment = EMPTY_ENV,
    class_source: ClassSource = ClassSource.PREDICTED,
) -> bool:
    """Independent boolean semantics by exhaustive enumeration.

    Comparisons are taken literally (so `>=` is true at a tie even though the
    quantitative margin is zero there); on every input whose quality value is
    nonzero this agrees with the sign of evaluate().  Intended for small
    traces: no memoization, quantifiers and until enumerate outright.
    """

    def ev(node: Formula, i: int, e: Environment) -> bool:
        if isinstance(node, F.TrueFormula):
            return True
        if isinstance(node, F.Predicate):
            return node.cmp.holds(
                _score_value(node.left, trace, e), _score_value(node.right, trace, e)
            )
        if isinstance(node, F.ClassOfVideo):
            return video_class(trace, class_source) is node.label
        if isinstance(node, F.ProtoInClass):
            return trace.catalog[e.proto(node.proto_var)].class_label is node.label
        if isinstance(node, F.TimeConstraint):
            return node.cmp.holds(_time_value(node.left, trace, e), _time_value(node.right, trace, e))
        if isinstance(node, F.Not):
            return not ev(node.child, i, e)
        if isinstance(node, F.Or):
            return ev(node.left, i, e) or ev(node.right, i, e)
        if isinstance(node, F.And):
            return ev(node.left, i, e) and ev(node.right, i, e)
        if isinstance(node, F.Implies):
            return (not ev(node.left, i, e)) or ev(node.right, i, e)
        if isinstance(node, F.Until):
            return any(
                ev(node.right, j, e) and all(ev(node.left, k, e) for k in range(i, j))
                for j in range(i, trace.length)
            )
        if isinstance(node, F.Eventually):
            return any(ev(node.child, j, e) for j in range(i, trace.length))
        if isinstance(node, F.Always):
            return all(ev(node.child, j, e) for j in range(i, trace.length))
        if isinstance(node, F.Freeze):
            return ev(node.child, i, e.bind_time(node.time_var, i))
        if isinstance(node, F.ExistsProto):
            e.time(node.at_time_var)
            return any(
                ev(node.child, i, e.bind_proto(node.proto_var, k))
                for k in range(trace.num_prototypes)
            )
        if isinstance(node, F.ForallProto):
            e.time(node.at_time_var)
            return all(
                ev(node.child, i, e.bind_proto(node.proto_var, k))
                for k in range(trace.num_prototypes)
            )
        raise TypeError(f"not a formula node: {node!r}")

    return ev(formula, frame, env)
