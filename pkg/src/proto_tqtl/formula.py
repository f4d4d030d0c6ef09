"""Formula trees for the trace-verification logic.

The core grammar has truth, score predicates, class atoms, time constraints,
negation, disjunction, until, a freeze binder for the current frame index,
and an existential quantifier over prototype ids.  And / implies / eventually
/ always / forall are sugar and lower onto the core:

    a and b        ==  not (not a or not b)
    a -> b         ==  not a or b
    eventually a   ==  true until a
    always a       ==  not eventually not a
    forall p ...   ==  not exists p ... not ...

Formulas are immutable value trees; structural equality is definitional.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .trace import Label


class Cmp(enum.Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "=="
    NE = "!="

    def holds(self, left, right) -> bool:
        return _CMP_FUNCS[self](left, right)


_CMP_FUNCS = {
    Cmp.LT: lambda a, b: a < b,
    Cmp.LE: lambda a, b: a <= b,
    Cmp.GT: lambda a, b: a > b,
    Cmp.GE: lambda a, b: a >= b,
    Cmp.EQ: lambda a, b: a == b,
    Cmp.NE: lambda a, b: a != b,
}


# --- score expressions (compared in predicates) ---------------------------


class ScoreExpr:
    pass


@dataclass(frozen=True)
class Sim(ScoreExpr):
    """Similarity score of one prototype at one frozen frame, S(t, p)."""

    time_var: str
    proto_var: str


@dataclass(frozen=True)
class Const(ScoreExpr):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"score constants must be finite, got {self.value!r}")


@dataclass(frozen=True)
class Abs(ScoreExpr):
    expr: ScoreExpr


@dataclass(frozen=True)
class Sub(ScoreExpr):
    left: ScoreExpr
    right: ScoreExpr


# --- time terms (compared in time constraints) ----------------------------


class TimeTerm:
    pass


@dataclass(frozen=True)
class TimeVar(TimeTerm):
    name: str


@dataclass(frozen=True)
class IntConst(TimeTerm):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"time constants must be non-negative, got {self.value}")


@dataclass(frozen=True)
class TraceEnd(TimeTerm):
    """The symbol T: resolves to the trace length at evaluation time."""


@dataclass(frozen=True)
class VarPlus(TimeTerm):
    name: str
    offset: int

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError(f"time offsets must be non-negative, got {self.offset}")


# --- formula nodes ---------------------------------------------------------


class Formula:
    pass


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


TRUE = TrueFormula()


@dataclass(frozen=True)
class Predicate(Formula):
    left: ScoreExpr
    cmp: Cmp
    right: ScoreExpr


@dataclass(frozen=True)
class ClassOfVideo(Formula):
    """Atom: the video's class label equals `label` (frame-independent)."""

    label: Label


@dataclass(frozen=True)
class ProtoInClass(Formula):
    """Atom: the prototype bound to `proto_var` belongs to class `label`."""

    proto_var: str
    label: Label


@dataclass(frozen=True)
class TimeConstraint(Formula):
    left: TimeTerm
    cmp: Cmp
    right: TimeTerm


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Freeze(Formula):
    """Bind the current frame index to `time_var` inside `child`."""

    time_var: str
    child: Formula


@dataclass(frozen=True)
class ExistsProto(Formula):
    """Quantify `proto_var` over the prototype catalog.

    `at_time_var` must be a bound time variable; it records the frame the
    quantifier is anchored to but does not restrict the catalog, whose
    membership is static over the whole trace.
    """

    proto_var: str
    at_time_var: str
    child: Formula


# sugar


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula


@dataclass(frozen=True)
class Always(Formula):
    child: Formula


@dataclass(frozen=True)
class ForallProto(Formula):
    proto_var: str
    at_time_var: str
    child: Formula


CORE_NODES = (
    TrueFormula,
    Predicate,
    ClassOfVideo,
    ProtoInClass,
    TimeConstraint,
    Not,
    Or,
    Until,
    Freeze,
    ExistsProto,
)


def is_core(formula: Formula) -> bool:
    """True when the tree contains no sugar nodes."""
    if not isinstance(formula, CORE_NODES):
        return False
    return all(is_core(c) for c in _children(formula))


def _children(formula: Formula) -> tuple[Formula, ...]:
    if isinstance(formula, (Not, Eventually, Always)):
        return (formula.child,)
    if isinstance(formula, (Or, Until, And, Implies)):
        return (formula.left, formula.right)
    if isinstance(formula, (Freeze, ExistsProto, ForallProto)):
        return (formula.child,)
    return ()


def lower(formula: Formula) -> Formula:
    """Rewrite sugar onto the core grammar.  Total and idempotent."""
    if isinstance(formula, (TrueFormula, Predicate, ClassOfVideo, ProtoInClass, TimeConstraint)):
        return formula
    if isinstance(formula, Not):
        return Not(lower(formula.child))
    if isinstance(formula, Or):
        return Or(lower(formula.left), lower(formula.right))
    if isinstance(formula, Until):
        return Until(lower(formula.left), lower(formula.right))
    if isinstance(formula, Freeze):
        return Freeze(formula.time_var, lower(formula.child))
    if isinstance(formula, ExistsProto):
        return ExistsProto(formula.proto_var, formula.at_time_var, lower(formula.child))
    if isinstance(formula, And):
        return Not(Or(Not(lower(formula.left)), Not(lower(formula.right))))
    if isinstance(formula, Implies):
        return Or(Not(lower(formula.left)), lower(formula.right))
    if isinstance(formula, Eventually):
        return Until(TRUE, lower(formula.child))
    if isinstance(formula, Always):
        return Not(Until(TRUE, Not(lower(formula.child))))
    if isinstance(formula, ForallProto):
        return Not(ExistsProto(formula.proto_var, formula.at_time_var, Not(lower(formula.child))))
    raise TypeError(f"not a formula node: {formula!r}")


# --- scope checking --------------------------------------------------------


@dataclass(frozen=True)
class ScopeError:
    variable: str
    kind: str  # "time" or "prototype"
    path: str

    def __str__(self) -> str:
        return f"unbound {self.kind} variable {self.variable!r} at {self.path}"


def scope_check(formula: Formula) -> list[ScopeError]:
    """Report every unbound time / prototype variable occurrence.

    Binders are lexically scoped; an inner rebinding of the same name
    shadows the outer one and is not an error.
    """
    errors: list[ScopeError] = []

    def check_score(expr: ScoreExpr, time_env: frozenset, proto_env: frozenset, path: str):
        if isinstance(expr, Sim):
            if expr.time_var not in time_env:
                errors.append(ScopeError(expr.time_var, "time", path))
            if expr.proto_var not in proto_env:
                errors.append(ScopeError(expr.proto_var, "prototype", path))
        elif isinstance(expr, Abs):
            check_score(expr.expr, time_env, proto_env, path + "/abs")
        elif isinstance(expr, Sub):
            check_score(expr.left, time_env, proto_env, path + "/sub.left")
            check_score(expr.right, time_env, proto_env, path + "/sub.right")

    def check_time(term: TimeTerm, time_env: frozenset, path: str):
        if isinstance(term, TimeVar) and term.name not in time_env:
            errors.append(ScopeError(term.name, "time", path))
        elif isinstance(term, VarPlus) and term.name not in time_env:
            errors.append(ScopeError(term.name, "time", path))

    def walk(node: Formula, time_env: frozenset, proto_env: frozenset, path: str):
        label = type(node).__name__
        here = f"{path}/{label}" if path else label
        if isinstance(node, Predicate):
            check_score(node.left, time_env, proto_env, here + ".left")
            check_score(node.right, time_env, proto_env, here + ".right")
        elif isinstance(node, TimeConstraint):
            check_time(node.left, time_env, here + ".left")
            check_time(node.right, time_env, here + ".right")
        elif isinstance(node, ProtoInClass):
            if node.proto_var not in proto_env:
                errors.append(ScopeError(node.proto_var, "prototype", here))
        elif isinstance(node, Freeze):
            walk(node.child, time_env | {node.time_var}, proto_env, here + f"({node.time_var})")
        elif isinstance(node, (ExistsProto, ForallProto)):
            if node.at_time_var not in time_env:
                errors.append(ScopeError(node.at_time_var, "time", here))
            walk(
                node.child,
                time_env,
                proto_env | {node.proto_var},
                here + f"({node.proto_var}@{node.at_time_var})",
            )
        elif isinstance(node, (Not, Eventually, Always)):
            walk(node.child, time_env, proto_env, here)
        elif isinstance(node, (Or, Until, And, Implies)):
            walk(node.left, time_env, proto_env, here + ".left")
            walk(node.right, time_env, proto_env, here + ".right")
        # TrueFormula / ClassOfVideo bind and use nothing

    walk(formula, frozenset(), frozenset(), "")
    return errors


# --- pretty printing --------------------------------------------------------

_PREC_UNTIL = 0
_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4
_PREC_ATOM = 5


def _print_score(expr: ScoreExpr, parent_is_sub: bool = False) -> str:
    if isinstance(expr, Sim):
        return f"S({expr.time_var}, {expr.proto_var})"
    if isinstance(expr, Const):
        return repr(expr.value)
    if isinstance(expr, Abs):
        return f"abs({_print_score(expr.expr)})"
    if isinstance(expr, Sub):
        left = _print_score(expr.left)
        right = _print_score(expr.right, parent_is_sub=True)
        text = f"{left} - {right}"
        # subtraction chains are left-associative; a right-nested Sub needs parens
        return f"({text})" if parent_is_sub else text
    raise TypeError(f"not a score expression: {expr!r}")


def _print_time(term: TimeTerm) -> str:
    if isinstance(term, TimeVar):
        return term.name
    if isinstance(term, IntConst):
        return str(term.value)
    if isinstance(term, TraceEnd):
        return "T"
    if isinstance(term, VarPlus):
        return f"{term.name} + {term.offset}"
    raise TypeError(f"not a time term: {term!r}")


def pretty_print(formula: Formula) -> str:
    """Render to the concrete syntax with minimal parentheses."""

    def render(node: Formula, min_prec: int) -> str:
        if isinstance(node, TrueFormula):
            return "true"
        if isinstance(node, Predicate):
            return f"{_print_score(node.left)} {node.cmp.value} {_print_score(node.right)}"
        if isinstance(node, TimeConstraint):
            return f"{_print_time(node.left)} {node.cmp.value} {_print_time(node.right)}"
        if isinstance(node, ClassOfVideo):
            return f"class() == {node.label.value}"
        if isinstance(node, ProtoInClass):
            return f"inclass({node.proto_var}, {node.label.value})"

        if isinstance(node, Not):
            text = f"not {render(node.child, _PREC_UNARY)}"
            prec = _PREC_UNARY
        elif isinstance(node, Eventually):
            text = f"eventually {render(node.child, _PREC_UNARY)}"
            prec = _PREC_UNARY
        elif isinstance(node, Always):
            text = f"always {render(node.child, _PREC_UNARY)}"
            prec = _PREC_UNARY
        elif isinstance(node, Freeze):
            text = f"freeze {node.time_var} . {render(node.child, _PREC_UNARY)}"
            prec = _PREC_UNARY
        elif isinstance(node, ExistsProto):
            text = f"exists {node.proto_var} at {node.at_time_var} . {render(node.child, _PREC_UNARY)}"
            prec = _PREC_UNARY
        elif isinstance(node, ForallProto):
            text = f"forall {node.proto_var} at {node.at_time_var} . {render(node.child, _PREC_UNARY)}"
            prec = _PREC_UNARY
        elif isinstance(node, And):
            text = f"{render(node.left, _PREC_AND)} and {render(node.right, _PREC_AND + 1)}"
            prec = _PREC_AND
        elif isinstance(node, Or):
            text = f"{render(node.left, _PREC_OR)} or {render(node.right, _PREC_OR + 1)}"
            prec = _PREC_OR
        elif isinstance(node, Implies):
            text = f"{render(node.left, _PREC_IMPLIES + 1)} -> {render(node.right, _PREC_IMPLIES)}"
            prec = _PREC_IMPLIES
        elif isinstance(node, Until):
            text = f"{render(node.left, _PREC_UNTIL)} until {render(node.right, _PREC_UNTIL + 1)}"
            prec = _PREC_UNTIL
        else:
            raise TypeError(f"not a formula node: {node!r}")

        return f"({text})" if prec < min_prec else text

    return render(formula, _PREC_UNTIL)
