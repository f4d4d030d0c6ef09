"""Concrete syntax for formulas.

    formula    := until
    until      := implies { "until" implies }          (left-associative, loosest)
    implies    := or [ "->" implies ]                  (right-associative)
    or         := and { "or" and }
    and        := unary { "and" unary }
    unary      := "not" unary | "eventually" unary | "always" unary
                | "freeze" IDENT "." unary
                | "exists" IDENT "at" IDENT "." unary
                | "forall" IDENT "at" IDENT "." unary
                | atom
    atom       := "true" | "(" formula ")"
                | "class" "(" ")" "==" CLASS
                | "inclass" "(" IDENT "," CLASS ")"
                | operand CMP operand
    operand    := scoreexpr | timeterm
    scoreexpr  := scoreterm { "-" scoreterm }
    scoreterm  := "S" "(" IDENT "," IDENT ")" | "abs" "(" scoreexpr ")"
                | NUMBER | "(" scoreexpr ")"
    timeterm   := IDENT [ "+" INT ] | "T" | INT
    CLASS      := "REAL" | "FAKE"
    CMP        := "<" | "<=" | ">" | ">=" | "==" | "!="

Identifiers may end in primes (t').  `#` starts a line comment.  A bare
integer operand is a time constant unless the other side of the comparison
is a similarity expression; numbers with a decimal point or exponent are
always similarity constants.
"""

from __future__ import annotations

import math
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
    Not,
    Or,
    Predicate,
    ProtoInClass,
    ScoreExpr,
    Sim,
    Sub,
    TimeConstraint,
    TimeTerm,
    TimeVar,
    TraceEnd,
    TRUE,
    Until,
    VarPlus,
)
from .trace import Label

KEYWORDS = frozenset(
    """true not and or until eventually always freeze exists forall at in
    class inclass S abs REAL FAKE T""".split()
)

_CMP_LEXEMES = {c.value: c for c in Cmp}
_MULTI_OPS = ("->", "<=", ">=", "==", "!=")
_SINGLE_OPS = "<>+-"
_PUNCT = "(),."
_DIGITS = "0123456789"  # int()/float() must accept every NUMBER lexeme

# each nesting level costs several interpreter stack frames, so the cap must
# stay well under Python's default recursion limit
_MAX_DEPTH = 100


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = expected
        if expected:
            message = f"{message} (expected {' | '.join(expected)})"
        super().__init__(f"{line}:{col}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | number | operator | punctuation | eof
    lexeme: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)

    def error(msg: str):
        raise ParseError(msg, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch in _DIGITS:
            j = i
            while j < n and text[j] in _DIGITS:
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1] in _DIGITS:
                j += 1
                while j < n and text[j] in _DIGITS:
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k] in _DIGITS:
                    j = k
                    while j < n and text[j] in _DIGITS:
                        j += 1
            lexeme = text[i:j]
            tokens.append(Token("number", lexeme, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            while j < n and text[j] == "'":
                j += 1
            lexeme = text[i:j]
            kind = "keyword" if lexeme in KEYWORDS else "identifier"
            tokens.append(Token(kind, lexeme, line, start_col))
            col += j - i
            i = j
            continue
        two = text[i : i + 2]
        if two in _MULTI_OPS:
            tokens.append(Token("operator", two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in _SINGLE_OPS:
            tokens.append(Token("operator", ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch in _PUNCT:
            tokens.append(Token("punctuation", ch, line, start_col))
            i += 1
            col += 1
            continue
        error(f"unexpected character {ch!r}")

    tokens.append(Token("eof", "", line, col))
    return tokens


# operand classification tags used while a comparison is being parsed
_SCORE, _TIME, _INT = "score", "time", "int"


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # -- token helpers --

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, lexeme: str) -> bool:
        tok = self.peek()
        return tok.kind != "eof" and tok.lexeme == lexeme

    def error(self, message: str, tok: Token | None = None, expected: tuple[str, ...] = ()):
        tok = tok or self.peek()
        found = f"found {tok.lexeme!r}" if tok.kind != "eof" else "found end of input"
        raise ParseError(f"{message}, {found}", tok.line, tok.col, expected)

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            self.error("syntax error", expected=(repr(lexeme),))
        return self.advance()

    def expect_identifier(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind != "identifier":
            self.error(f"expected {what}", expected=("identifier",))
        return self.advance()

    # -- grammar --

    def parse_formula(self) -> Formula:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            tok = self.peek()
            raise ParseError("formula nesting too deep", tok.line, tok.col)
        try:
            return self._until()
        finally:
            self.depth -= 1

    def _until(self) -> Formula:
        left = self._implies()
        while self.at("until"):
            self.advance()
            left = Until(left, self._implies())
        return left

    def _implies(self) -> Formula:
        parts = [self._or()]
        while self.at("->"):
            self.advance()
            parts.append(self._or())
        result = parts[-1]
        for left in reversed(parts[:-1]):  # right-associative fold
            result = Implies(left, result)
        return result

    def _or(self) -> Formula:
        left = self._and()
        while self.at("or"):
            self.advance()
            left = Or(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._unary()
        while self.at("and"):
            self.advance()
            left = And(left, self._unary())
        return left

    def _unary(self) -> Formula:
        tok = self.peek()
        if tok.lexeme == "not":
            self.advance()
            return Not(self._unary_nested())
        if tok.lexeme == "eventually":
            self.advance()
            return Eventually(self._unary_nested())
        if tok.lexeme == "always":
            self.advance()
            return Always(self._unary_nested())
        if tok.lexeme == "freeze":
            self.advance()
            name = self.expect_identifier("a time variable to freeze").lexeme
            self.expect(".")
            return Freeze(name, self._unary_nested())
        if tok.lexeme in ("exists", "forall"):
            self.advance()
            proto = self.expect_identifier("a prototype variable").lexeme
            self.expect("at")
            time = self.expect_identifier("a time variable").lexeme
            self.expect(".")
            node = ExistsProto if tok.lexeme == "exists" else ForallProto
            return node(proto, time, self._unary_nested())
        return self._atom()

    def _unary_nested(self) -> Formula:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            tok = self.peek()
            raise ParseError("formula nesting too deep", tok.line, tok.col)
        try:
            return self._unary()
        finally:
            self.depth -= 1

    def _atom(self) -> Formula:
        tok = self.peek()
        if tok.lexeme == "true":
            self.advance()
            return TRUE
        if tok.lexeme == "(":
            self.advance()
            inner = self.parse_formula()
            self.expect(")")
            return inner
        if tok.lexeme == "class":
            self.advance()
            self.expect("(")
            self.expect(")")
            self.expect("==")
            return ClassOfVideo(self._class_literal())
        if tok.lexeme == "inclass":
            self.advance()
            self.expect("(")
            proto = self.expect_identifier("a prototype variable").lexeme
            self.expect(",")
            label = self._class_literal()
            self.expect(")")
            return ProtoInClass(proto, label)
        return self._comparison()

    def _class_literal(self) -> Label:
        tok = self.peek()
        if tok.lexeme not in ("REAL", "FAKE"):
            self.error("expected a class literal", expected=("'REAL'", "'FAKE'"))
        self.advance()
        return Label(tok.lexeme)

    def _comparison(self) -> Formula:
        start = self.peek()
        left = self._operand()
        op_tok = self.peek()
        cmp = _CMP_LEXEMES.get(op_tok.lexeme)
        if op_tok.kind != "operator" or cmp is None:
            self.error("expected a comparison operator", expected=tuple(sorted(_CMP_LEXEMES)))
        self.advance()
        right = self._operand()

        if left[0] == _SCORE or right[0] == _SCORE:
            return Predicate(self._as_score(left, start), cmp, self._as_score(right, op_tok))
        return TimeConstraint(self._as_time(left), cmp, self._as_time(right))

    def _as_score(self, operand, tok: Token) -> ScoreExpr:
        tag, value = operand
        if tag == _SCORE:
            return value
        if tag == _INT:
            return Const(float(value))
        raise ParseError(
            "cannot compare a time term with a similarity expression", tok.line, tok.col
        )

    def _as_time(self, operand) -> TimeTerm:
        tag, value = operand
        if tag == _INT:
            return IntConst(value)
        return value

    def _operand(self):
        tok = self.peek()
        # a leading "(" can only be a grouped similarity expression here: a
        # parenthesized formula is consumed earlier, and time terms never nest
        if tok.lexeme in ("S", "abs", "("):
            return (_SCORE, self._score_expr())
        if tok.kind == "number":
            is_real = "." in tok.lexeme or "e" in tok.lexeme or "E" in tok.lexeme
            if is_real or self.peek(1).lexeme == "-":
                return (_SCORE, self._score_expr())
            self.advance()
            return (_INT, int(tok.lexeme))
        if tok.lexeme == "T":
            self.advance()
            return (_TIME, TraceEnd())
        if tok.kind == "identifier":
            self.advance()
            if self.at("+"):
                self.advance()
                offset = self._integer("a frame offset")
                return (_TIME, VarPlus(tok.lexeme, offset))
            return (_TIME, TimeVar(tok.lexeme))
        self.error(
            "expected a comparison operand",
            expected=("'S('", "'abs('", "number", "time variable", "'T'"),
        )

    def _integer(self, what: str) -> int:
        tok = self.peek()
        if tok.kind != "number" or any(c in tok.lexeme for c in ".eE"):
            self.error(f"expected {what}", expected=("integer",))
        self.advance()
        return int(tok.lexeme)

    def _score_expr(self) -> ScoreExpr:
        expr = self._score_term()
        while self.at("-"):
            self.advance()
            expr = Sub(expr, self._score_term())
        return expr

    def _score_term(self) -> ScoreExpr:
        tok = self.peek()
        if tok.lexeme == "S":
            self.advance()
            self.expect("(")
            time = self.expect_identifier("a time variable").lexeme
            self.expect(",")
            proto = self.expect_identifier("a prototype variable").lexeme
            self.expect(")")
            return Sim(time, proto)
        if tok.lexeme == "abs":
            self.advance()
            self.expect("(")
            inner = self._score_expr()
            self.expect(")")
            return Abs(inner)
        if tok.kind == "number":
            self.advance()
            value = float(tok.lexeme)
            if not math.isfinite(value):
                raise ParseError(f"numeric literal {tok.lexeme!r} overflows", tok.line, tok.col)
            return Const(value)
        if tok.lexeme == "(":
            self.advance()
            self.depth += 1
            if self.depth > _MAX_DEPTH:
                raise ParseError("formula nesting too deep", tok.line, tok.col)
            try:
                inner = self._score_expr()
            finally:
                self.depth -= 1
            self.expect(")")
            return inner
        self.error("expected a similarity term", expected=("'S('", "'abs('", "number", "'('"))


def parse(text: str) -> Formula:
    """Parse one formula; raises ParseError with a line:column span."""
    parser = _Parser(tokenize(text))
    if parser.peek().kind == "eof":
        tok = parser.peek()
        raise ParseError("empty input", tok.line, tok.col)
    result = parser.parse_formula()
    trailing = parser.peek()
    if trailing.kind != "eof":
        parser.error("trailing input after formula", trailing)
    return result


def parse_file(path) -> Formula:
    from pathlib import Path

    return parse(Path(path).read_text(encoding="utf-8"))
