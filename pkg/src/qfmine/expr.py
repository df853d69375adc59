"""Expression trees for arithmetic and boolean formulas.

Nodes are frozen dataclasses; the optional ``span`` never takes part in
equality so that a re-parsed tree compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .rational import format_rational

__all__ = [
    "SourceSpan",
    "Num",
    "Ref",
    "AttrAgg",
    "Neg",
    "BinOp",
    "Cmp",
    "Has",
    "BoolConst",
    "Not",
    "And",
    "Or",
    "ArithExpr",
    "BoolExpr",
    "render",
    "walk",
    "referenced_names",
    "ARITH_OPS",
    "CMP_OPS",
]

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("<", "<=", "==", "!=", ">=", ">")


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


def _span() -> SourceSpan | None:
    return field(default=None, compare=False, repr=False)  # type: ignore[return-value]


@dataclass(frozen=True)
class Num:
    value: Fraction
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Ref:
    """A bare name: a variable, or a feature used as a 0/1 indicator."""

    name: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class AttrAgg:
    """``attr(Feature)``: sum of ``attr`` over installed leaves below ``Feature``."""

    attr: str
    feature: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Neg:
    operand: "ArithExpr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ArithExpr"
    right: "ArithExpr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "ArithExpr"
    right: "ArithExpr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Has:
    feature: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class BoolConst:
    value: bool
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"
    span: SourceSpan | None = _span()


ArithExpr = Union[Num, Ref, AttrAgg, Neg, BinOp]
BoolExpr = Union[Cmp, Has, BoolConst, Not, And, Or]

# binding strength used to decide where parentheses are needed
_PREC = {Or: 1, And: 2, Not: 3, Cmp: 4, Neg: 7}
_BIN_PREC = {"+": 5, "-": 5, "*": 6, "/": 6}


def _prec(e) -> int:
    if isinstance(e, BinOp):
        return _BIN_PREC[e.op]
    return _PREC.get(type(e), 8)


def _wrap(e, min_prec: int) -> str:
    text = render(e)
    return f"({text})" if _prec(e) < min_prec else text


def render(e) -> str:
    """Canonical text of an expression; re-parses to an equal tree."""
    if isinstance(e, Num):
        return format_rational(e.value)
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, AttrAgg):
        return f"{e.attr}({e.feature})"
    if isinstance(e, Has):
        return f"has({e.feature})"
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, 8)
    if isinstance(e, Not):
        return "!" + _wrap(e.operand, 3)
    if isinstance(e, BinOp):
        p = _BIN_PREC[e.op]
        # left-associative: an equal-precedence right child needs parentheses
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, Cmp):
        return f"{_wrap(e.left, 5)} {e.op} {_wrap(e.right, 5)}"
    if isinstance(e, And):
        return f"{_wrap(e.left, 2)} and {_wrap(e.right, 3)}"
    if isinstance(e, Or):
        return f"{_wrap(e.left, 1)} or {_wrap(e.right, 2)}"
    raise TypeError(f"not an expression: {e!r}")


def walk(e) -> Iterator[object]:
    yield e
    if isinstance(e, (Neg, Not)):
        yield from walk(e.operand)
    elif isinstance(e, (BinOp, Cmp, And, Or)):
        yield from walk(e.left)
        yield from walk(e.right)


def referenced_names(e) -> set[str]:
    """Bare names (``Ref``) occurring in ``e``."""
    return {n.name for n in walk(e) if isinstance(n, Ref)}
