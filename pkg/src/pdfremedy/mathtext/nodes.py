"""AST for the supported LaTeX math subset.

Nodes are plain frozen dataclasses; structural equality is used by the
parse -> print -> parse round-trip tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

MathExpr = Union[
    "Num", "Sym", "GreekLetter", "Neg", "BinOp", "Row", "Frac", "Sup", "Sub",
    "Root", "Group", "Func", "BigOp",
]


@dataclass(frozen=True)
class Num:
    value: str  # literal digits, optionally with a decimal point


@dataclass(frozen=True)
class Sym:
    name: str  # single latin letter, or a named constant like "infty"


@dataclass(frozen=True)
class GreekLetter:
    name: str  # lowercase command name; capitalized name means uppercase letter


@dataclass(frozen=True)
class Neg:
    operand: MathExpr


@dataclass(frozen=True)
class BinOp:
    op: str  # one of: + - times cdot div slash = < > leq geq neq comma
    left: MathExpr
    right: MathExpr


@dataclass(frozen=True)
class Row:
    """Juxtaposed factors (implicit multiplication / adjacency)."""

    items: tuple[MathExpr, ...]


@dataclass(frozen=True)
class Frac:
    num: MathExpr
    den: MathExpr


@dataclass(frozen=True)
class Sup:
    base: MathExpr
    exp: MathExpr


@dataclass(frozen=True)
class Sub:
    base: MathExpr
    sub: MathExpr


@dataclass(frozen=True)
class Root:
    radicand: MathExpr
    index: MathExpr | None = None  # None for a square root


@dataclass(frozen=True)
class Group:
    body: MathExpr
    delim: str  # "paren", "bracket", or "brace" (invisible grouping)


@dataclass(frozen=True)
class Func:
    name: str  # sin, cos, log, ...
    arg: MathExpr


@dataclass(frozen=True)
class BigOp:
    """Sum/product/integral head with optional bounds; scope is what follows."""

    kind: str  # "sum", "prod", "int"
    lower: MathExpr | None = None
    upper: MathExpr | None = None


GREEK_LOWER = (
    "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu nu xi "
    "omicron pi rho sigma tau upsilon phi chi psi omega varepsilon vartheta "
    "varphi varrho varsigma"
).split()

GREEK_UPPER = (
    "Gamma Delta Theta Lambda Xi Pi Sigma Upsilon Phi Psi Omega"
).split()

FUNC_NAMES = (
    "sin cos tan cot sec csc arcsin arccos arctan sinh cosh tanh log ln exp"
).split()
