"""Alternative-text tooling: figure alt-text budgeting and formula speech.

Figures get free-text alternative descriptions with a 50-word countdown;
formulas get deterministic MathSpeak strings generated from a LaTeX subset.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import MathExpr
from .parser import (
    EmptyFormula, LatexError, LatexSyntaxError, UnsupportedMacro,
    parse_latex, to_latex,
)
from .speech import to_mathspeak

__all__ = [
    "AltText", "WordBudget", "word_budget", "parse_latex", "to_latex",
    "to_mathspeak", "formula_alt_text", "MathExpr", "LatexError",
    "LatexSyntaxError", "UnsupportedMacro", "EmptyFormula",
]

ALT_WORD_LIMIT = 50


@dataclass
class AltText:
    region_id: str
    text: str = ""
    decorative: bool = False


@dataclass(frozen=True)
class WordBudget:
    limit: int
    remaining: int  # negative once the text runs over

    @property
    def over_limit(self) -> bool:
        return self.remaining < 0


def word_budget(text: str, limit: int = ALT_WORD_LIMIT) -> WordBudget:
    """Countdown from `limit`; a word is any maximal run of non-whitespace."""
    return WordBudget(limit=limit, remaining=limit - len(text.split()))


def formula_alt_text(latex: str) -> str:
    """LaTeX in, MathSpeak out. Parse errors propagate; no partial speech."""
    return to_mathspeak(parse_latex(latex))
