"""Verbose-grade MathSpeak emission from the math AST.

Every construct is wrapped in explicit structural delimiters
(StartFraction/Over/EndFraction, StartRoot/EndRoot, Superscript/Baseline) so
the spoken string maps back to exactly one structure. Colloquial shortcuts
("one-half", "x squared") are deliberately not used. Script depth follows the
nested-script naming scheme: a subscript inside a superscript is announced as
"Super Subscript", the return to an enclosing level re-announces that level,
and the return to the top level is "Baseline".
"""

from __future__ import annotations

from .nodes import (
    BigOp, BinOp, Frac, Func, GreekLetter, Group, MathExpr, Neg, Num, Root,
    Row, Sub, Sup, Sym,
)

_WORD = "word"
_CLOSE = "close"   # closing delimiter; absorbs a pending level-return
_SCRIPT = "script"  # script announcement; absorbs the return of a chained base
_RET = "ret"       # provisional return-to-level announcement

_Token = tuple[str, str]

_OP_WORDS = {
    "+": "plus", "-": "minus", "times": "times", "cdot": "dot",
    "div": "divided-by", "slash": "slash", "=": "equals", "<": "less-than",
    ">": "greater-than", "leq": "less-than-or-equal-to",
    "geq": "greater-than-or-equal-to", "neq": "not-equals", "comma": "comma",
}

_FUNC_WORDS = {
    "sin": "sine", "cos": "cosine", "tan": "tangent", "cot": "cotangent",
    "sec": "secant", "csc": "cosecant", "arcsin": "arcsine",
    "arccos": "arccosine", "arctan": "arctangent",
    "sinh": "hyperbolic sine", "cosh": "hyperbolic cosine",
    "tanh": "hyperbolic tangent", "log": "log", "ln": "natural log",
    "exp": "exp",
}

_BIGOP_WORDS = {"sum": "sigma-summation", "prod": "pi-product", "int": "integral"}


def _script_word(chain: tuple[str, ...]) -> str:
    parts = ["Super" if kind == "sup" else "Sub" for kind in chain[:-1]]
    parts.append("Superscript" if chain[-1] == "sup" else "Subscript")
    return " ".join(parts)


def _return_word(chain: tuple[str, ...]) -> str:
    return "Baseline" if not chain else _script_word(chain)


def _children(expr: MathExpr) -> tuple[MathExpr, ...]:
    if isinstance(expr, Neg):
        return (expr.operand,)
    if isinstance(expr, BinOp):
        return (expr.left, expr.right)
    if isinstance(expr, Row):
        return expr.items
    if isinstance(expr, Frac):
        return (expr.num, expr.den)
    if isinstance(expr, (Sup, Sub)):
        return (expr.base, expr.exp if isinstance(expr, Sup) else expr.sub)
    if isinstance(expr, Root):
        return (expr.radicand,) if expr.index is None else (expr.radicand, expr.index)
    if isinstance(expr, Group):
        return (expr.body,)
    if isinstance(expr, Func):
        return (expr.arg,)
    if isinstance(expr, BigOp):
        return tuple(b for b in (expr.lower, expr.upper) if b is not None)
    return ()


def _nest_height(expr: MathExpr, node_type: type) -> int:
    inner = max((_nest_height(c, node_type) for c in _children(expr)), default=0)
    return inner + 1 if isinstance(expr, node_type) else inner


def _emit(expr: MathExpr, chain: tuple[str, ...]) -> list[_Token]:
    if isinstance(expr, Num):
        return [(_WORD, expr.value)]
    if isinstance(expr, Sym):
        if expr.name == "infty":
            return [(_WORD, "infinity")]
        if len(expr.name) == 1 and expr.name.isupper():
            return [(_WORD, "upper"), (_WORD, expr.name)]
        return [(_WORD, expr.name)]
    if isinstance(expr, GreekLetter):
        name = expr.name[3:] if expr.name.startswith("var") else expr.name
        if name[0].isupper():
            return [(_WORD, "upper"), (_WORD, name)]
        return [(_WORD, name)]
    if isinstance(expr, Neg):
        return [(_WORD, "negative")] + _emit(expr.operand, chain)
    if isinstance(expr, BinOp):
        return (
            _emit(expr.left, chain)
            + [(_WORD, _OP_WORDS[expr.op])]
            + _emit(expr.right, chain)
        )
    if isinstance(expr, Row):
        out: list[_Token] = []
        for item in expr.items:
            out.extend(_emit(item, chain))
        return out
    if isinstance(expr, Frac):
        m = _nest_height(expr, Frac)
        start = "Start" * m + "Fraction"
        over = "Over" * m
        end = "End" * m + "Fraction"
        return (
            [(_WORD, start)]
            + _emit(expr.num, ())
            + [(_CLOSE, over)]
            + _emit(expr.den, ())
            + [(_CLOSE, end)]
        )
    if isinstance(expr, Root):
        m = _nest_height(expr, Root)
        nested = "Nested" * (m - 1)
        out = []
        if expr.index is not None:
            out.append((_WORD, nested + "RootIndex"))
            out.extend(_emit(expr.index, ()))
        out.append((_WORD, nested + "StartRoot"))
        out.extend(_emit(expr.radicand, ()))
        out.append((_CLOSE, nested + "EndRoot"))
        return out
    if isinstance(expr, (Sup, Sub)):
        kind = "sup" if isinstance(expr, Sup) else "sub"
        arg = expr.exp if isinstance(expr, Sup) else expr.sub
        inner_chain = chain + (kind,)
        return (
            _emit(expr.base, chain)
            + [(_SCRIPT, _script_word(inner_chain))]
            + _emit(arg, inner_chain)
            + [(_RET, _return_word(chain))]
        )
    if isinstance(expr, Group):
        if expr.delim == "brace":
            return _emit(expr.body, ())
        left, right = {
            "paren": ("left-parenthesis", "right-parenthesis"),
            "bracket": ("left-bracket", "right-bracket"),
        }[expr.delim]
        return [(_WORD, left)] + _emit(expr.body, ()) + [(_CLOSE, right)]
    if isinstance(expr, Func):
        return [(_WORD, _FUNC_WORDS[expr.name])] + _emit(expr.arg, ())
    if isinstance(expr, BigOp):
        out = [(_WORD, _BIGOP_WORDS[expr.kind])]
        if expr.kind == "int":
            # Integral bounds read as ordinary scripts.
            if expr.lower is not None:
                out.append((_SCRIPT, "Subscript"))
                out.extend(_emit(expr.lower, ("sub",)))
            if expr.upper is not None:
                out.append((_SCRIPT, "Superscript"))
                out.extend(_emit(expr.upper, ("sup",)))
            if expr.lower is not None or expr.upper is not None:
                out.append((_RET, "Baseline"))
            return out
        if expr.lower is not None:
            out.append((_WORD, "Underscript"))
            out.extend(_emit(expr.lower, ()))
        if expr.upper is not None:
            out.append((_WORD, "Overscript"))
            out.extend(_emit(expr.upper, ()))
        if expr.lower is not None or expr.upper is not None:
            out.append((_CLOSE, "Endscripts"))
        return out
    raise TypeError(f"not a MathExpr: {expr!r}")


def to_mathspeak(expr: MathExpr) -> str:
    """Render the AST as one deterministic verbose MathSpeak string."""
    tokens = _emit(expr, ())
    words: list[str] = []
    for i, (kind, text) in enumerate(tokens):
        if kind == _RET:
            # A return announcement only survives before plain content; closing
            # delimiters, chained script announcements, the next return, and
            # the end of the formula all make it redundant.
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            if nxt is None or nxt[0] != _WORD:
                continue
        words.append(text)
    return " ".join(words)
