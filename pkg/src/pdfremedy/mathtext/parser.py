"""Recursive-descent parser for the LaTeX math subset, plus the inverse printer.

Grammar (left-associative chains):

    expr     := addsub ((= < > leq geq neq comma) addsub)*
    addsub   := [+|-] mulseq ((+|-) mulseq)*
    mulseq   := factor ((times|cdot|div|/) [-]factor | factor)*
    factor   := primary (^ arg | _ arg)*
    primary  := NUMBER | LETTER | GREEK | \frac{expr}{expr}
              | \sqrt[expr]{expr} | {expr} | (expr) | [expr]
              | \left( expr \right) | FUNC factor | BIGOP bounds

Matrix and alignment environments are outside the subset and rejected with
the macro name and position; so is any macro not listed here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import (
    FUNC_NAMES, GREEK_LOWER, GREEK_UPPER,
    BigOp, BinOp, Frac, Func, GreekLetter, Group, MathExpr, Neg, Num, Root,
    Row, Sub, Sup, Sym,
)


class LatexError(ValueError):
    """Base class for formula parsing failures."""


class LatexSyntaxError(LatexError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnsupportedMacro(LatexError):
    def __init__(self, macro: str, pos: int):
        super().__init__(f"unsupported macro {macro!r} (at position {pos})")
        self.macro = macro
        self.pos = pos


class EmptyFormula(LatexError):
    pass


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER LETTER COMMAND SYMBOL
    value: str
    pos: int


_TOKEN_RE = re.compile(
    r"""\s+
      | (?P<number>\d+(?:\.\d+)?)
      | (?P<command>\\[a-zA-Z]+|\\\\)
      | (?P<letter>[a-zA-Z])
      | (?P<symbol>[+\-*/=<>(){}\[\]^_,.!&|])
    """,
    re.VERBOSE,
)

# Unicode operators accepted on input; printed back as commands.
_UNICODE_MAP = {
    "−": "-", "×": "\\times", "⋅": "\\cdot", "÷": "\\div",
    "≤": "\\leq", "≥": "\\geq", "≠": "\\neq",
}

_RELATIONS = {"=": "=", "<": "<", ">": ">", ",": "comma",
              "\\leq": "leq", "\\le": "leq", "\\geq": "geq", "\\ge": "geq",
              "\\neq": "neq", "\\ne": "neq"}
_MUL_COMMANDS = {"\\times": "times", "\\cdot": "cdot", "\\div": "div"}
_BIGOPS = {"\\sum": "sum", "\\prod": "prod", "\\int": "int"}
_IGNORED = {"\\left", "\\right", "\\,", "\\;", "\\!", "\\quad", "\\qquad",
            "\\displaystyle", "\\limits"}
_CONSTANTS = {"\\infty": "infty"}


def _tokenize(src: str) -> list[_Token]:
    for uni, repl in _UNICODE_MAP.items():
        src = src.replace(uni, repl)
    tokens: list[_Token] = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise LatexSyntaxError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup == "number":
            tokens.append(_Token("NUMBER", m.group(), m.start()))
        elif m.lastgroup == "command":
            if m.group() not in _IGNORED:
                tokens.append(_Token("COMMAND", m.group(), m.start()))
        elif m.lastgroup == "letter":
            tokens.append(_Token("LETTER", m.group(), m.start()))
        elif m.lastgroup == "symbol":
            tokens.append(_Token("SYMBOL", m.group(), m.start()))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], src_len: int):
        self.tokens = tokens
        self.i = 0
        self.src_len = src_len

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise LatexSyntaxError("unexpected end of formula", self.src_len)
        self.i += 1
        return tok

    def expect_symbol(self, sym: str) -> _Token:
        tok = self.next()
        if tok.kind != "SYMBOL" or tok.value != sym:
            raise LatexSyntaxError(f"expected {sym!r}, found {tok.value!r}", tok.pos)
        return tok

    # -- grammar ------------------------------------------------------------

    def parse(self) -> MathExpr:
        expr = self.expr()
        tok = self.peek()
        if tok is not None:
            raise LatexSyntaxError(f"unexpected {tok.value!r}", tok.pos)
        return expr

    def expr(self, stop: frozenset[str] = frozenset()) -> MathExpr:
        left = self.addsub(stop)
        while True:
            tok = self.peek()
            if tok is None:
                return left
            key = tok.value
            if key in stop:
                return left
            if (tok.kind == "SYMBOL" and key in _RELATIONS) or (
                tok.kind == "COMMAND" and key in _RELATIONS
            ):
                self.next()
                left = BinOp(_RELATIONS[key], left, self.addsub(stop))
            else:
                return left

    def addsub(self, stop: frozenset[str]) -> MathExpr:
        tok = self.peek()
        if tok is not None and tok.kind == "SYMBOL" and tok.value in "+-":
            self.next()
            operand = self.mulseq(stop)
            left = Neg(operand) if tok.value == "-" else operand
        else:
            left = self.mulseq(stop)
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "SYMBOL" or tok.value not in "+-":
                return left
            if tok.value in stop:
                return left
            self.next()
            op = "+" if tok.value == "+" else "-"
            left = BinOp(op, left, self.mulseq(stop))

    def mulseq(self, stop: frozenset[str]) -> MathExpr:
        items = [self.factor(stop)]
        result: MathExpr = items[0]
        while True:
            tok = self.peek()
            if tok is None or tok.value in stop:
                break
            if tok.kind == "COMMAND" and tok.value in _MUL_COMMANDS:
                self.next()
                result = BinOp(_MUL_COMMANDS[tok.value], self._flush(items), self.signed_factor(stop))
                items = [result]
            elif tok.kind == "SYMBOL" and tok.value == "/":
                self.next()
                result = BinOp("slash", self._flush(items), self.signed_factor(stop))
                items = [result]
            elif self._starts_factor(tok):
                items.append(self.factor(stop))
            else:
                break
        return self._flush(items)

    @staticmethod
    def _flush(items: list[MathExpr]) -> MathExpr:
        return items[0] if len(items) == 1 else Row(tuple(items))

    def signed_factor(self, stop: frozenset[str]) -> MathExpr:
        tok = self.peek()
        if tok is not None and tok.kind == "SYMBOL" and tok.value == "-":
            self.next()
            return Neg(self.factor(stop))
        return self.factor(stop)

    @staticmethod
    def _starts_factor(tok: _Token) -> bool:
        if tok.kind in ("NUMBER", "LETTER"):
            return True
        if tok.kind == "SYMBOL":
            return tok.value in "({["
        if tok.kind == "COMMAND":
            name = tok.value[1:]
            return (
                tok.value in ("\\frac", "\\sqrt") or tok.value in _BIGOPS
                or tok.value in _CONSTANTS
                or name in GREEK_LOWER or name in GREEK_UPPER or name in FUNC_NAMES
            )
        return False

    def factor(self, stop: frozenset[str]) -> MathExpr:
        base = self.primary(stop)
        sub: MathExpr | None = None
        sup: MathExpr | None = None
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "SYMBOL" or tok.value not in "^_":
                break
            self.next()
            arg = self.script_arg()
            if tok.value == "^":
                if sup is not None:
                    raise LatexSyntaxError("double superscript", tok.pos)
                sup = arg
            else:
                if sub is not None:
                    raise LatexSyntaxError("double subscript", tok.pos)
                sub = arg
        # Canonical order: subscript binds before superscript (x_1^2).
        if sub is not None:
            base = Sub(base, sub)
        if sup is not None:
            base = Sup(base, sup)
        return base

    def script_arg(self) -> MathExpr:
        tok = self.peek()
        if tok is not None and tok.kind == "SYMBOL" and tok.value == "{":
            self.next()
            inner = self.expr(stop=frozenset("}"))
            self.expect_symbol("}")
            return inner
        # single-token script like x^2 or x_i
        tok = self.next()
        if tok.kind == "NUMBER":
            return Num(tok.value)
        if tok.kind == "LETTER":
            return Sym(tok.value)
        if tok.kind == "COMMAND":
            return self._command_atom(tok)
        raise LatexSyntaxError(f"invalid script argument {tok.value!r}", tok.pos)

    def braced(self) -> MathExpr:
        self.expect_symbol("{")
        inner = self.expr(stop=frozenset("}"))
        self.expect_symbol("}")
        return inner

    def primary(self, stop: frozenset[str]) -> MathExpr:
        tok = self.next()
        if tok.kind == "NUMBER":
            return Num(tok.value)
        if tok.kind == "LETTER":
            return Sym(tok.value)
        if tok.kind == "SYMBOL":
            if tok.value == "{":
                inner = self.expr(stop=frozenset("}"))
                self.expect_symbol("}")
                return Group(inner, "brace")
            if tok.value == "(":
                inner = self.expr(stop=frozenset(")"))
                self.expect_symbol(")")
                return Group(inner, "paren")
            if tok.value == "[":
                inner = self.expr(stop=frozenset("]"))
                self.expect_symbol("]")
                return Group(inner, "bracket")
            raise LatexSyntaxError(f"unexpected {tok.value!r}", tok.pos)
        return self._command_primary(tok, stop)

    def _command_atom(self, tok: _Token) -> MathExpr:
        """Commands valid as a bare script argument (x^\alpha)."""
        name = tok.value[1:]
        if tok.value in _CONSTANTS:
            return Sym(_CONSTANTS[tok.value])
        if name in GREEK_LOWER or name in GREEK_UPPER:
            return GreekLetter(name)
        raise UnsupportedMacro(tok.value, tok.pos)

    def _command_primary(self, tok: _Token, stop: frozenset[str]) -> MathExpr:
        name = tok.value[1:]
        if tok.value == "\\frac":
            return Frac(self.braced(), self.braced())
        if tok.value == "\\sqrt":
            index: MathExpr | None = None
            nxt = self.peek()
            if nxt is not None and nxt.kind == "SYMBOL" and nxt.value == "[":
                self.next()
                index = self.expr(stop=frozenset("]"))
                self.expect_symbol("]")
            return Root(self.braced(), index)
        if tok.value in _BIGOPS:
            lower = upper = None
            while True:
                nxt = self.peek()
                if nxt is None or nxt.kind != "SYMBOL" or nxt.value not in "^_":
                    break
                self.next()
                arg = self.script_arg()
                if nxt.value == "_":
                    if lower is not None:
                        raise LatexSyntaxError("double lower bound", nxt.pos)
                    lower = arg
                else:
                    if upper is not None:
                        raise LatexSyntaxError("double upper bound", nxt.pos)
                    upper = arg
            return BigOp(_BIGOPS[tok.value], lower, upper)
        if name in FUNC_NAMES:
            nxt = self.peek()
            if nxt is not None and nxt.kind == "SYMBOL" and nxt.value in "^_":
                raise LatexSyntaxError(f"script on function name \\{name}", nxt.pos)
            return Func(name, self.factor(stop))
        if tok.value in _CONSTANTS or name in GREEK_LOWER or name in GREEK_UPPER:
            return self._command_atom(tok)
        # \begin{...} (matrices, alignment) and anything else unknown
        raise UnsupportedMacro(tok.value, tok.pos)


def parse_latex(src: str) -> MathExpr:
    """Parse a LaTeX formula into the subset AST.

    Raises LatexSyntaxError for malformed input (unbalanced braces, stray
    operators), UnsupportedMacro for anything outside the subset, and
    EmptyFormula for blank input.
    """
    if not src or not src.strip():
        raise EmptyFormula("formula source is empty")
    tokens = _tokenize(src)
    if not tokens:
        raise EmptyFormula("formula source is empty")
    return _Parser(tokens, len(src)).parse()


# -- printing back to LaTeX ---------------------------------------------------

_OP_TO_LATEX = {
    "+": "+", "-": "-", "times": "\\times", "cdot": "\\cdot", "div": "\\div",
    "slash": "/", "=": "=", "<": "<", ">": ">", "leq": "\\leq", "geq": "\\geq",
    "neq": "\\neq", "comma": ",",
}

_ATOMIC = (Num, Sym, GreekLetter, Frac, Root, Group, Sup, Sub, Func)


def to_latex(expr: MathExpr) -> str:
    """Print an AST back to LaTeX; parse(to_latex(ast)) == ast for parsed ASTs."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Sym):
        return "\\infty" if expr.name == "infty" else expr.name
    if isinstance(expr, GreekLetter):
        return "\\" + expr.name
    if isinstance(expr, Neg):
        return "-" + to_latex(expr.operand)
    if isinstance(expr, BinOp):
        op = _OP_TO_LATEX[expr.op]
        spaced = op if op == "," else f" {op} "
        return to_latex(expr.left) + spaced + to_latex(expr.right)
    if isinstance(expr, Row):
        return " ".join(to_latex(item) for item in expr.items)
    if isinstance(expr, Frac):
        return "\\frac{%s}{%s}" % (to_latex(expr.num), to_latex(expr.den))
    if isinstance(expr, Sup):
        return "%s^{%s}" % (_script_base(expr.base), to_latex(expr.exp))
    if isinstance(expr, Sub):
        return "%s_{%s}" % (_script_base(expr.base), to_latex(expr.sub))
    if isinstance(expr, Root):
        if expr.index is None:
            return "\\sqrt{%s}" % to_latex(expr.radicand)
        return "\\sqrt[%s]{%s}" % (to_latex(expr.index), to_latex(expr.radicand))
    if isinstance(expr, Group):
        body = to_latex(expr.body)
        return {"paren": "(%s)", "bracket": "[%s]", "brace": "{%s}"}[expr.delim] % body
    if isinstance(expr, Func):
        return "\\%s %s" % (expr.name, to_latex(expr.arg))
    if isinstance(expr, BigOp):
        head = {"sum": "\\sum", "prod": "\\prod", "int": "\\int"}[expr.kind]
        if expr.lower is not None:
            head += "_{%s}" % to_latex(expr.lower)
        if expr.upper is not None:
            head += "^{%s}" % to_latex(expr.upper)
        return head
    raise TypeError(f"not a MathExpr: {expr!r}")


def _script_base(base: MathExpr) -> str:
    # Only atoms can carry a script without braces and reparse identically.
    text = to_latex(base)
    if isinstance(base, _ATOMIC):
        return text
    return "{%s}" % text
