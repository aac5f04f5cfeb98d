"""Content-stream interpretation into positioned operators.

Produces one ContentOp per text-showing operator (Tj, TJ, ', "), per image
placement (Do / inline image), and per painted path. Text bboxes are glyph
advance boxes at the text matrix; path bboxes cover the path points after the
CTM. Marked-content nesting is tracked so ops pick up their MCID and artifact
wrapping. Unknown operators are skipped, not fatal.
"""

from __future__ import annotations

import re

from ..geometry import Rect
from ..model import ContentOp, OpKind
from .fonts import style_flags, text_width, vertical_extent
from .objects import Lexer, MalformedPdf, Name, ObjectParser, StreamObj

Matrix = tuple[float, float, float, float, float, float]

IDENTITY: Matrix = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def mat_mul(m1: Matrix, m2: Matrix) -> Matrix:
    a1, b1, c1, d1, e1, f1 = m1
    a2, b2, c2, d2, e2, f2 = m2
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
        e1 * a2 + f1 * c2 + e2,
        e1 * b2 + f1 * d2 + f2,
    )


def translation(tx: float, ty: float) -> Matrix:
    return (1.0, 0.0, 0.0, 1.0, tx, ty)


def apply_matrix(m: Matrix, x: float, y: float) -> tuple[float, float]:
    a, b, c, d, e, f = m
    return a * x + c * y + e, b * x + d * y + f


def _corner_bbox(m: Matrix, x0: float, y0: float, x1: float, y1: float) -> Rect:
    points = [apply_matrix(m, x, y) for x in (x0, x1) for y in (y0, y1)]
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return Rect(min(xs), min(ys), max(xs), max(ys))


class _GState:
    __slots__ = ("ctm", "font", "size", "char_sp", "word_sp", "hscale", "leading", "rise")

    def __init__(self, ctm: Matrix):
        self.ctm = ctm
        self.font = "Helvetica"
        self.size = 0.0
        self.char_sp = 0.0
        self.word_sp = 0.0
        self.hscale = 1.0
        self.leading = 0.0
        self.rise = 0.0

    def copy(self) -> "_GState":
        dup = _GState(self.ctm)
        for slot in self.__slots__[1:]:
            setattr(dup, slot, getattr(self, slot))
        return dup


class _Interpreter:
    def __init__(self, resolve, origin: tuple[float, float]):
        self.resolve = resolve
        self.ops: list[ContentOp] = []
        # Shift so page coordinates start at the MediaBox origin.
        self.base_ctm: Matrix = translation(-origin[0], -origin[1])
        self.gs = _GState(self.base_ctm)
        self.gs_stack: list[_GState] = []
        self.tm: Matrix = IDENTITY
        self.tlm: Matrix = IDENTITY
        self.mc_stack: list[tuple[str, int | None]] = []
        self.path_points: list[tuple[float, float]] = []

    # -- marked content ---------------------------------------------------------

    @property
    def current_mcid(self) -> int | None:
        for _, mcid in reversed(self.mc_stack):
            if mcid is not None:
                return mcid
        return None

    @property
    def in_artifact(self) -> bool:
        return any(tag == "Artifact" for tag, _ in self.mc_stack)

    def _emit(self, kind: OpKind, bbox: Rect, **extra) -> None:
        self.ops.append(
            ContentOp(
                id=(-1, -1),
                kind=kind,
                bbox=bbox,
                mcid=self.current_mcid,
                artifact=self.in_artifact,
                **extra,
            )
        )

    # -- text -------------------------------------------------------------------

    def show_text(self, items: list) -> None:
        text_parts: list[str] = []
        advance = 0.0
        min_x = 0.0
        max_x = 0.0
        fs = self.gs.size
        for item in items:
            if isinstance(item, (int, float)):
                advance -= item / 1000.0 * fs * self.gs.hscale
            elif isinstance(item, bytes):
                decoded = item.decode("latin-1", errors="replace")
                text_parts.append(decoded)
                width = text_width(decoded, self.gs.font, fs)
                width += self.gs.char_sp * len(decoded)
                width += self.gs.word_sp * decoded.count(" ")
                advance += width * self.gs.hscale
            min_x = min(min_x, advance)
            max_x = max(max_x, advance)
        text = "".join(text_parts)
        if text:
            descent, ascent = vertical_extent(self.gs.font, fs)
            trm = mat_mul(self.tm, self.gs.ctm)
            bbox = _corner_bbox(
                trm, min_x, descent + self.gs.rise, max_x, ascent + self.gs.rise
            )
            bold, italic = style_flags(self.gs.font)
            self._emit(
                OpKind.TEXT, bbox,
                text=text, font_size=fs, font_name=self.gs.font,
                bold=bold, italic=italic,
            )
        self.tm = mat_mul(translation(advance, 0.0), self.tm)

    def next_line(self, tx: float, ty: float) -> None:
        self.tlm = mat_mul(translation(tx, ty), self.tlm)
        self.tm = self.tlm

    # -- paths --------------------------------------------------------------------

    def paint_path(self) -> None:
        if self.path_points:
            pts = [apply_matrix(self.gs.ctm, x, y) for x, y in self.path_points]
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            self._emit(OpKind.PATH, Rect(min(xs), min(ys), max(xs), max(ys)))
        self.path_points = []

    # -- xobjects -------------------------------------------------------------------

    def do_xobject(self, name: str, resources: dict) -> None:
        xobjects = self.resolve((resources or {}).get("XObject")) or {}
        xobj = self.resolve(xobjects.get(str(name)))
        if not isinstance(xobj, StreamObj):
            return
        subtype = self.resolve(xobj.info.get("Subtype"))
        if subtype == "Image":
            self._emit(OpKind.IMAGE, _corner_bbox(self.gs.ctm, 0.0, 0.0, 1.0, 1.0))
        elif subtype == "Form":
            from .objects import decode_stream

            matrix = self.resolve(xobj.info.get("Matrix")) or [1, 0, 0, 1, 0, 0]
            saved = self.gs.copy()
            saved_stack = list(self.gs_stack)
            self.gs.ctm = mat_mul(tuple(float(v) for v in matrix), self.gs.ctm)
            form_res = self.resolve(xobj.info.get("Resources")) or resources
            try:
                run_stream(self, decode_stream(xobj, self.resolve), form_res)
            finally:
                self.gs = saved
                self.gs_stack = saved_stack


def _operands(stack: list, count: int) -> list | None:
    if len(stack) < count:
        stack.clear()
        return None
    taken = stack[-count:]
    del stack[-count:]
    return taken


def run_stream(interp: _Interpreter, data: bytes, resources: dict) -> None:
    lexer = Lexer(data, 0)
    stack: list = []
    properties = interp.resolve((resources or {}).get("Properties")) or {}

    while True:
        lexer.skip_ws()
        if lexer.pos >= len(data):
            break
        b = data[lexer.pos]
        if b in b"(</[" or (b in b"+-." or 0x30 <= b <= 0x39):
            parser = ObjectParser(data, lexer.pos, interp.resolve)
            try:
                stack.append(parser.parse())
            except MalformedPdf:
                lexer.pos += 1
                continue
            lexer.pos = parser.pos
            continue
        if b in b")>]}":
            lexer.pos += 1
            continue
        op = lexer.read_keyword()
        if not op:
            lexer.pos += 1
            continue
        _dispatch(interp, op, stack, resources, properties, lexer)
    # implicit end: unpainted path and open marked content are dropped


def _dispatch(interp, op: bytes, stack: list, resources, properties, lexer: Lexer) -> None:
    gs = interp.gs
    if op == b"q":
        interp.gs_stack.append(gs.copy())
    elif op == b"Q":
        if interp.gs_stack:
            interp.gs = interp.gs_stack.pop()
    elif op == b"cm":
        args = _operands(stack, 6)
        if args:
            gs.ctm = mat_mul(tuple(float(v) for v in args), gs.ctm)
    elif op == b"BT":
        interp.tm = interp.tlm = IDENTITY
    elif op == b"ET":
        pass
    elif op == b"Tf":
        args = _operands(stack, 2)
        if args:
            font_name, size = args
            gs.size = float(size)
            gs.font = _font_base_name(interp, resources, str(font_name))
    elif op == b"Td":
        args = _operands(stack, 2)
        if args:
            interp.next_line(float(args[0]), float(args[1]))
    elif op == b"TD":
        args = _operands(stack, 2)
        if args:
            gs.leading = -float(args[1])
            interp.next_line(float(args[0]), float(args[1]))
    elif op == b"Tm":
        args = _operands(stack, 6)
        if args:
            interp.tm = interp.tlm = tuple(float(v) for v in args)
    elif op == b"T*":
        interp.next_line(0.0, -gs.leading)
    elif op == b"TL":
        args = _operands(stack, 1)
        if args:
            gs.leading = float(args[0])
    elif op == b"Tc":
        args = _operands(stack, 1)
        if args:
            gs.char_sp = float(args[0])
    elif op == b"Tw":
        args = _operands(stack, 1)
        if args:
            gs.word_sp = float(args[0])
    elif op == b"Tz":
        args = _operands(stack, 1)
        if args:
            gs.hscale = float(args[0]) / 100.0
    elif op == b"Ts":
        args = _operands(stack, 1)
        if args:
            gs.rise = float(args[0])
    elif op == b"Tj":
        args = _operands(stack, 1)
        if args and isinstance(args[0], bytes):
            interp.show_text([args[0]])
    elif op == b"TJ":
        args = _operands(stack, 1)
        if args and isinstance(args[0], list):
            interp.show_text(args[0])
    elif op == b"'":
        args = _operands(stack, 1)
        if args and isinstance(args[0], bytes):
            interp.next_line(0.0, -gs.leading)
            interp.show_text([args[0]])
    elif op == b'"':
        args = _operands(stack, 3)
        if args and isinstance(args[2], bytes):
            gs.word_sp = float(args[0])
            gs.char_sp = float(args[1])
            interp.next_line(0.0, -gs.leading)
            interp.show_text([args[2]])
    elif op == b"m" or op == b"l":
        args = _operands(stack, 2)
        if args:
            interp.path_points.append((float(args[0]), float(args[1])))
    elif op == b"c":
        args = _operands(stack, 6)
        if args:
            interp.path_points.extend(
                [(float(args[0]), float(args[1])), (float(args[2]), float(args[3])),
                 (float(args[4]), float(args[5]))]
            )
    elif op == b"v" or op == b"y":
        args = _operands(stack, 4)
        if args:
            interp.path_points.extend(
                [(float(args[0]), float(args[1])), (float(args[2]), float(args[3]))]
            )
    elif op == b"re":
        args = _operands(stack, 4)
        if args:
            x, y, w, h = (float(v) for v in args)
            interp.path_points.extend([(x, y), (x + w, y + h)])
    elif op == b"h":
        pass
    elif op in (b"S", b"s", b"f", b"F", b"f*", b"B", b"B*", b"b", b"b*"):
        interp.paint_path()
    elif op == b"n":
        interp.path_points = []
    elif op in (b"W", b"W*"):
        pass  # clipping is ignored for bbox purposes
    elif op == b"Do":
        args = _operands(stack, 1)
        if args:
            interp.do_xobject(str(args[0]), resources)
    elif op == b"BMC":
        args = _operands(stack, 1)
        if args:
            interp.mc_stack.append((str(args[0]), None))
    elif op == b"BDC":
        args = _operands(stack, 2)
        if args:
            tag, props = args
            if isinstance(props, Name):
                props = interp.resolve(properties.get(str(props))) or {}
            mcid = props.get("MCID") if isinstance(props, dict) else None
            interp.mc_stack.append((str(tag), mcid if isinstance(mcid, int) else None))
    elif op == b"EMC":
        if interp.mc_stack:
            interp.mc_stack.pop()
    elif op == b"BI":
        _inline_image(interp, lexer)
    else:
        stack.clear()  # unknown operator: drop its operands


def _inline_image(interp: _Interpreter, lexer: Lexer) -> None:
    # Skip the key/value header up to ID, then raw data up to EI.
    data = lexer.data
    m = re.search(rb"\bID\b", data[lexer.pos :])
    if not m:
        lexer.pos = len(data)
        return
    pos = lexer.pos + m.end() + 1
    end = re.search(rb"(?:^|[\s>])EI(?=[\s/\[(<]|$)", data[pos:], re.S)
    lexer.pos = pos + end.end() if end else len(data)
    interp._emit(OpKind.IMAGE, _corner_bbox(interp.gs.ctm, 0.0, 0.0, 1.0, 1.0))


def _font_base_name(interp: _Interpreter, resources, res_name: str) -> str:
    fonts = interp.resolve((resources or {}).get("Font")) or {}
    font = interp.resolve(fonts.get(res_name))
    if isinstance(font, dict):
        base = interp.resolve(font.get("BaseFont"))
        if base is not None:
            return str(base)
    return res_name


def interpret_content(
    data: bytes, resources: dict, resolve, origin: tuple[float, float] = (0.0, 0.0)
) -> list[ContentOp]:
    """Run a page content stream and return its ops in stream order."""
    interp = _Interpreter(resolve, origin)
    run_stream(interp, data, resources)
    return interp.ops
