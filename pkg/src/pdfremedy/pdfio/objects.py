"""Low-level PDF object syntax: lexer, object parser, and stream filters.

Objects map onto Python natives — dicts keyed by name text, lists, ints,
floats, bools, None — with two wrappers: :class:`Name` for name objects and
:class:`Ref` for indirect references. Strings stay as ``bytes``.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass


class MalformedPdf(ValueError):
    """Unparseable PDF; carries the byte offset (and page when known)."""

    def __init__(self, message: str, offset: int | None = None, page: int | None = None):
        context = []
        if offset is not None:
            context.append(f"offset {offset}")
        if page is not None:
            context.append(f"page {page}")
        suffix = f" ({', '.join(context)})" if context else ""
        super().__init__(message + suffix)
        self.offset = offset
        self.page = page


class Name(str):
    """A PDF name object, stored without the leading slash."""

    __slots__ = ()


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int


@dataclass
class StreamObj:
    info: dict
    raw: bytes  # encoded payload as stored in the file


_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMITERS = b"()<>[]{}/%"
_NUMBER_RE = re.compile(rb"[+-]?(\d+\.?\d*|\.\d+)")


def is_regular(byte: int) -> bool:
    return byte not in _WHITESPACE and byte not in _DELIMITERS


class Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos]
            if b in _WHITESPACE:
                self.pos += 1
            elif b == 0x25:  # % comment
                end = data.find(b"\n", self.pos)
                self.pos = n if end < 0 else end + 1
            else:
                return

    def peek_bytes(self, count: int) -> bytes:
        return self.data[self.pos : self.pos + count]

    def read_keyword(self) -> bytes:
        start = self.pos
        while self.pos < len(self.data) and is_regular(self.data[self.pos]):
            self.pos += 1
        return self.data[start : self.pos]

    def read_name(self) -> Name:
        self.pos += 1  # slash
        out = bytearray()
        data = self.data
        while self.pos < len(data) and is_regular(data[self.pos]):
            b = data[self.pos]
            if b == 0x23 and self.pos + 2 < len(data):  # #xx hex escape
                try:
                    out.append(int(data[self.pos + 1 : self.pos + 3], 16))
                    self.pos += 3
                    continue
                except ValueError:
                    pass
            out.append(b)
            self.pos += 1
        return Name(out.decode("latin-1"))

    def read_literal_string(self) -> bytes:
        self.pos += 1  # (
        out = bytearray()
        depth = 1
        data = self.data
        while self.pos < len(data):
            b = data[self.pos]
            if b == 0x5C:  # backslash
                self.pos += 1
                if self.pos >= len(data):
                    break
                esc = data[self.pos]
                simple = {0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12,
                          0x28: 0x28, 0x29: 0x29, 0x5C: 0x5C}
                if esc in simple:
                    out.append(simple[esc])
                    self.pos += 1
                elif 0x30 <= esc <= 0x37:  # octal, up to 3 digits
                    digits = bytearray()
                    while len(digits) < 3 and self.pos < len(data) and 0x30 <= data[self.pos] <= 0x37:
                        digits.append(data[self.pos])
                        self.pos += 1
                    out.append(int(digits, 8) & 0xFF)
                elif esc in (10, 13):  # line continuation
                    self.pos += 1
                    if esc == 13 and self.pos < len(data) and data[self.pos] == 10:
                        self.pos += 1
                else:
                    out.append(esc)
                    self.pos += 1
            elif b == 0x28:
                depth += 1
                out.append(b)
                self.pos += 1
            elif b == 0x29:
                depth -= 1
                self.pos += 1
                if depth == 0:
                    return bytes(out)
                out.append(b)
            else:
                out.append(b)
                self.pos += 1
        raise MalformedPdf("unterminated literal string", self.pos)

    def read_hex_string(self) -> bytes:
        self.pos += 1  # <
        end = self.data.find(b">", self.pos)
        if end < 0:
            raise MalformedPdf("unterminated hex string", self.pos)
        digits = re.sub(rb"[^0-9A-Fa-f]", b"", self.data[self.pos : end])
        self.pos = end + 1
        if len(digits) % 2:
            digits += b"0"
        return bytes.fromhex(digits.decode("ascii"))


class ObjectParser:
    """Parses one object (possibly nested) starting at the lexer position."""

    def __init__(self, data: bytes, pos: int = 0, resolver=None):
        self.lexer = Lexer(data, pos)
        self.resolver = resolver  # callable Ref -> object, for /Length lookups

    @property
    def pos(self) -> int:
        return self.lexer.pos

    def parse(self):
        lex = self.lexer
        lex.skip_ws()
        if lex.pos >= len(lex.data):
            raise MalformedPdf("unexpected end of data", lex.pos)
        b = lex.data[lex.pos]
        if b == 0x2F:  # /
            return lex.read_name()
        if b == 0x28:  # (
            return lex.read_literal_string()
        if b == 0x3C:  # < or <<
            if lex.peek_bytes(2) == b"<<":
                return self._parse_dict_or_stream()
            return lex.read_hex_string()
        if b == 0x5B:  # [
            lex.pos += 1
            out = []
            while True:
                lex.skip_ws()
                if lex.peek_bytes(1) == b"]":
                    lex.pos += 1
                    return out
                out.append(self.parse())
        if b in b"+-.0123456789":
            return self._parse_number_or_ref()
        keyword = lex.read_keyword()
        if keyword == b"true":
            return True
        if keyword == b"false":
            return False
        if keyword == b"null":
            return None
        raise MalformedPdf(f"unexpected token {keyword[:20]!r}", lex.pos)

    def _parse_number_or_ref(self):
        lex = self.lexer
        m = _NUMBER_RE.match(lex.data, lex.pos)
        if not m:
            raise MalformedPdf("bad number", lex.pos)
        text = m.group()
        lex.pos = m.end()
        if b"." in text:
            return float(text)
        value = int(text)
        # Lookahead for "gen R" making this an indirect reference.
        save = lex.pos
        lex.skip_ws()
        m2 = _NUMBER_RE.match(lex.data, lex.pos)
        if m2 and b"." not in m2.group():
            gen_end = m2.end()
            probe = Lexer(lex.data, gen_end)
            probe.skip_ws()
            if probe.peek_bytes(1) == b"R" and (
                probe.pos + 1 >= len(lex.data) or not is_regular(lex.data[probe.pos + 1])
            ):
                lex.pos = probe.pos + 1
                return Ref(value, int(m2.group()))
        lex.pos = save
        return value

    def _parse_dict_or_stream(self):
        lex = self.lexer
        lex.pos += 2  # <<
        out: dict = {}
        while True:
            lex.skip_ws()
            if lex.peek_bytes(2) == b">>":
                lex.pos += 2
                break
            if lex.peek_bytes(1) != b"/":
                raise MalformedPdf("dictionary key must be a name", lex.pos)
            key = lex.read_name()
            out[str(key)] = self.parse()
        save = lex.pos
        lex.skip_ws()
        if lex.read_keyword() == b"stream":
            # EOL after 'stream' is CRLF or LF
            if lex.peek_bytes(2) == b"\r\n":
                lex.pos += 2
            elif lex.peek_bytes(1) in (b"\n", b"\r"):
                lex.pos += 1
            length = out.get("Length")
            if isinstance(length, Ref):
                length = self.resolver(length) if self.resolver else None
            if not isinstance(length, int):
                # Recover by scanning for endstream.
                end = lex.data.find(b"endstream", lex.pos)
                if end < 0:
                    raise MalformedPdf("stream without endstream", lex.pos)
                length = end - lex.pos
                while length > 0 and lex.data[lex.pos + length - 1] in (10, 13):
                    length -= 1
            raw = lex.data[lex.pos : lex.pos + length]
            lex.pos += length
            lex.skip_ws()
            lex.read_keyword()  # endstream (tolerate absence)
            return StreamObj(out, raw)
        lex.pos = save
        return out


# -- stream filters -----------------------------------------------------------

def _png_predictor(data: bytes, colors: int, bpc: int, columns: int) -> bytes:
    bpp = max(1, (colors * bpc) // 8)
    row_len = (columns * colors * bpc + 7) // 8
    out = bytearray()
    prev = bytearray(row_len)
    pos = 0
    while pos < len(data):
        ftype = data[pos]
        row = bytearray(data[pos + 1 : pos + 1 + row_len])
        pos += 1 + len(row)
        row_len = len(row)  # tolerate a short final row
        if ftype == 1:  # Sub
            for i in range(bpp, row_len):
                row[i] = (row[i] + row[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            for i in range(row_len):
                row[i] = (row[i] + prev[i]) & 0xFF
        elif ftype == 3:  # Average
            for i in range(row_len):
                left = row[i - bpp] if i >= bpp else 0
                row[i] = (row[i] + (left + prev[i]) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(row_len):
                a = row[i - bpp] if i >= bpp else 0
                b = prev[i]
                c = prev[i - bpp] if i >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if pa <= pb and pa <= pc else (b if pb <= pc else c)
                row[i] = (row[i] + pred) & 0xFF
        elif ftype != 0:
            raise MalformedPdf(f"unknown PNG predictor row type {ftype}")
        out.extend(row)
        prev = row
    return bytes(out)


def decode_stream(stream: StreamObj, resolve=None) -> bytes:
    """Apply the stream's filter chain; supports Flate (with predictors) and hex."""

    def deref(obj):
        return resolve(obj) if resolve and isinstance(obj, Ref) else obj

    data = stream.raw
    filters = deref(stream.info.get("Filter"))
    if filters is None:
        return data
    if not isinstance(filters, list):
        filters = [filters]
    parms = deref(stream.info.get("DecodeParms"))
    if not isinstance(parms, list):
        parms = [parms] * len(filters)

    for filt, parm in zip(filters, parms):
        filt = deref(filt)
        parm = deref(parm) or {}
        if filt == "FlateDecode":
            try:
                data = zlib.decompress(data)
            except zlib.error as exc:
                raise MalformedPdf(f"flate decode failed: {exc}") from exc
            predictor = deref(parm.get("Predictor", 1))
            if predictor and predictor >= 10:
                data = _png_predictor(
                    data,
                    deref(parm.get("Colors", 1)),
                    deref(parm.get("BitsPerComponent", 8)),
                    deref(parm.get("Columns", 1)),
                )
            elif predictor not in (None, 1):
                raise MalformedPdf(f"unsupported predictor {predictor}")
        elif filt == "ASCIIHexDecode":
            digits = re.sub(rb"[^0-9A-Fa-f]", b"", data.split(b">")[0])
            if len(digits) % 2:
                digits += b"0"
            data = bytes.fromhex(digits.decode("ascii"))
        elif filt == "ASCII85Decode":
            import base64

            payload = data.split(b"~>")[0]
            payload = re.sub(rb"\s+", b"", payload)
            if payload.startswith(b"<~"):
                payload = payload[2:]
            try:
                data = base64.a85decode(payload, adobe=False)
            except ValueError as exc:
                raise MalformedPdf(f"ascii85 decode failed: {exc}") from exc
        else:
            raise MalformedPdf(f"unsupported stream filter {filt!r}")
    return data
