"""PDF file reader: xref resolution, page tree walk, structure-tree recovery.

Handles classic xref tables, xref streams, hybrid files, and object streams;
when the xref is unusable the reader falls back to scanning the file for
``N G obj`` headers. Content streams are interpreted by
:mod:`pdfremedy.pdfio.content` into positioned operators.
"""

from __future__ import annotations

import re

from ..model import (
    ContentOp, DocMeta, OpId, Page, StructNode, TagKind, TaggedDocument,
)
from .content import interpret_content
from .objects import (
    Lexer, MalformedPdf, ObjectParser, Ref, StreamObj, decode_stream,
)

_OBJ_HEADER_RE = re.compile(rb"(\d+)\s+(\d+)\s+obj\b")


class _XrefEntry:
    __slots__ = ("kind", "offset", "container", "index")

    def __init__(self, kind: str, offset: int = 0, container: int = 0, index: int = 0):
        self.kind = kind  # "file" or "objstm"
        self.offset = offset
        self.container = container
        self.index = index


class PdfFile:
    """Random-access view of one PDF payload with object resolution."""

    def __init__(self, data: bytes):
        if not data.lstrip()[:5].startswith(b"%PDF-"):
            raise MalformedPdf("missing %PDF header", offset=0)
        self.data = data
        self.entries: dict[int, _XrefEntry] = {}
        self.trailer: dict = {}
        self._cache: dict[int, object] = {}
        self._objstm_cache: dict[int, list] = {}
        try:
            self._load_xref()
        except MalformedPdf:
            self._rebuild_xref()
        if "Root" not in self.trailer:
            self._rebuild_xref()
            if "Root" not in self.trailer:
                raise MalformedPdf("trailer has no document root")

    # -- xref loading ----------------------------------------------------------

    def _load_xref(self) -> None:
        tail = self.data[-2048:]
        m = None
        for m in re.finditer(rb"startxref\s+(\d+)", tail):
            pass
        if m is None:
            raise MalformedPdf("startxref not found", offset=len(self.data))
        offset = int(m.group(1))
        seen = set()
        while offset and offset not in seen:
            seen.add(offset)
            offset = self._load_xref_section(offset)

    def _load_xref_section(self, offset: int) -> int:
        if offset >= len(self.data):
            raise MalformedPdf("xref offset beyond end of file", offset=offset)
        lex = Lexer(self.data, offset)
        lex.skip_ws()
        if lex.peek_bytes(4) == b"xref":
            return self._load_xref_table(lex)
        return self._load_xref_stream(offset)

    def _load_xref_table(self, lex: Lexer) -> int:
        lex.pos += 4
        while True:
            lex.skip_ws()
            if lex.peek_bytes(7) == b"trailer":
                lex.pos += 7
                trailer = ObjectParser(self.data, lex.pos, self.resolve).parse()
                for key, value in trailer.items():
                    self.trailer.setdefault(key, value)
                if "XRefStm" in trailer:  # hybrid file
                    self._load_xref_stream(int(trailer["XRefStm"]))
                prev = trailer.get("Prev")
                return int(prev) if prev is not None else 0
            m = re.match(rb"(\d+)\s+(\d+)", self.data[lex.pos : lex.pos + 40])
            if not m:
                raise MalformedPdf("bad xref subsection header", offset=lex.pos)
            start, count = int(m.group(1)), int(m.group(2))
            lex.pos += m.end()
            lex.skip_ws()
            for i in range(count):
                entry = self.data[lex.pos : lex.pos + 20]
                em = re.match(rb"(\d{10})\s+(\d{5})\s+([nf])", entry)
                if not em:
                    raise MalformedPdf("bad xref entry", offset=lex.pos)
                if em.group(3) == b"n" and (start + i) not in self.entries:
                    self.entries[start + i] = _XrefEntry("file", offset=int(em.group(1)))
                lex.pos += em.end()
                lex.skip_ws()

    def _load_xref_stream(self, offset: int) -> int:
        m = _OBJ_HEADER_RE.match(self.data, offset) or _OBJ_HEADER_RE.search(
            self.data, offset, offset + 64
        )
        if not m:
            raise MalformedPdf("xref stream header not found", offset=offset)
        parser = ObjectParser(self.data, m.end(), self.resolve)
        stream = parser.parse()
        if not isinstance(stream, StreamObj):
            raise MalformedPdf("xref stream is not a stream", offset=offset)
        info = stream.info
        for key, value in info.items():
            if key not in ("Length", "Filter", "DecodeParms", "W", "Index", "Type"):
                self.trailer.setdefault(key, value)
        widths = [int(w) for w in info["W"]]
        size = int(info["Size"])
        index = info.get("Index", [0, size])
        data = decode_stream(stream, self.resolve)
        entry_len = sum(widths)
        pos = 0
        for span in range(0, len(index), 2):
            start, count = int(index[span]), int(index[span + 1])
            for num in range(start, start + count):
                if pos + entry_len > len(data):
                    break
                fields = []
                for w in widths:
                    fields.append(int.from_bytes(data[pos : pos + w], "big") if w else None)
                    pos += w
                kind = fields[0] if widths[0] else 1
                if num in self.entries:
                    continue
                if kind == 1:
                    self.entries[num] = _XrefEntry("file", offset=fields[1] or 0)
                elif kind == 2:
                    self.entries[num] = _XrefEntry(
                        "objstm", container=fields[1] or 0, index=fields[2] or 0
                    )
        prev = info.get("Prev")
        return int(prev) if prev is not None else 0

    def _rebuild_xref(self) -> None:
        """Last-resort scan for object headers and the trailer dictionary."""
        self.entries = {
            int(m.group(1)): _XrefEntry("file", offset=m.start())
            for m in _OBJ_HEADER_RE.finditer(self.data)
        }
        self._cache.clear()
        if "Root" not in self.trailer:
            for m in re.finditer(rb"trailer", self.data):
                try:
                    trailer = ObjectParser(self.data, m.end(), self.resolve).parse()
                except MalformedPdf:
                    continue
                if isinstance(trailer, dict) and "Root" in trailer:
                    self.trailer.update(trailer)
        if "Root" not in self.trailer:
            # xref-stream files have the root in the stream dict
            for num in list(self.entries):
                try:
                    obj = self.load(num)
                except MalformedPdf:
                    continue
                if isinstance(obj, StreamObj) and obj.info.get("Type") == "XRef":
                    if "Root" in obj.info:
                        self.trailer.update(
                            {k: v for k, v in obj.info.items() if k in ("Root", "Info")}
                        )
                        break

    # -- object access ----------------------------------------------------------

    def resolve(self, obj):
        while isinstance(obj, Ref):
            obj = self.load(obj.num)
        return obj

    def load(self, num: int):
        if num in self._cache:
            return self._cache[num]
        entry = self.entries.get(num)
        if entry is None:
            return None
        if entry.kind == "file":
            m = _OBJ_HEADER_RE.match(self.data, entry.offset)
            if not m:
                m = _OBJ_HEADER_RE.search(self.data, entry.offset, entry.offset + 32)
            if not m or int(m.group(1)) != num:
                raise MalformedPdf(f"object {num} not at recorded offset", entry.offset)
            obj = ObjectParser(self.data, m.end(), self.resolve).parse()
        else:
            obj = self._load_from_objstm(entry.container, entry.index)
        self._cache[num] = obj
        return obj

    def _load_from_objstm(self, container: int, index: int):
        objs = self._objstm_cache.get(container)
        if objs is None:
            stream = self.load(container)
            if not isinstance(stream, StreamObj):
                raise MalformedPdf(f"object stream {container} missing")
            data = decode_stream(stream, self.resolve)
            n = int(self.resolve(stream.info["N"]))
            first = int(self.resolve(stream.info["First"]))
            header = ObjectParser(data, 0, None)
            pairs = []
            for _ in range(n):
                onum = header.parse()
                ooff = header.parse()
                pairs.append((onum, ooff))
            objs = []
            for _, ooff in pairs:
                objs.append(ObjectParser(data, first + int(ooff), self.resolve).parse())
            self._objstm_cache[container] = objs
        if index >= len(objs):
            raise MalformedPdf(f"object stream index {index} out of range")
        return objs[index]

    def stream_data(self, obj) -> bytes:
        obj = self.resolve(obj)
        if not isinstance(obj, StreamObj):
            raise MalformedPdf("expected a stream object")
        return decode_stream(obj, self.resolve)


def _pdf_text(value) -> str:
    """Decode a PDF text string (UTF-16BE with BOM, else PDFDocEncoding-ish)."""
    if isinstance(value, bytes):
        if value[:2] == b"\xfe\xff":
            return value[2:].decode("utf-16-be", errors="replace")
        return value.decode("latin-1", errors="replace")
    return str(value) if value is not None else ""


def _walk_pages(pdf: PdfFile, node, inherited: dict, out: list) -> None:
    node = pdf.resolve(node)
    if not isinstance(node, dict):
        return
    merged = dict(inherited)
    for key in ("Resources", "MediaBox", "Rotate"):
        if key in node:
            merged[key] = node[key]
    if node.get("Type") == "Pages" or "Kids" in node:
        for kid in pdf.resolve(node.get("Kids", [])) or []:
            _walk_pages(pdf, kid, merged, out)
    else:
        out.append((node, merged))


def parse_pdf(data: bytes) -> TaggedDocument:
    """Parse a PDF payload into the document model.

    Pages and their positioned operators are always produced; a pre-existing
    structure tree and metadata are preserved when present. Raises
    MalformedPdf (with offset/page context) on unparseable input.
    """
    pdf = PdfFile(data)
    catalog = pdf.resolve(pdf.trailer.get("Root"))
    if not isinstance(catalog, dict):
        raise MalformedPdf("document catalog missing")
    raw_pages: list = []
    _walk_pages(pdf, catalog.get("Pages"), {}, raw_pages)
    if not raw_pages:
        raise MalformedPdf("document has no pages")

    pages: list[Page] = []
    mcid_ops: dict[tuple[int, int], list[OpId]] = {}
    for index, (node, inherited) in enumerate(raw_pages):
        media = [float(pdf.resolve(v)) for v in pdf.resolve(inherited.get("MediaBox", [0, 0, 612, 792]))]
        width, height = media[2] - media[0], media[3] - media[1]
        contents = pdf.resolve(node.get("Contents"))
        chunks: list[bytes] = []
        if isinstance(contents, StreamObj):
            chunks.append(decode_stream(contents, pdf.resolve))
        elif isinstance(contents, list):
            for part in contents:
                part = pdf.resolve(part)
                if isinstance(part, StreamObj):
                    chunks.append(decode_stream(part, pdf.resolve))
        stream = b"\n".join(chunks)
        resources = pdf.resolve(inherited.get("Resources")) or {}
        try:
            raw_ops = interpret_content(
                stream, resources, pdf.resolve, origin=(media[0], media[1])
            )
        except MalformedPdf as exc:
            raise MalformedPdf(str(exc), page=index) from exc
        ops: list[ContentOp] = []
        for seq, op in enumerate(raw_ops):
            op.id = (index, seq)
            ops.append(op)
            if op.mcid is not None:
                mcid_ops.setdefault((index, op.mcid), []).append(op.id)
        pages.append(Page(index=index, width=width, height=height, ops=ops))

    page_number = {id(node): i for i, (node, _) in enumerate(raw_pages)}
    struct_tree = _read_struct_tree(pdf, catalog, page_number, mcid_ops)
    meta = _read_meta(pdf, catalog)
    return TaggedDocument(
        pages=pages, struct_tree=struct_tree, meta=meta, source_bytes=data
    )


def _read_meta(pdf: PdfFile, catalog: dict) -> DocMeta:
    info = pdf.resolve(pdf.trailer.get("Info")) or {}
    flags = set()
    mark_info = pdf.resolve(catalog.get("MarkInfo")) or {}
    if pdf.resolve(mark_info.get("Marked")) is True:
        flags.add("marked")
    prefs = pdf.resolve(catalog.get("ViewerPreferences")) or {}
    if pdf.resolve(prefs.get("DisplayDocTitle")) is True:
        flags.add("display-doc-title")
    metadata = pdf.resolve(catalog.get("Metadata"))
    if isinstance(metadata, StreamObj) and b"pdfuaid" in decode_stream(metadata, pdf.resolve):
        flags.add("pdfua-id")
    return DocMeta(
        title=_pdf_text(pdf.resolve(info.get("Title"))),
        author=_pdf_text(pdf.resolve(info.get("Author"))),
        language=_pdf_text(pdf.resolve(catalog.get("Lang"))),
        ua_flags=frozenset(flags),
    )


def _tag_kind(pdf: PdfFile, s_name, role_map: dict) -> tuple[TagKind, str | None]:
    name = str(s_name) if s_name is not None else "P"
    original = None
    try:
        return TagKind(name), None
    except ValueError:
        pass
    mapped = role_map.get(name)
    if mapped is not None:
        try:
            return TagKind(str(mapped)), name
        except ValueError:
            pass
    return TagKind.P, name  # foreign role: keep content, note the original


def _read_struct_tree(
    pdf: PdfFile,
    catalog: dict,
    page_number: dict[int, int],
    mcid_ops: dict[tuple[int, int], list[OpId]],
) -> StructNode | None:
    root = pdf.resolve(catalog.get("StructTreeRoot"))
    if not isinstance(root, dict):
        return None
    role_map = pdf.resolve(root.get("RoleMap")) or {}

    def page_index(pg) -> int | None:
        node = pdf.resolve(pg)
        return page_number.get(id(node)) if node is not None else None

    def read_elem(obj, inherited_page: int | None) -> list:
        obj = pdf.resolve(obj)
        if isinstance(obj, int):  # bare MCID
            if inherited_page is None:
                return []
            return list(mcid_ops.get((inherited_page, obj), []))
        if isinstance(obj, list):
            out = []
            for item in obj:
                out.extend(read_elem(item, inherited_page))
            return out
        if not isinstance(obj, dict):
            return []
        if obj.get("Type") == "MCR":
            pg = page_index(obj.get("Pg"))
            if pg is None:
                pg = inherited_page
            mcid = pdf.resolve(obj.get("MCID"))
            if pg is None or not isinstance(mcid, int):
                return []
            return list(mcid_ops.get((pg, mcid), []))
        if obj.get("Type") == "OBJR":
            return []  # annotations are out of scope
        # A structure element.
        tag, original = _tag_kind(pdf, pdf.resolve(obj.get("S")), role_map)
        own_page = page_index(obj.get("Pg"))
        if own_page is None:
            own_page = inherited_page
        children: list = []
        k = obj.get("K")
        if k is not None:
            children = read_elem_children(k, own_page)
        attributes: dict[str, object] = {}
        alt = pdf.resolve(obj.get("Alt"))
        if alt is not None:
            attributes["alt"] = _pdf_text(alt)
        scope = _read_scope(pdf, obj.get("A"))
        if scope is not None:
            attributes["scope"] = scope
        if original is not None:
            attributes["original_role"] = original
        return [StructNode(tag=tag, children=children, attributes=attributes)]

    def read_elem_children(k, inherited_page: int | None) -> list:
        items = k if isinstance(k, list) else [k]
        out: list = []
        for item in items:
            out.extend(read_elem(item, inherited_page))
        return out

    top = read_elem_children(root.get("K"), None)
    if len(top) == 1 and isinstance(top[0], StructNode) and top[0].tag == TagKind.DOCUMENT:
        return top[0]
    if not top:
        return None
    return StructNode(tag=TagKind.DOCUMENT, children=top)


def _read_scope(pdf: PdfFile, attrs) -> str | None:
    attrs = pdf.resolve(attrs)
    if attrs is None:
        return None
    items = attrs if isinstance(attrs, list) else [attrs]
    for item in items:
        item = pdf.resolve(item)
        if isinstance(item, StreamObj):
            item = item.info
        if isinstance(item, dict) and item.get("O") == "Table":
            scope = item.get("Scope")
            if scope == "Row":
                return "row"
            if scope == "Column":
                return "column"
            if scope == "Both":
                return "both"
    return None
