"""Serialize a document model + structure tree into a tagged PDF.

The writer regenerates content streams from the model (op order per page is
preserved, so op ids survive a parse/write round trip), wraps every
tree-referenced op in marked content carrying its MCID, wraps everything else
as an artifact, and emits a StructTreeRoot with a parent tree plus the UA
metadata entries. Output is byte-deterministic for a fixed input.
"""

from __future__ import annotations

import hashlib
import zlib

from ..model import (
    ContentOp, DocMeta, OpId, OpKind, StructNode, TagKind, TaggedDocument,
)
from ..structure import validate_tree
from .fonts import (
    STANDARD_14, normalize_font_name, pick_standard_font, vertical_extent,
)
from .objects import Name, Ref


class InvalidTree(ValueError):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


class UnresolvedContent(ValueError):
    pass


class MissingMeta(ValueError):
    pass


def _fmt_num(value: float) -> str:
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-0") else "0"


def _escape_string(data: bytes) -> bytes:
    out = bytearray(b"(")
    for b in data:
        if b in (0x28, 0x29, 0x5C):
            out.append(0x5C)
            out.append(b)
        elif b in (0x0A, 0x0D, 0x09):
            out.extend({0x0A: b"\\n", 0x0D: b"\\r", 0x09: b"\\t"}[b])
        elif 32 <= b < 127:
            out.append(b)
        else:
            out.extend(b"\\%03o" % b)
    out.append(0x29)
    return bytes(out)


def _text_string(text: str) -> bytes:
    try:
        return _escape_string(text.encode("latin-1"))
    except UnicodeEncodeError:
        return _escape_string(b"\xfe\xff" + text.encode("utf-16-be"))


_NAME_ESCAPE = set(b"()<>[]{}/%# \t\n\r\x0c\x00")


def _ser_name(name: str) -> bytes:
    out = bytearray(b"/")
    for b in name.encode("latin-1"):
        if b in _NAME_ESCAPE or b < 33 or b > 126:
            out.extend(b"#%02X" % b)
        else:
            out.append(b)
    return bytes(out)


class b_hex(bytes):
    """Marker type: serialized as a hex string rather than a literal string."""

    __slots__ = ()


def serialize(obj) -> bytes:
    if isinstance(obj, b_hex):
        return b"<" + bytes(obj) + b">"
    if isinstance(obj, Name):
        return _ser_name(str(obj))
    if isinstance(obj, Ref):
        return b"%d %d R" % (obj.num, obj.gen)
    if isinstance(obj, bool):
        return b"true" if obj else b"false"
    if isinstance(obj, int):
        return b"%d" % obj
    if isinstance(obj, float):
        return _fmt_num(obj).encode("ascii")
    if isinstance(obj, bytes):
        return _escape_string(obj)
    if isinstance(obj, str):
        return _text_string(obj)
    if obj is None:
        return b"null"
    if isinstance(obj, list):
        return b"[" + b" ".join(serialize(v) for v in obj) + b"]"
    if isinstance(obj, dict):
        parts = [b"<<"]
        for key, value in obj.items():
            parts.append(_ser_name(key) + b" " + serialize(value))
        parts.append(b">>")
        return b"\n".join(parts)
    raise TypeError(f"cannot serialize {type(obj)}")


class _Builder:
    def __init__(self):
        self.objects: list[bytes | None] = []

    def alloc(self) -> int:
        self.objects.append(None)
        return len(self.objects)  # object numbers are 1-based

    def put(self, num: int, obj, stream: bytes | None = None) -> Ref:
        body = serialize(obj)
        if stream is not None:
            body += b"\nstream\n" + stream + b"\nendstream"
        self.objects[num - 1] = body
        return Ref(num, 0)

    def add(self, obj, stream: bytes | None = None) -> Ref:
        return self.put(self.alloc(), obj, stream)

    def render(self, trailer_extra: dict) -> bytes:
        header = b"%PDF-1.7\n%\xe2\xe3\xcf\xd3\n"
        chunks = [header]
        offsets = [0]
        pos = len(header)
        for i, body in enumerate(self.objects):
            if body is None:
                raise AssertionError(f"object {i + 1} never written")
            entry = b"%d 0 obj\n" % (i + 1) + body + b"\nendobj\n"
            offsets.append(pos)
            chunks.append(entry)
            pos += len(entry)
        xref_pos = pos
        n = len(self.objects) + 1
        xref = [b"xref\n0 %d\n" % n, b"0000000000 65535 f \n"]
        for off in offsets[1:]:
            xref.append(b"%010d 00000 n \n" % off)
        body_so_far = b"".join(chunks)
        file_id = hashlib.md5(body_so_far).hexdigest().encode("ascii")
        trailer = dict(trailer_extra)
        trailer["Size"] = n
        trailer["ID"] = [b_hex(file_id), b_hex(file_id)]
        chunks.extend(xref)
        chunks.append(b"trailer\n" + serialize(trailer))
        chunks.append(b"\nstartxref\n%d\n%%%%EOF\n" % xref_pos)
        return b"".join(chunks)


def _check_content(doc: TaggedDocument, tree: StructNode) -> list[OpId]:
    """Pre-order op references; raises when one is missing or duplicated."""
    refs = tree.leaf_ops()
    seen: set[OpId] = set()
    for op_id in refs:
        page, seq = op_id
        if not (0 <= page < len(doc.pages)) or not (0 <= seq < len(doc.pages[page].ops)):
            raise UnresolvedContent(f"tree references missing op {op_id}")
        if op_id in seen:
            raise UnresolvedContent(f"tree references op {op_id} twice")
        seen.add(op_id)
    return refs


def _leaf_tags(tree: StructNode) -> dict[OpId, TagKind]:
    out: dict[OpId, TagKind] = {}

    def walk(node: StructNode) -> None:
        for child in node.children:
            if isinstance(child, StructNode):
                walk(child)
            else:
                out[child] = node.tag

    walk(tree)
    return out


_TINY_IMAGE = bytes([0x80] * 12)  # 2x2 gray RGB placeholder pixels


def write_tagged_pdf(doc: TaggedDocument, tree: StructNode, meta: DocMeta) -> bytes:
    """Produce tagged PDF bytes; parse_pdf on the output reproduces tree and meta."""
    violations = validate_tree(tree)
    if violations:
        raise InvalidTree(violations)
    if not meta.title:
        raise MissingMeta("exported documents need a title")
    if not meta.language:
        raise MissingMeta("exported documents need a language")
    _check_content(doc, tree)
    leaf_tag = _leaf_tags(tree)

    builder = _Builder()
    catalog_num = builder.alloc()
    pages_root_num = builder.alloc()
    info_num = builder.alloc()
    struct_root_num = builder.alloc()
    parent_tree_num = builder.alloc()
    metadata_num = builder.alloc()

    # Fonts and image placeholders discovered from the ops.
    font_names: list[str] = []
    image_count = 0
    for page in doc.pages:
        for op in page.ops:
            if op.kind == OpKind.TEXT:
                name = _writer_font(op)
                if name not in font_names:
                    font_names.append(name)
            elif op.kind == OpKind.IMAGE:
                image_count += 1
    font_refs = {
        name: builder.add(
            {
                "Type": Name("Font"),
                "Subtype": Name("Type1"),
                "BaseFont": Name(name),
                "Encoding": Name("WinAnsiEncoding"),
            }
        )
        for name in sorted(font_names)
    }
    image_ref = None
    if image_count:
        image_ref = builder.add(
            {
                "Type": Name("XObject"),
                "Subtype": Name("Image"),
                "Width": 2,
                "Height": 2,
                "ColorSpace": Name("DeviceRGB"),
                "BitsPerComponent": 8,
                "Length": len(_TINY_IMAGE),
            },
            stream=_TINY_IMAGE,
        )

    # Assign MCIDs per page in content order.
    mcid_of: dict[OpId, int] = {}
    for page in doc.pages:
        counter = 0
        for op in page.ops:
            if op.id in leaf_tag:
                mcid_of[op.id] = counter
                counter += 1

    page_nums = [builder.alloc() for _ in doc.pages]
    page_refs = [Ref(num, 0) for num in page_nums]

    content_refs = []
    for page in doc.pages:
        stream = _render_page_content(page, leaf_tag, mcid_of, font_refs)
        compressed = zlib.compress(stream, 6)
        content_refs.append(
            builder.add(
                {"Length": len(compressed), "Filter": Name("FlateDecode")},
                stream=compressed,
            )
        )

    for page, num, content_ref in zip(doc.pages, page_nums, content_refs):
        resources: dict = {
            "Font": {f"F{i}": ref for i, (name, ref) in enumerate(sorted(font_refs.items()))},
        }
        if image_ref is not None:
            resources["XObject"] = {"Im0": image_ref}
        builder.put(
            num,
            {
                "Type": Name("Page"),
                "Parent": Ref(pages_root_num, 0),
                "MediaBox": [0, 0, page.width, page.height],
                "Resources": resources,
                "Contents": content_ref,
                "StructParents": page.index,
                "Tabs": Name("S"),
            },
        )

    # Structure elements, pre-order allocation so parents precede children.
    elem_num: dict[int, int] = {}

    def allocate(node: StructNode) -> None:
        elem_num[id(node)] = builder.alloc()
        for child in node.children:
            if isinstance(child, StructNode):
                allocate(child)

    allocate(tree)

    mcid_owner: dict[OpId, Ref] = {}

    def write_elem(node: StructNode, parent_ref: Ref) -> Ref:
        ref = Ref(elem_num[id(node)], 0)
        kids: list = []
        for child in node.children:
            if isinstance(child, StructNode):
                kids.append(write_elem(child, ref))
            else:
                kids.append(
                    {
                        "Type": Name("MCR"),
                        "Pg": page_refs[child[0]],
                        "MCID": mcid_of[child],
                    }
                )
                mcid_owner[child] = ref
        body: dict = {
            "Type": Name("StructElem"),
            "S": Name(node.tag.value),
            "P": parent_ref,
        }
        if kids:
            body["K"] = kids
        alt = node.attributes.get("alt")
        if isinstance(alt, str):
            body["Alt"] = alt
        scope = node.attributes.get("scope")
        if isinstance(scope, str):
            body["A"] = {
                "O": Name("Table"),
                "Scope": Name(scope.capitalize()),
            }
        builder.put(elem_num[id(node)], body)
        return ref

    root_elem_ref = write_elem(tree, Ref(struct_root_num, 0))

    nums: list = []
    for page in doc.pages:
        refs = [
            mcid_owner[op.id] for op in page.ops if op.id in mcid_of
        ]
        nums.extend([page.index, refs])
    builder.put(parent_tree_num, {"Nums": nums})

    builder.put(
        struct_root_num,
        {
            "Type": Name("StructTreeRoot"),
            "K": [root_elem_ref],
            "ParentTree": Ref(parent_tree_num, 0),
            "ParentTreeNextKey": len(doc.pages),
        },
    )

    builder.put(
        pages_root_num,
        {"Type": Name("Pages"), "Kids": page_refs, "Count": len(doc.pages)},
    )
    builder.put(info_num, {"Title": meta.title, "Author": meta.author})

    xmp = _xmp_packet(meta)
    builder.put(
        metadata_num,
        {
            "Type": Name("Metadata"),
            "Subtype": Name("XML"),
            "Length": len(xmp),
        },
        stream=xmp,
    )

    catalog: dict = {
        "Type": Name("Catalog"),
        "Pages": Ref(pages_root_num, 0),
        "StructTreeRoot": Ref(struct_root_num, 0),
        "Lang": meta.language,
        "Metadata": Ref(metadata_num, 0),
    }
    if "marked" in meta.ua_flags:
        catalog["MarkInfo"] = {"Marked": True}
    if "display-doc-title" in meta.ua_flags:
        catalog["ViewerPreferences"] = {"DisplayDocTitle": True}
    builder.put(catalog_num, catalog)

    return builder.render({"Root": Ref(catalog_num, 0), "Info": Ref(info_num, 0)})


def _writer_font(op: ContentOp) -> str:
    name = normalize_font_name(op.font_name or "")
    if name in STANDARD_14:
        return name
    return pick_standard_font(op.bold, op.italic)


def _render_page_content(
    page, leaf_tag: dict[OpId, TagKind], mcid_of: dict[OpId, int], font_refs
) -> bytes:
    font_index = {name: i for i, name in enumerate(sorted(font_refs))}
    lines: list[bytes] = []
    for op in page.ops:
        if op.id in leaf_tag:
            opener = b"%s <</MCID %d>> BDC" % (
                _ser_name(leaf_tag[op.id].value), mcid_of[op.id],
            )
        else:
            lines.append(b"/Artifact BMC")
            opener = None
        if opener is not None:
            lines.append(opener)
        lines.append(_render_op(op, font_index))
        lines.append(b"EMC")
    return b"\n".join(lines)


def _render_op(op: ContentOp, font_index: dict[str, int]) -> bytes:
    if op.kind == OpKind.TEXT:
        font = _writer_font(op)
        size = op.font_size or 10.0
        descent, _ = vertical_extent(font, size)
        x = op.bbox.x0
        y = op.bbox.y0 - descent
        text = (op.text or "").encode("latin-1", errors="replace")
        return b"BT /F%d %s Tf %s %s Td %s Tj ET" % (
            font_index[font],
            _fmt_num(size).encode(),
            _fmt_num(x).encode(),
            _fmt_num(y).encode(),
            _escape_string(text),
        )
    if op.kind == OpKind.IMAGE:
        return b"q %s 0 0 %s %s %s cm /Im0 Do Q" % (
            _fmt_num(max(op.bbox.width, 0.0001)).encode(),
            _fmt_num(max(op.bbox.height, 0.0001)).encode(),
            _fmt_num(op.bbox.x0).encode(),
            _fmt_num(op.bbox.y0).encode(),
        )
    return b"%s %s %s %s re S" % (
        _fmt_num(op.bbox.x0).encode(),
        _fmt_num(op.bbox.y0).encode(),
        _fmt_num(op.bbox.width).encode(),
        _fmt_num(op.bbox.height).encode(),
    )


def _xmp_packet(meta: DocMeta) -> bytes:
    ua_part = (
        '  <rdf:Description rdf:about="" xmlns:pdfuaid="http://www.aiim.org/pdfua/ns/id/">\n'
        "   <pdfuaid:part>1</pdfuaid:part>\n"
        "  </rdf:Description>\n"
        if "pdfua-id" in meta.ua_flags
        else ""
    )
    title = (
        meta.title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )
    packet = (
        '<?xpacket begin="﻿" id="W5M0MpCehiHzreSzNTczkc9d"?>\n'
        '<x:xmpmeta xmlns:x="adobe:ns:meta/">\n'
        ' <rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">\n'
        '  <rdf:Description rdf:about="" xmlns:dc="http://purl.org/dc/elements/1.1/">\n'
        f"   <dc:title><rdf:Alt><rdf:li xml:lang=\"x-default\">{title}</rdf:li></rdf:Alt></dc:title>\n"
        "  </rdf:Description>\n"
        f"{ua_part}"
        " </rdf:RDF>\n"
        "</x:xmpmeta>\n"
        '<?xpacket end="w"?>'
    )
    return packet.encode("utf-8")
