"""Core document model: pages, content operators, structure tree, metadata.

The model is produced by :mod:`pdfremedy.pdfio.reader`, consumed by every
remediation step, and serialized back by :mod:`pdfremedy.pdfio.writer`.
A :class:`TaggedDocument` is treated as immutable after parsing; remediation
produces new structure trees and metadata rather than mutating pages.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from .geometry import Rect

# (page index, sequence number in content-stream order) — stable across
# parse/write round trips because the writer preserves op order per page.
OpId = tuple[int, int]


def op_id_str(op_id: OpId) -> str:
    return f"{op_id[0]}:{op_id[1]}"


def op_id_from_str(s: str) -> OpId:
    page, _, seq = s.partition(":")
    return (int(page), int(seq))


class OpKind(str, Enum):
    TEXT = "text-run"
    IMAGE = "image"
    PATH = "path"


class TagKind(str, Enum):
    DOCUMENT = "Document"
    P = "P"
    H1 = "H1"
    H2 = "H2"
    H3 = "H3"
    H4 = "H4"
    H5 = "H5"
    H6 = "H6"
    L = "L"
    LI = "LI"
    LBL = "Lbl"
    LBODY = "LBody"
    TABLE = "Table"
    TR = "TR"
    TH = "TH"
    TD = "TD"
    FIGURE = "Figure"
    FORMULA = "Formula"
    CAPTION = "Caption"
    ARTIFACT = "Artifact"


HEADING_TAGS = (TagKind.H1, TagKind.H2, TagKind.H3, TagKind.H4, TagKind.H5, TagKind.H6)


def heading_tag(level: int) -> TagKind:
    if not 1 <= level <= 6:
        raise ValueError(f"heading level out of range: {level}")
    return HEADING_TAGS[level - 1]


def heading_level(tag: TagKind) -> int | None:
    """1..6 for H1..H6, None for any other tag."""
    try:
        return HEADING_TAGS.index(tag) + 1
    except ValueError:
        return None


@dataclass
class ContentOp:
    """One content-stream operator: a text run, an image placement, or a path."""

    id: OpId
    kind: OpKind
    bbox: Rect
    text: str | None = None
    font_size: float | None = None
    font_name: str | None = None
    bold: bool = False
    italic: bool = False
    mcid: int | None = None
    artifact: bool = False  # wrapped in an /Artifact marked-content sequence

    @property
    def page(self) -> int:
        return self.id[0]

    @property
    def seq(self) -> int:
        return self.id[1]


@dataclass
class Page:
    index: int
    width: float
    height: float
    ops: list[ContentOp] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"page {self.index}: non-positive size")

    def op(self, seq: int) -> ContentOp:
        return self.ops[seq]

    @property
    def bbox(self) -> Rect:
        return Rect(0.0, 0.0, self.width, self.height)


# A structure-tree child is either a nested element or a content reference.
StructChild = Union["StructNode", OpId]


@dataclass
class StructNode:
    """Node of the logical structure tree; leaves reference content ops."""

    tag: TagKind
    children: list[StructChild] = field(default_factory=list)
    attributes: dict[str, object] = field(default_factory=dict)

    def iter_nodes(self) -> Iterator["StructNode"]:
        yield self
        for child in self.children:
            if isinstance(child, StructNode):
                yield from child.iter_nodes()

    def leaf_ops(self) -> list[OpId]:
        """Referenced op ids in document (pre-order) order."""
        out: list[OpId] = []
        for child in self.children:
            if isinstance(child, StructNode):
                out.extend(child.leaf_ops())
            else:
                out.append(child)
        return out

    @property
    def alt_text(self) -> str | None:
        alt = self.attributes.get("alt")
        return alt if isinstance(alt, str) else None


# Entries that the exporter applies without caller input, per the UA profile:
# the tagged flag, title display, and the UA conformance identifier.
AUTO_UA_FLAGS = frozenset({"marked", "display-doc-title", "pdfua-id"})

_BCP47_RE = re.compile(r"^[A-Za-z]{2,8}(-[A-Za-z0-9]{1,8})*$")


class InvalidLanguageTag(ValueError):
    pass


@dataclass
class DocMeta:
    title: str = ""
    author: str = ""
    language: str = ""
    ua_flags: frozenset[str] = frozenset()

    def with_ua_flags(self) -> "DocMeta":
        return DocMeta(self.title, self.author, self.language, AUTO_UA_FLAGS)


def validate_language(tag: str) -> str:
    if not tag or not _BCP47_RE.match(tag):
        raise InvalidLanguageTag(f"not a BCP-47 language tag: {tag!r}")
    return tag


@dataclass
class TaggedDocument:
    pages: list[Page]
    struct_tree: StructNode | None = None
    meta: DocMeta = field(default_factory=DocMeta)
    source_bytes: bytes = b""

    def op(self, op_id: OpId) -> ContentOp:
        page, seq = op_id
        return self.pages[page].ops[seq]

    def all_op_ids(self) -> list[OpId]:
        return [op.id for page in self.pages for op in page.ops]

    @property
    def source_hash(self) -> str:
        return "sha256:" + hashlib.sha256(self.source_bytes).hexdigest()


def set_meta(doc: TaggedDocument, title: str, author: str, language: str) -> DocMeta:
    """Build export metadata; UA-required entries are filled in automatically."""
    validate_language(language)
    return DocMeta(title=title, author=author, language=language, ua_flags=AUTO_UA_FLAGS)
