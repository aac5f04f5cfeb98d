"""Synthetic documents, trees, and truths for round-trip and scoring tests.

Documents are built directly in the model (no reportlab) so tests control
every op id. `random_document`/`random_tree` produce grammar-valid trees for
the writer round-trip; `scored_doc` builds a document + truth pair whose tree
can then be corrupted in controlled ways.
"""

from __future__ import annotations

import random
import string

from pdfremedy.geometry import Rect
from pdfremedy.model import (
    ContentOp, DocMeta, OpId, OpKind, Page, StructNode, TagKind,
    TaggedDocument, heading_tag,
)
from pdfremedy.pdfio.fonts import text_width, vertical_extent
from pdfremedy.scoring import TruthElement, TruthMap


def text_op(page: int, seq: int, x: float, y: float, text: str,
            size: float = 10.0, font: str = "Helvetica") -> ContentOp:
    descent, ascent = vertical_extent(font, size)
    width = max(text_width(text, font, size), 0.01)
    return ContentOp(
        id=(page, seq), kind=OpKind.TEXT,
        bbox=Rect(x, y + descent, x + width, y + ascent),
        text=text, font_size=size, font_name=font,
        bold="Bold" in font, italic="Oblique" in font,
    )


def image_op(page: int, seq: int, x: float, y: float, w: float, h: float) -> ContentOp:
    return ContentOp(id=(page, seq), kind=OpKind.IMAGE, bbox=Rect(x, y, x + w, y + h))


def path_op(page: int, seq: int, x: float, y: float, w: float, h: float) -> ContentOp:
    return ContentOp(id=(page, seq), kind=OpKind.PATH, bbox=Rect(x, y, x + w, y + h))


def simple_doc(lines: list[str], page_w: float = 612, page_h: float = 792) -> TaggedDocument:
    ops = [
        text_op(0, i, 72, page_h - 100 - 14 * i, line) for i, line in enumerate(lines)
    ]
    return TaggedDocument(pages=[Page(0, page_w, page_h, ops)])


def random_word(rng: random.Random) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(3, 9)))


def random_document(rng: random.Random, max_pages: int = 3) -> TaggedDocument:
    pages = []
    for p in range(rng.randint(1, max_pages)):
        ops: list[ContentOp] = []
        y = 760.0
        for seq in range(rng.randint(3, 14)):
            roll = rng.random()
            if roll < 0.75:
                words = " ".join(random_word(rng) for _ in range(rng.randint(1, 6)))
                size = rng.choice([8.0, 10.0, 12.0, 14.0, 18.0])
                font = rng.choice(["Helvetica", "Helvetica-Bold", "Times-Roman"])
                ops.append(text_op(p, seq, 60 + rng.random() * 40, y, words, size, font))
            elif roll < 0.9:
                ops.append(image_op(p, seq, 60, y - 50, 80 + rng.random() * 100, 50))
                y -= 52
            else:
                ops.append(path_op(p, seq, 60, y, 200, 0.5))
            y -= 16 + rng.random() * 8
        pages.append(Page(p, 612, 792, ops))
    return TaggedDocument(pages=pages)


def random_tree(rng: random.Random, doc: TaggedDocument) -> StructNode:
    """A grammar-valid tree over a random subset of the document's ops."""
    children: list = []
    prev_level = 0
    for page in doc.pages:
        ops = [op.id for op in page.ops if rng.random() < 0.85]
        i = 0
        while i < len(ops):
            chunk = ops[i : i + rng.randint(1, 4)]
            i += len(chunk)
            kind = rng.random()
            if kind < 0.35:
                children.append(StructNode(TagKind.P, list(chunk)))
            elif kind < 0.55:
                level = 1 if prev_level == 0 else rng.randint(1, min(prev_level + 1, 6))
                prev_level = level
                children.append(StructNode(heading_tag(level), list(chunk)))
            elif kind < 0.68:
                node = StructNode(TagKind.FIGURE, list(chunk))
                if rng.random() < 0.7:
                    node.attributes["alt"] = "picture of " + random_word(rng)
                children.append(node)
            elif kind < 0.78:
                children.append(
                    StructNode(
                        TagKind.FORMULA, list(chunk),
                        {"alt": "x equals " + random_word(rng)},
                    )
                )
            elif kind < 0.9:
                rows = []
                for start in range(0, len(chunk), 2):
                    cells = [
                        StructNode(
                            TagKind.TH if rng.random() < 0.3 else TagKind.TD,
                            [c],
                            {"scope": rng.choice(["row", "column"])}
                            if rng.random() < 0.3 else {},
                        )
                        for c in chunk[start : start + 2]
                    ]
                    for cell in cells:
                        if cell.tag == TagKind.TD and "scope" in cell.attributes:
                            del cell.attributes["scope"]
                    rows.append(StructNode(TagKind.TR, cells))
                children.append(StructNode(TagKind.TABLE, rows))
            else:
                items = [
                    StructNode(TagKind.LI, [StructNode(TagKind.LBODY, [c])])
                    for c in chunk
                ]
                children.append(StructNode(TagKind.L, items))
    return StructNode(TagKind.DOCUMENT, children)


def meta(title: str = "A Title", language: str = "en") -> DocMeta:
    return DocMeta(title=title, author="tester", language=language).with_ua_flags()


# -- documents with known truth -----------------------------------------------------

def scored_doc() -> tuple[TaggedDocument, TruthMap, StructNode]:
    """One page with a title, two headings, a table, a list, a figure+caption,
    a formula, and a perfect tree for them."""
    ops: list[ContentOp] = []

    def add_text(text: str, y: float, size: float = 10.0, font: str = "Helvetica") -> OpId:
        op = text_op(0, len(ops), 60, y, text, size, font)
        ops.append(op)
        return op.id

    def add_image(y: float) -> OpId:
        op = image_op(0, len(ops), 60, y, 120, 60)
        ops.append(op)
        return op.id

    title = add_text("The Document Title", 740, 18, "Helvetica-Bold")
    h1 = add_text("1 First Section", 710, 14, "Helvetica-Bold")
    p1a = add_text("first line of paragraph", 690)
    p1b = add_text("second line of paragraph", 676)
    h2 = add_text("1.1 Inner Section", 650, 12, "Helvetica-Bold")
    cells = [
        [add_text("Name", 620, 9, "Helvetica-Bold"), add_text("Value", 620, 9, "Helvetica-Bold")],
        [add_text("alpha", 604, 9), add_text("one", 604, 9)],
    ]
    li1 = add_text("- first item", 570)
    li2 = add_text("- second item", 556)
    fig = add_image(480)
    cap = add_text("Figure 1: a gray box.", 468, 9, "Helvetica-Oblique")
    formula = add_text("x = y + 1", 440, 10, "Helvetica-Oblique")
    ref = add_text("(1)", 440, 10)
    footer = add_text("1", 30, 9)

    doc = TaggedDocument(pages=[Page(0, 612, 792, ops)])
    doc.pages[0].ops[-1].artifact = True  # footer drawn as an artifact

    tree = StructNode(
        TagKind.DOCUMENT,
        [
            StructNode(TagKind.H1, [title]),
            StructNode(TagKind.H2, [h1]),
            StructNode(TagKind.P, [p1a, p1b]),
            StructNode(TagKind.H3, [h2]),
            StructNode(
                TagKind.TABLE,
                [
                    StructNode(TagKind.TR, [
                        StructNode(TagKind.TH, [cells[0][0]], {"scope": "column"}),
                        StructNode(TagKind.TH, [cells[0][1]], {"scope": "column"}),
                    ]),
                    StructNode(TagKind.TR, [
                        StructNode(TagKind.TD, [cells[1][0]]),
                        StructNode(TagKind.TD, [cells[1][1]]),
                    ]),
                ],
            ),
            StructNode(TagKind.L, [
                StructNode(TagKind.LI, [StructNode(TagKind.LBODY, [li1])]),
                StructNode(TagKind.LI, [StructNode(TagKind.LBODY, [li2])]),
            ]),
            StructNode(TagKind.FIGURE, [fig], {"alt": "a gray box"}),
            StructNode(TagKind.CAPTION, [cap]),
            StructNode(TagKind.FORMULA, [formula, ref], {"alt": "x equals y plus 1"}),
        ],
    )

    truth = TruthMap(
        document="synthetic",
        elements=[
            TruthElement("title", "heading", {title}, level=1, is_title=True),
            TruthElement("h1", "heading", {h1}, level=2),
            TruthElement("h2", "heading", {h2}, level=3),
            TruthElement(
                "table", "table", {c for row in cells for c in row},
                grid=[[[c] for c in row] for row in cells], header_mode="first_row",
            ),
            TruthElement("list", "list", {li1, li2}, items=[[li1], [li2]]),
            TruthElement("figure", "figure", {fig}),
            TruthElement("caption", "caption", {cap}, caption_for="figure"),
            TruthElement("formula", "formula", {formula}, optional_ops={ref}),
        ],
        continuity_links=[(p1a, p1b)],
    )
    doc.struct_tree = tree
    return doc, truth, tree
