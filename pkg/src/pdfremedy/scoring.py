"""Tag-accuracy scoring: thirteen criteria, each CT/(CT+WT) * 100%.

A TruthMap is the mechanized ground truth: criterion-relevant elements with
their op sets, heading levels in a title-first scheme, table grids, list item
partitions, alt-text requirements, and sentence-continuity links for the
reading order. Scores count one CT or WT per truth element (documents for All
Content Tagged, pages for Reading Order); corpus scores pool the counts
before dividing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .model import (
    HEADING_TAGS, OpId, StructNode, TagKind, TaggedDocument, op_id_from_str,
)

JACCARD_MATCH = 0.5  # minimum op-set overlap for node <-> element matching

CRITERIA = [
    ("all_content_tagged", "All Content Tagged"),
    ("reading_order", "Reading Order"),
    ("headings_tagged", "Headings Tagged"),
    ("headings_level", "+ Level"),
    ("tables_tagged", "Tables Tagged"),
    ("tables_structure", "+ Structure"),
    ("lists_tagged", "Lists Tagged"),
    ("lists_structure", "+ Structure"),
    ("figures_tagged", "Figures Tagged"),
    ("figures_alt", "+ Alt Text"),
    ("formulas_tagged", "Formulas Tagged"),
    ("formulas_alt", "+ Alt Text"),
    ("captions", "Captions Tagged"),
]

CRITERION_KEYS = [key for key, _ in CRITERIA]
DISPLAY_NAMES = dict(CRITERIA)


class TruthMismatch(ValueError):
    pass


@dataclass
class TruthElement:
    id: str
    role: str  # heading | table | list | figure | formula | caption
    ops: set[OpId]
    level: int | None = None       # headings: level in the title-first scheme
    is_title: bool = False
    requires_alt: bool = True
    optional_ops: set[OpId] = field(default_factory=set)  # e.g. formula ref number
    caption_for: str | None = None  # captions: id of the captioned element
    grid: list[list[list[OpId]]] | None = None  # tables: rows -> cells -> ops
    header_mode: str = "none"
    items: list[list[OpId]] | None = None  # lists: item partition in order


@dataclass
class TruthMap:
    document: str = ""
    elements: list[TruthElement] = field(default_factory=list)
    continuity_links: list[tuple[OpId, OpId]] = field(default_factory=list)

    def by_role(self, role: str) -> list[TruthElement]:
        return [el for el in self.elements if el.role == role]

    def element(self, element_id: str) -> TruthElement | None:
        for el in self.elements:
            if el.id == element_id:
                return el
        return None

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "TruthMap":
        if data.get("version") != 1:
            raise TruthMismatch(f"unsupported truth version {data.get('version')!r}")
        elements = []
        for raw in data.get("elements", []):
            elements.append(
                TruthElement(
                    id=raw["id"],
                    role=raw["role"],
                    ops={op_id_from_str(s) for s in raw.get("ops", [])},
                    level=raw.get("level"),
                    is_title=bool(raw.get("is_title", False)),
                    requires_alt=bool(raw.get("requires_alt", True)),
                    optional_ops={
                        op_id_from_str(s) for s in raw.get("optional_ops", [])
                    },
                    caption_for=raw.get("caption_for"),
                    grid=[
                        [[op_id_from_str(s) for s in cell] for cell in row]
                        for row in raw["grid"]
                    ] if raw.get("grid") is not None else None,
                    header_mode=raw.get("header_mode", "none"),
                    items=[
                        [op_id_from_str(s) for s in item] for item in raw["items"]
                    ] if raw.get("items") is not None else None,
                )
            )
        links = [
            (op_id_from_str(a), op_id_from_str(b))
            for a, b in data.get("continuity_links", [])
        ]
        return cls(
            document=data.get("document", ""), elements=elements,
            continuity_links=links,
        )

    @classmethod
    def load(cls, path: str | Path) -> "TruthMap":
        return cls.from_json(json.loads(Path(path).read_text()))

    def to_json(self) -> dict[str, Any]:
        from .model import op_id_str

        elements = []
        for el in self.elements:
            raw: dict[str, Any] = {
                "id": el.id,
                "role": el.role,
                "ops": sorted(op_id_str(op) for op in el.ops),
            }
            if el.level is not None:
                raw["level"] = el.level
            if el.is_title:
                raw["is_title"] = True
            if not el.requires_alt:
                raw["requires_alt"] = False
            if el.optional_ops:
                raw["optional_ops"] = sorted(op_id_str(op) for op in el.optional_ops)
            if el.caption_for is not None:
                raw["caption_for"] = el.caption_for
            if el.grid is not None:
                raw["grid"] = [
                    [sorted(op_id_str(op) for op in cell) for cell in row]
                    for row in el.grid
                ]
                raw["header_mode"] = el.header_mode
            if el.items is not None:
                raw["items"] = [
                    sorted(op_id_str(op) for op in item) for item in el.items
                ]
            elements.append(raw)
        return {
            "version": 1,
            "document": self.document,
            "elements": elements,
            "continuity_links": [
                [op_id_str(a), op_id_str(b)] for a, b in self.continuity_links
            ],
        }


@dataclass
class CriterionResult:
    criterion: str
    ct: int = 0
    wt: int = 0

    @property
    def total(self) -> int:
        return self.ct + self.wt

    @property
    def score(self) -> float | None:
        if self.total == 0:
            return None
        return 100.0 * self.ct / self.total


@dataclass
class ScoreReport:
    name: str = ""
    rows: dict[str, CriterionResult] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key in CRITERION_KEYS:
            self.rows.setdefault(key, CriterionResult(key))

    @property
    def average(self) -> float | None:
        defined = [r.score for r in self.rows.values() if r.score is not None]
        if not defined:
            return None
        return sum(defined) / len(defined)

    def row(self, key: str) -> CriterionResult:
        return self.rows[key]


# -- structure-tree digest ------------------------------------------------------

@dataclass
class _TreeFacts:
    nodes_by_tag: dict[TagKind, list[tuple[StructNode, set[OpId]]]]
    tagged_ops: set[OpId]
    flat_order: list[OpId]

    @classmethod
    def from_tree(cls, tree: StructNode | None) -> "_TreeFacts":
        nodes_by_tag: dict[TagKind, list[tuple[StructNode, set[OpId]]]] = {}
        tagged: set[OpId] = set()
        flat: list[OpId] = []
        if tree is not None:
            flat = tree.leaf_ops()
            tagged = set(flat)
            for node in tree.iter_nodes():
                nodes_by_tag.setdefault(node.tag, []).append(
                    (node, set(node.leaf_ops()))
                )
        return cls(nodes_by_tag=nodes_by_tag, tagged_ops=tagged, flat_order=flat)

    def candidates(self, tags: Iterable[TagKind]) -> list[tuple[StructNode, set[OpId]]]:
        out: list[tuple[StructNode, set[OpId]]] = []
        for tag in tags:
            out.extend(self.nodes_by_tag.get(tag, []))
        return out


def _jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def _best_match(
    element_ops: set[OpId], candidates: list[tuple[StructNode, set[OpId]]]
) -> tuple[StructNode, set[OpId]] | None:
    best = None
    best_j = 0.0
    for node, ops in candidates:
        j = _jaccard(element_ops, ops)
        if j > best_j:
            best, best_j = (node, ops), j
    if best is not None and best_j >= JACCARD_MATCH:
        return best
    return None


def _covered(
    element: TruthElement,
    facts: _TreeFacts,
    tags: tuple[TagKind, ...],
    allowed_extra: set[OpId],
) -> tuple[StructNode, set[OpId]] | None:
    """Matched node when the element is properly inside one `tags` node.

    Proper means: every element op is in the node, and the node contains
    nothing beyond the element plus `allowed_extra` ops.
    """
    match = _best_match(element.ops, facts.candidates(tags))
    if match is None:
        return None
    node, ops = match
    if not element.ops <= ops:
        return None
    if ops - element.ops - allowed_extra:
        return None
    return match


def _caption_ops_for(truth: TruthMap, element_id: str) -> set[OpId]:
    out: set[OpId] = set()
    for el in truth.by_role("caption"):
        if el.caption_for == element_id:
            out |= el.ops
    return out


def _check_truth(doc: TaggedDocument, truth: TruthMap) -> None:
    known = set(doc.all_op_ids())
    seen: set[OpId] = set()
    for el in truth.elements:
        unknown = (el.ops | el.optional_ops) - known
        if unknown:
            raise TruthMismatch(
                f"truth element {el.id} references unknown ops {sorted(unknown)[:3]}"
            )
        overlap = el.ops & seen
        if overlap:
            raise TruthMismatch(
                f"truth element {el.id} overlaps another element: {sorted(overlap)[:3]}"
            )
        seen |= el.ops
    for a, b in truth.continuity_links:
        if a not in known or b not in known:
            raise TruthMismatch(f"continuity link ({a}, {b}) references unknown ops")


# -- the thirteen criteria ---------------------------------------------------------

def score_document(doc: TaggedDocument, truth: TruthMap, name: str = "") -> ScoreReport:
    """Evaluate all thirteen criteria for one document against its truth."""
    _check_truth(doc, truth)
    facts = _TreeFacts.from_tree(doc.struct_tree)
    report = ScoreReport(name=name or truth.document)

    artifact_ops = {
        op.id for page in doc.pages for op in page.ops if op.artifact
    }
    accounted = facts.tagged_ops | artifact_ops

    # All Content Tagged: one count for the whole document.
    all_ops = set(doc.all_op_ids())
    if all_ops <= accounted:
        report.row("all_content_tagged").ct += 1
    else:
        report.row("all_content_tagged").wt += 1

    # Reading Order: one count per page; a page passes when it is completely
    # tagged and no sentence-continuity link starting on it is interrupted.
    position = {op: i for i, op in enumerate(facts.flat_order)}
    for page in doc.pages:
        page_ops = {op.id for op in page.ops}
        complete = page_ops <= accounted
        intact = True
        for a, b in truth.continuity_links:
            if a[0] != page.index:
                continue
            if a not in position or b not in position or position[b] != position[a] + 1:
                intact = False
                break
        if complete and intact:
            report.row("reading_order").ct += 1
        else:
            report.row("reading_order").wt += 1

    heading_nodes = facts.candidates(HEADING_TAGS)
    title_mode = _title_mode(truth, facts)
    for el in truth.by_role("heading"):
        tags: tuple[TagKind, ...] = HEADING_TAGS
        if el.is_title:
            tags = HEADING_TAGS + (TagKind.P,)
        match = _covered(el, facts, tags, allowed_extra=set())
        ok = match is not None
        _count(report, "headings_tagged", ok)
        _count(report, "headings_level", ok and _level_ok(el, match, title_mode))

    for el in truth.by_role("table"):
        extra = _caption_ops_for(truth, el.id)
        match = _covered(el, facts, (TagKind.TABLE,), allowed_extra=extra)
        ok = match is not None
        _count(report, "tables_tagged", ok)
        _count(
            report, "tables_structure",
            ok and el.grid is not None and _grid_ok(el, match[0]),
        )

    for el in truth.by_role("list"):
        extra = _caption_ops_for(truth, el.id)
        match = _covered(el, facts, (TagKind.L,), allowed_extra=extra)
        ok = match is not None
        _count(report, "lists_tagged", ok)
        _count(
            report, "lists_structure",
            ok and el.items is not None and _items_ok(el, match[0]),
        )

    for el in truth.by_role("figure"):
        extra = _caption_ops_for(truth, el.id)
        match = _covered(el, facts, (TagKind.FIGURE,), allowed_extra=extra)
        ok = match is not None
        _count(report, "figures_tagged", ok)
        has_alt = ok and bool(match[0].alt_text)
        _count(report, "figures_alt", ok and (has_alt or not el.requires_alt))

    for el in truth.by_role("formula"):
        match = _covered(el, facts, (TagKind.FORMULA,), allowed_extra=el.optional_ops)
        ok = match is not None
        _count(report, "formulas_tagged", ok)
        has_alt = ok and bool(match[0].alt_text)
        _count(report, "formulas_alt", ok and (has_alt or not el.requires_alt))

    for el in truth.by_role("caption"):
        match = _covered(el, facts, (TagKind.CAPTION,), allowed_extra=set())
        _count(report, "captions", match is not None)

    return report


def _count(report: ScoreReport, key: str, correct: bool) -> None:
    if correct:
        report.row(key).ct += 1
    else:
        report.row(key).wt += 1


def _title_mode(truth: TruthMap, facts: _TreeFacts) -> str:
    """'h1' when the title is tagged as a heading, 'p' when as a paragraph."""
    title = next((el for el in truth.by_role("heading") if el.is_title), None)
    if title is None:
        return "h1"
    match = _best_match(title.ops, facts.candidates(HEADING_TAGS + (TagKind.P,)))
    if match is not None and match[0].tag == TagKind.P:
        return "p"
    return "h1"


def _level_ok(
    el: TruthElement, match: tuple[StructNode, set[OpId]] | None, title_mode: str
) -> bool:
    if match is None or el.level is None:
        return False
    node = match[0]
    if el.is_title:
        # The document title may be a paragraph or an H1.
        return node.tag == TagKind.P or node.tag == TagKind.H1
    actual = HEADING_TAGS.index(node.tag) + 1 if node.tag in HEADING_TAGS else None
    if actual is None:
        return False
    expected = el.level if title_mode == "h1" else el.level - 1
    return actual == expected


def _table_matrix(table: StructNode) -> list[list[tuple[bool, frozenset[OpId]]]]:
    rows = []
    for child in table.children:
        if isinstance(child, StructNode) and child.tag == TagKind.TR:
            cells = []
            for cell in child.children:
                if isinstance(cell, StructNode) and cell.tag in (TagKind.TH, TagKind.TD):
                    cells.append(
                        (cell.tag == TagKind.TH, frozenset(cell.leaf_ops()))
                    )
            rows.append(cells)
    return rows


def _grid_ok(el: TruthElement, table: StructNode) -> bool:
    """TR/TH/TD agreement: same rows, same non-empty cell contents, same headers."""
    assert el.grid is not None
    actual = _table_matrix(table)
    if len(actual) != len(el.grid):
        return False
    for r, (actual_row, truth_row) in enumerate(zip(actual, el.grid)):
        expected_cells = []
        for c, cell_ops in enumerate(truth_row):
            header = (el.header_mode in ("first_row", "both") and r == 0) or (
                el.header_mode in ("first_col", "both") and c == 0
            )
            if cell_ops:
                expected_cells.append((header, frozenset(cell_ops)))
        got_cells = [(h, ops) for h, ops in actual_row if ops]
        if got_cells != expected_cells:
            return False
    return True


def _list_items(lst: StructNode) -> list[frozenset[OpId]]:
    items: list[frozenset[OpId]] = []

    def walk(node: StructNode) -> None:
        for child in node.children:
            if not isinstance(child, StructNode):
                continue
            if child.tag == TagKind.LI:
                direct: set[OpId] = set()
                for part in child.children:
                    if isinstance(part, StructNode) and part.tag == TagKind.L:
                        continue
                    if isinstance(part, StructNode):
                        direct |= set(part.leaf_ops())
                    else:
                        direct.add(part)
                items.append(frozenset(direct))
                for part in child.children:
                    if isinstance(part, StructNode) and part.tag == TagKind.L:
                        walk(part)
            elif child.tag == TagKind.L:
                walk(child)

    walk(lst)
    return items


def _items_ok(el: TruthElement, lst: StructNode) -> bool:
    assert el.items is not None
    actual = _list_items(lst)
    expected = [frozenset(item) for item in el.items]
    return actual == expected


def score_corpus(
    pairs: list[tuple[TaggedDocument, TruthMap]], name: str = ""
) -> ScoreReport:
    """Pool CT/WT across documents per criterion, then divide."""
    if not pairs:
        raise ValueError("score_corpus needs at least one (document, truth) pair")
    pooled = ScoreReport(name=name)
    for doc, truth in pairs:
        single = score_document(doc, truth)
        for key in CRITERION_KEYS:
            pooled.row(key).ct += single.row(key).ct
            pooled.row(key).wt += single.row(key).wt
    return pooled


# -- report formatting ------------------------------------------------------------

def _fmt_cell(result: CriterionResult) -> str:
    if result.score is None:
        return "-"
    return f"{result.score:.1f} ({result.total})"


def format_table(reports: list[ScoreReport]) -> str:
    """Aligned text table: thirteen criterion rows plus the average."""
    headers = ["Criteria"] + [r.name or f"doc{i}" for i, r in enumerate(reports)]
    lines = [headers]
    for key, label in CRITERIA:
        lines.append([label] + [_fmt_cell(r.row(key)) for r in reports])
    lines.append(
        ["Average Score"]
        + [f"{r.average:.1f}" if r.average is not None else "-" for r in reports]
    )
    widths = [max(len(row[i]) for row in lines) for i in range(len(headers))]
    out = []
    for i, row in enumerate(lines):
        out.append(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        )
        if i == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out)


def format_csv(reports: list[ScoreReport]) -> str:
    """Deterministic CSV: criterion,<name> score,<name> total per report."""
    cols = ["criterion"]
    for r in reports:
        label = r.name or "doc"
        cols += [f"{label} score", f"{label} total"]
    rows = [",".join(cols)]
    for key, label in CRITERIA:
        cells = [label]
        for r in reports:
            res = r.row(key)
            cells.append("" if res.score is None else f"{res.score:.1f}")
            cells.append(str(res.total))
        rows.append(",".join(cells))
    avg = ["Average Score"]
    for r in reports:
        avg.append("" if r.average is None else f"{r.average:.1f}")
        avg.append("")
    rows.append(",".join(avg))
    return "\n".join(rows) + "\n"
