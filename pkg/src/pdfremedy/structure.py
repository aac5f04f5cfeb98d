"""Heading, table, and list structure rules plus the export-time tag validator.

Heading levels are repaired by leveling up (an H3 after an H1 becomes H2, bare
H becomes H1); tables are assembled from user-drawn separator lines; lists from
horizontal item separators. `validate_tree` is the single grammar gate run
before any export, and `repair_table`/`repair_list` rewrite invalid uploaded
structures into the nearest valid form without losing content.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .model import (
    HEADING_TAGS, ContentOp, OpId, StructChild, StructNode, TagKind,
    heading_level, heading_tag,
)

RAW_H = 0  # an unleveled <H> entry in repair input


class TooManyLevels(ValueError):
    pass


class EmptyGrid(ValueError):
    pass


class EmptyList(ValueError):
    pass


@dataclass
class HeadingOutline:
    """Document-order heading levels; always satisfies the validity rule."""

    entries: list[tuple[str, int]] = field(default_factory=list)

    @property
    def levels(self) -> list[int]:
        return [level for _, level in self.entries]


def outline_is_valid(levels: list[int]) -> bool:
    if not levels:
        return True
    if levels[0] != 1:
        return False
    return all(
        1 <= lv <= 6 and lv <= prev + 1 for prev, lv in zip(levels, levels[1:])
    ) and 1 <= levels[0] <= 6


def repair_headings(raw: list[tuple[str, int]]) -> HeadingOutline:
    """Force a valid outline: H entries become H1, skips are leveled up.

    `raw` is in reading order; a level of RAW_H (0) stands for a bare <H>.
    The first heading is forced to level 1 and every later entry is capped at
    one more than its predecessor, which never moves a level numerically up
    except for that forced first entry.
    """
    entries: list[tuple[str, int]] = []
    prev = 0
    for region_id, level in raw:
        level = 1 if level == RAW_H else level
        if not 1 <= level <= 6:
            raise ValueError(f"heading level out of range: {level}")
        fixed = 1 if not entries else min(level, prev + 1)
        entries.append((region_id, fixed))
        prev = fixed
    return HeadingOutline(entries)


def detect_heading_levels(
    headings: list[tuple[str, float, bool]]
) -> HeadingOutline:
    """Assign levels from font prominence: bigger (then bolder) means higher.

    `headings` is (region_id, font_size, bold) in reading order. Distinct
    (rounded size, bold) keys map to levels 1, 2, ... by size descending with
    bold outranking regular at equal size; the ranked result then goes through
    repair_headings. Headings sharing one font key end up on one level — the
    known failure mode when a document uses a single heading font.
    """
    keys = sorted(
        {(round(size), bold) for _, size, bold in headings},
        key=lambda k: (-k[0], not k[1]),
    )
    if len(keys) > 6:
        raise TooManyLevels(f"{len(keys)} distinct heading fonts, maximum is 6")
    rank = {key: i + 1 for i, key in enumerate(keys)}
    raw = [
        (region_id, rank[(round(size), bold)])
        for region_id, size, bold in headings
    ]
    return repair_headings(raw)


@dataclass
class TableGrid:
    """Separator lines splitting a table region into a full rectangular grid."""

    region_id: str
    h_lines: list[float] = field(default_factory=list)  # y coords, ascending
    v_lines: list[float] = field(default_factory=list)  # x coords, ascending
    header_mode: str = "none"  # none | first_row | first_col | both

    def __post_init__(self) -> None:
        if self.header_mode not in ("none", "first_row", "first_col", "both"):
            raise ValueError(f"bad header_mode: {self.header_mode}")
        for lines, axis in ((self.h_lines, "h"), (self.v_lines, "v")):
            if any(b <= a for a, b in zip(lines, lines[1:])):
                raise ValueError(f"{axis}_lines must be strictly ascending")

    @property
    def n_rows(self) -> int:
        return len(self.h_lines) + 1

    @property
    def n_cols(self) -> int:
        return len(self.v_lines) + 1


def _band_index(lines_asc: list[float], coord: float, descending: bool) -> int:
    # Bands are numbered 0..len(lines); rows count from the top (y descending).
    if descending:
        return len(lines_asc) - bisect_right(lines_asc, coord)
    return bisect_right(lines_asc, coord)


def build_table(grid: TableGrid, region_ops: list[ContentOp]) -> StructNode:
    """Assemble Table -> TR -> TH/TD from the grid; cells own ops by bbox center."""
    if not region_ops:
        raise EmptyGrid(f"table region {grid.region_id} has no content")
    cells: list[list[list[OpId]]] = [
        [[] for _ in range(grid.n_cols)] for _ in range(grid.n_rows)
    ]
    for op in sorted(region_ops, key=lambda o: o.id):
        cx, cy = op.bbox.center
        row = _band_index(grid.h_lines, cy, descending=True)
        col = _band_index(grid.v_lines, cx, descending=False)
        cells[row][col].append(op.id)

    rows: list[StructChild] = []
    for r in range(grid.n_rows):
        row_children: list[StructChild] = []
        for c in range(grid.n_cols):
            in_header_row = grid.header_mode in ("first_row", "both") and r == 0
            in_header_col = grid.header_mode in ("first_col", "both") and c == 0
            if in_header_row or in_header_col:
                # A first-row header describes its column and vice versa; the
                # corner cell in "both" mode gets column scope.
                scope = "column" if in_header_row else "row"
                cell = StructNode(TagKind.TH, list(cells[r][c]), {"scope": scope})
            else:
                cell = StructNode(TagKind.TD, list(cells[r][c]))
            row_children.append(cell)
        rows.append(StructNode(TagKind.TR, row_children))
    return StructNode(TagKind.TABLE, rows)


@dataclass
class ListSpec:
    """Horizontal item separators plus optional item nesting for one region."""

    region_id: str
    item_separators: list[float] = field(default_factory=list)  # y, ascending
    nesting: dict[int, int] = field(default_factory=dict)  # item -> parent item

    def __post_init__(self) -> None:
        seps = self.item_separators
        if any(b <= a for a, b in zip(seps, seps[1:])):
            raise ValueError("item_separators must be strictly ascending")
        for item, parent in self.nesting.items():
            seen = {item}
            node = parent
            while node is not None:
                if node in seen:
                    raise ValueError(f"nesting cycle at item {item}")
                seen.add(node)
                node = self.nesting.get(node)

    @property
    def n_items(self) -> int:
        return len(self.item_separators) + 1


def build_list(spec: ListSpec, region_ops: list[ContentOp]) -> StructNode:
    """Assemble L -> LI -> LBody items, nesting child items inside their parents."""
    if not region_ops:
        raise EmptyList(f"list region {spec.region_id} has no content")
    items: list[list[OpId]] = [[] for _ in range(spec.n_items)]
    for op in sorted(region_ops, key=lambda o: o.id):
        _, cy = op.bbox.center
        items[_band_index(spec.item_separators, cy, descending=True)].append(op.id)

    children_of: dict[int, list[int]] = {}
    for item, parent in spec.nesting.items():
        if not (0 <= item < spec.n_items and 0 <= parent < spec.n_items):
            raise ValueError(f"nesting refers to unknown item: {item}->{parent}")
        children_of.setdefault(parent, []).append(item)

    def make_item(index: int) -> StructNode:
        li_children: list[StructChild] = [
            StructNode(TagKind.LBODY, list(items[index]))
        ]
        nested = sorted(children_of.get(index, []))
        if nested:
            li_children.append(
                StructNode(TagKind.L, [make_item(child) for child in nested])
            )
        return StructNode(TagKind.LI, li_children)

    roots = [i for i in range(spec.n_items) if i not in spec.nesting]
    return StructNode(TagKind.L, [make_item(i) for i in roots])


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    path: str  # child-index path from the root, e.g. "0.2.1"
    message: str

    def __str__(self) -> str:
        return f"{self.code}@{self.path}: {self.message}"


_BLOCK_TAGS = frozenset(
    {TagKind.P, *HEADING_TAGS, TagKind.L, TagKind.TABLE, TagKind.FIGURE,
     TagKind.FORMULA, TagKind.CAPTION}
)
# Captions live only under Document (adjacent to their target) or inside
# Figure/Table/L; a caption inside a table cell belongs to a Figure there.
_CELL_BLOCKS = _BLOCK_TAGS - {TagKind.CAPTION}

# Allowed child tags per container; None entry means content refs are allowed.
_ALLOWED: dict[TagKind, frozenset] = {
    TagKind.DOCUMENT: _BLOCK_TAGS,
    TagKind.P: frozenset({None, TagKind.FIGURE, TagKind.FORMULA}),
    **{h: frozenset({None, TagKind.FIGURE, TagKind.FORMULA}) for h in HEADING_TAGS},
    TagKind.L: frozenset({TagKind.LI, TagKind.CAPTION}),
    TagKind.LI: frozenset({TagKind.LBL, TagKind.LBODY, TagKind.L}),
    TagKind.LBL: frozenset({None}),
    TagKind.LBODY: frozenset({None}) | _CELL_BLOCKS,
    TagKind.TABLE: frozenset({TagKind.TR, TagKind.CAPTION}),
    TagKind.TR: frozenset({TagKind.TH, TagKind.TD}),
    TagKind.TH: frozenset({None}) | _CELL_BLOCKS,
    TagKind.TD: frozenset({None}) | _CELL_BLOCKS,
    TagKind.FIGURE: frozenset({None, TagKind.CAPTION, TagKind.P, TagKind.FORMULA}),
    TagKind.FORMULA: frozenset({None}),
    TagKind.CAPTION: frozenset({None, TagKind.P}),
}


def _node_pages(node: StructNode) -> set[int]:
    return {op_id[0] for op_id in node.leaf_ops()}


def validate_tree(root: StructNode) -> list[Violation]:
    """Check the tag grammar; an empty result means the tree may be exported."""
    violations: list[Violation] = []
    if root.tag != TagKind.DOCUMENT:
        violations.append(
            Violation("BAD_ROOT", "", f"root must be Document, found {root.tag.value}")
        )

    headings: list[tuple[int, str]] = []

    def walk(node: StructNode, path: str) -> None:
        if node.tag == TagKind.ARTIFACT:
            violations.append(
                Violation("ARTIFACT_IN_TREE", path, "Artifact nodes may not be tagged")
            )
            return
        level = heading_level(node.tag)
        if level is not None:
            headings.append((level, path))
        if node.tag in (TagKind.TABLE, TagKind.L):
            pages = _node_pages(node)
            if len(pages) > 1:
                code = "MULTIPAGE_TABLE" if node.tag == TagKind.TABLE else "MULTIPAGE_LIST"
                violations.append(
                    Violation(code, path, f"{node.tag.value} spans pages {sorted(pages)}")
                )
        allowed = _ALLOWED.get(node.tag, frozenset())
        for i, child in enumerate(node.children):
            child_path = f"{path}.{i}" if path else str(i)
            if not isinstance(child, StructNode):
                if None not in allowed:
                    violations.append(
                        Violation(
                            "BAD_NESTING", child_path,
                            f"content not allowed directly under {node.tag.value}",
                        )
                    )
                continue
            if child.tag == TagKind.DOCUMENT:
                violations.append(
                    Violation("BAD_NESTING", child_path, "nested Document")
                )
                continue
            if child.tag == TagKind.CAPTION and child.tag in allowed:
                if node.tag not in (TagKind.FIGURE, TagKind.TABLE, TagKind.L):
                    # Caption floating in a container must sit next to its target.
                    neighbors = [
                        c for c in (node.children[i - 1 : i] + node.children[i + 1 : i + 2])
                        if isinstance(c, StructNode)
                    ]
                    if not any(
                        c.tag in (TagKind.FIGURE, TagKind.TABLE) for c in neighbors
                    ):
                        violations.append(
                            Violation(
                                "CAPTION_PLACEMENT", child_path,
                                "Caption must be inside or adjacent to a Figure/Table",
                            )
                        )
            elif child.tag not in allowed and child.tag != TagKind.ARTIFACT:
                violations.append(
                    Violation(
                        "BAD_NESTING", child_path,
                        f"{child.tag.value} not allowed under {node.tag.value}",
                    )
                )
            walk(child, child_path)

    walk(root, "")

    prev = 0
    for level, path in headings:
        if prev == 0 and level != 1:
            violations.append(
                Violation("HEADING_START", path, f"first heading is H{level}, not H1")
            )
        elif level > prev + 1 and prev != 0:
            violations.append(
                Violation(
                    "HEADING_SKIP", path, f"H{prev} followed by H{level} skips a level"
                )
            )
        prev = level
    return violations


# -- structural repair --------------------------------------------------------

_UNWRAP_TAGS = frozenset(
    {TagKind.TR, TagKind.TH, TagKind.TD, TagKind.LI, TagKind.LBL,
     TagKind.LBODY, TagKind.DOCUMENT, TagKind.ARTIFACT}
)


def _sanitize_blocks(children: list[StructChild]) -> list[StructChild]:
    """Rewrite arbitrary children into grammar-valid block content.

    Content refs pass through; Table/L subtrees get their own repair; tags that
    only make sense inside a table or list (TR, LI, ...) are unwrapped so their
    content survives in place.
    """
    out: list[StructChild] = []
    for child in children:
        if not isinstance(child, StructNode):
            out.append(child)
        elif child.tag == TagKind.TABLE:
            out.append(repair_table(child))
        elif child.tag == TagKind.L:
            out.append(repair_list(child))
        elif child.tag in _UNWRAP_TAGS:
            out.extend(_sanitize_blocks(child.children))
        else:
            out.append(_sanitize_leaf_block(child))
    return out


def _sanitize_into(tag: TagKind, children: list[StructChild]) -> list[StructChild]:
    """Sanitized children additionally filtered to what `tag` may contain."""
    allowed = _ALLOWED[tag]
    out: list[StructChild] = []
    for child in _sanitize_blocks(children):
        if not isinstance(child, StructNode) or child.tag in allowed:
            out.append(child)
        else:
            # Not valid here: keep the content, drop the wrapper.
            out.extend(child.leaf_ops())
    return out


def _sanitize_leaf_block(node: StructNode) -> StructNode:
    return StructNode(node.tag, _sanitize_into(node.tag, node.children),
                      dict(node.attributes))


def repair_table(table: StructNode) -> StructNode:
    """Rebuild an invalid Table subtree into Caption? + TR(TH/TD) rows.

    Content references are preserved as a set; stray cells are grouped into
    rows and stray content is wrapped into a TD in encounter order.
    """
    if table.tag != TagKind.TABLE:
        raise ValueError(f"repair_table expects a Table root, got {table.tag.value}")
    new_children: list[StructChild] = []
    pending_cells: list[StructNode] = []
    pending_stray: list[StructChild] = []

    def flush_stray() -> None:
        if pending_stray:
            pending_cells.append(StructNode(TagKind.TD, _sanitize_into(TagKind.TD, pending_stray)))
            pending_stray.clear()

    def flush_row() -> None:
        flush_stray()
        if pending_cells:
            new_children.append(StructNode(TagKind.TR, list(pending_cells)))
            pending_cells.clear()

    for i, child in enumerate(table.children):
        if isinstance(child, StructNode) and child.tag == TagKind.CAPTION and i == 0:
            new_children.append(_sanitize_leaf_block(child))
        elif isinstance(child, StructNode) and child.tag == TagKind.TR:
            flush_row()
            new_children.append(_repair_row(child))
        elif isinstance(child, StructNode) and child.tag in (TagKind.TH, TagKind.TD):
            flush_stray()
            pending_cells.append(
                StructNode(child.tag, _sanitize_into(child.tag, child.children),
                           dict(child.attributes))
            )
        else:
            pending_stray.append(child)
    flush_row()
    if not any(isinstance(c, StructNode) and c.tag == TagKind.TR for c in new_children):
        new_children.append(StructNode(TagKind.TR, [StructNode(TagKind.TD, [])]))
    return StructNode(TagKind.TABLE, new_children, dict(table.attributes))


def _repair_row(row: StructNode) -> StructNode:
    cells: list[StructChild] = []
    stray: list[StructChild] = []
    for child in row.children:
        if isinstance(child, StructNode) and child.tag in (TagKind.TH, TagKind.TD):
            if stray:
                cells.append(StructNode(TagKind.TD, _sanitize_into(TagKind.TD, stray)))
                stray = []
            cells.append(
                StructNode(child.tag, _sanitize_into(child.tag, child.children),
                           dict(child.attributes))
            )
        else:
            stray.append(child)
    if stray:
        cells.append(StructNode(TagKind.TD, _sanitize_into(TagKind.TD, stray)))
    return StructNode(TagKind.TR, cells, dict(row.attributes))


def repair_list(lst: StructNode) -> StructNode:
    """Rebuild an invalid L subtree into Caption? + LI(Lbl?/LBody/L) items."""
    if lst.tag != TagKind.L:
        raise ValueError(f"repair_list expects an L root, got {lst.tag.value}")
    new_children: list[StructChild] = []
    stray: list[StructChild] = []

    def flush_stray() -> None:
        if stray:
            body = StructNode(TagKind.LBODY, _sanitize_into(TagKind.LBODY, stray))
            new_children.append(StructNode(TagKind.LI, [body]))
            stray.clear()

    for i, child in enumerate(lst.children):
        if isinstance(child, StructNode) and child.tag == TagKind.CAPTION and i == 0:
            new_children.append(_sanitize_leaf_block(child))
        elif isinstance(child, StructNode) and child.tag == TagKind.LI:
            flush_stray()
            new_children.append(_repair_item(child))
        elif isinstance(child, StructNode) and child.tag == TagKind.L:
            flush_stray()
            nested = repair_list(child)
            # A nested list belongs inside the preceding item.
            prev = new_children[-1] if new_children else None
            if isinstance(prev, StructNode) and prev.tag == TagKind.LI:
                prev.children.append(nested)
            else:
                new_children.append(StructNode(TagKind.LI, [nested]))
        else:
            stray.append(child)
    flush_stray()
    if not any(isinstance(c, StructNode) and c.tag == TagKind.LI for c in new_children):
        new_children.append(
            StructNode(TagKind.LI, [StructNode(TagKind.LBODY, [])])
        )
    return StructNode(TagKind.L, new_children, dict(lst.attributes))


def _repair_item(item: StructNode) -> StructNode:
    parts: list[StructChild] = []
    body_content: list[StructChild] = []
    for child in item.children:
        if isinstance(child, StructNode) and child.tag == TagKind.LBL:
            parts.append(
                StructNode(TagKind.LBL, _flatten_to_refs(child.children))
            )
        elif isinstance(child, StructNode) and child.tag == TagKind.LBODY:
            body_content.extend(_sanitize_into(TagKind.LBODY, child.children))
        elif isinstance(child, StructNode) and child.tag == TagKind.L:
            parts.append(repair_list(child))
        else:
            body_content.extend(_sanitize_into(TagKind.LBODY, [child]))
    body = StructNode(TagKind.LBODY, body_content)
    # Keep the Lbl (if any) first, then the body, then nested lists.
    labels = [p for p in parts if isinstance(p, StructNode) and p.tag == TagKind.LBL]
    nested = [p for p in parts if isinstance(p, StructNode) and p.tag == TagKind.L]
    return StructNode(TagKind.LI, [*labels[:1], body, *labels[1:], *nested], dict(item.attributes))


def _flatten_to_refs(children: list[StructChild]) -> list[StructChild]:
    out: list[StructChild] = []
    for child in children:
        if isinstance(child, StructNode):
            out.extend(child.leaf_ops())
        else:
            out.append(child)
    return out


def repair_headings_in_tree(root: StructNode) -> StructNode:
    """Rewrite heading tags in document order so the outline becomes valid."""
    nodes = [n for n in root.iter_nodes() if heading_level(n.tag) is not None]
    raw = [(str(i), heading_level(n.tag) or 1) for i, n in enumerate(nodes)]
    repaired = repair_headings(raw)
    for node, (_, level) in zip(nodes, repaired.entries):
        node.tag = heading_tag(level)
    return root
