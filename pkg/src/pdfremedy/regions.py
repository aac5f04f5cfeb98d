"""Typed page regions, operator assignment, and per-page reading order.

Regions own content operators; every op on a page is in at most one region
(the partition invariant). Ops in no region are either untagged or parked in
the artifact pool — both are exported as artifacts, but only untagged content
is offered for re-tagging prompts. Reading orders are permutations of each
page's non-artifact regions and survive every region edit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .geometry import Rect, rect_union, segment_entry_param
from .model import ContentOp, OpId, Page

# Two overlap ratios within 5% of each other count as "similar"; the proposal
# score breaks the tie.
SIMILAR_OVERLAP_BAND = 0.05


class RegionType(str, Enum):
    PARAGRAPH = "paragraph"
    HEADING = "heading"
    LIST = "list"
    FORMULA = "formula"
    FIGURE = "figure"
    CAPTION = "caption"
    ARTIFACT = "artifact"
    TABLE = "table"


class UnknownRegion(LookupError):
    pass


class IndexOutOfRange(IndexError):
    pass


class OpsAlreadyTagged(ValueError):
    pass


@dataclass
class Region:
    id: str
    page: int
    bbox: Rect
    rtype: RegionType
    ops: set[OpId] = field(default_factory=set)
    detector_score: float | None = None


@dataclass
class ReadingOrder:
    page: int
    sequence: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Polyline:
    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("polyline needs at least two points")
        for a, b in zip(self.points, self.points[1:]):
            if a == b:
                raise ValueError("consecutive polyline points must be distinct")


def overlap_ratio(op_bbox: Rect, region_bbox: Rect) -> float:
    """Overlap normalized by the op's own area, so small ops assign cleanly."""
    if op_bbox.area == 0.0:
        cx, cy = op_bbox.center
        return 1.0 if region_bbox.contains_point(cx, cy) else 0.0
    return op_bbox.intersection_area(region_bbox) / op_bbox.area


def choose_region(
    op: ContentOp, proposals: list[tuple[Rect, RegionType, float]]
) -> int | None:
    """Index of the winning proposal for one op, or None for the artifact pool.

    The op goes to the proposal with the highest overlap ratio; when two
    ratios are within a relative 5% band the higher detector score wins, and
    remaining ties go to the earlier proposal. Zero overlap everywhere means
    the op is left to the artifact pool.
    """
    ratios = [overlap_ratio(op.bbox, bbox) for bbox, _, _ in proposals]
    best = max(ratios, default=0.0)
    if best <= 0.0:
        return None
    candidates = [
        i for i, r in enumerate(ratios) if (best - r) / best < SIMILAR_OVERLAP_BAND
    ]
    return max(candidates, key=lambda i: (proposals[i][2], -i))


def assign_ops(
    page: Page,
    proposals: list[tuple[Rect, RegionType, float]],
    id_prefix: str = "r",
) -> tuple[list[Region], set[OpId]]:
    """Partition a page's ops over the proposed regions.

    Returns the realized regions (proposals that won at least one op, their
    bboxes grown to contain their members) and the artifact-pool op ids.
    """
    members: dict[int, list[ContentOp]] = {}
    artifacts: set[OpId] = set()
    for op in page.ops:
        winner = choose_region(op, proposals)
        if winner is None:
            artifacts.add(op.id)
        else:
            members.setdefault(winner, []).append(op)

    regions: list[Region] = []
    for i, (bbox, rtype, score) in enumerate(proposals):
        ops = members.get(i)
        if not ops:
            continue
        grown = rect_union([bbox] + [op.bbox for op in ops])
        regions.append(
            Region(
                id=f"{id_prefix}{page.index}-{i}",
                page=page.index,
                bbox=grown,
                rtype=rtype,
                ops={op.id for op in ops},
                detector_score=score,
            )
        )
    return regions, artifacts


def draw_reading_order(
    page_regions: list[Region], polyline: Polyline, previous: list[str]
) -> ReadingOrder:
    """Order regions by the polyline's first touch; untouched ones keep rank.

    Each region's hit parameter is the earliest point along the polyline
    (segment index plus in-segment parameter) where the line touches the
    region bbox. Regions the line never crosses are appended after the hits,
    preserving their relative order in `previous`.
    """
    if not page_regions:
        return ReadingOrder(page=-1, sequence=[])
    page = page_regions[0].page
    prev_rank = {rid: i for i, rid in enumerate(previous)}

    hits: list[tuple[float, int, str]] = []
    misses: list[tuple[int, str]] = []
    for region in page_regions:
        if region.rtype == RegionType.ARTIFACT:
            continue
        param: float | None = None
        for seg, (p0, p1) in enumerate(zip(polyline.points, polyline.points[1:])):
            t = segment_entry_param(p0, p1, region.bbox)
            if t is not None:
                param = seg + t
                break
        rank = prev_rank.get(region.id, len(prev_rank))
        if param is None:
            misses.append((rank, region.id))
        else:
            hits.append((param, rank, region.id))
    hits.sort()
    misses.sort()
    return ReadingOrder(
        page=page, sequence=[rid for _, _, rid in hits] + [rid for _, rid in misses]
    )


class RegionSet:
    """All regions, artifact ops, and reading orders for one document."""

    def __init__(self, page_count: int):
        self.page_count = page_count
        self.regions: dict[str, Region] = {}
        self.artifact_ops: set[OpId] = set()
        self.orders: dict[int, list[str]] = {i: [] for i in range(page_count)}
        self._counter = 0

    # -- queries --------------------------------------------------------------

    def region(self, region_id: str) -> Region:
        try:
            return self.regions[region_id]
        except KeyError:
            raise UnknownRegion(region_id) from None

    def page_regions(self, page: int) -> list[Region]:
        return [r for r in self.regions.values() if r.page == page]

    def owned_ops(self, page: int) -> set[OpId]:
        return {
            op for r in self.regions.values() if r.page == page for op in r.ops
        }

    def untagged_ops(self, page: Page) -> list[OpId]:
        owned = self.owned_ops(page.index)
        return [
            op.id for op in page.ops
            if op.id not in owned and op.id not in self.artifact_ops
        ]

    def reading_order(self, page: int) -> ReadingOrder:
        return ReadingOrder(page=page, sequence=list(self.orders[page]))

    def check_invariants(self) -> None:
        seen: set[OpId] = set()
        for region in self.regions.values():
            overlap = seen & region.ops
            if overlap:
                raise AssertionError(f"ops in two regions: {sorted(overlap)[:3]}")
            seen |= region.ops
            stray = region.ops & self.artifact_ops
            if stray:
                raise AssertionError(f"region ops in artifact pool: {sorted(stray)[:3]}")
        for page, sequence in self.orders.items():
            expected = {
                r.id for r in self.page_regions(page) if r.rtype != RegionType.ARTIFACT
            }
            if set(sequence) != expected or len(sequence) != len(expected):
                raise AssertionError(f"page {page} order is not a permutation")

    # -- step 1: region edits ---------------------------------------------------

    def detect(
        self, page: Page, proposals: list[tuple[Rect, RegionType, float]]
    ) -> list[Region]:
        """Replace this page's regions with fresh assignments from `proposals`."""
        for rid in [r.id for r in self.page_regions(page.index)]:
            del self.regions[rid]
        self.artifact_ops -= {op.id for op in page.ops}
        regions, artifacts = assign_ops(
            page, proposals, id_prefix=f"r{self._counter}-"
        )
        self._counter += 1
        for region in regions:
            self.regions[region.id] = region
        self.artifact_ops |= artifacts
        self.orders[page.index] = [
            r.id
            for r in sorted(
                (r for r in regions if r.rtype != RegionType.ARTIFACT),
                key=lambda r: min(r.ops),
            )
        ]
        self.check_invariants()
        return regions

    def create_region_from_selection(
        self, doc_ops: dict[OpId, ContentOp], op_ids: list[OpId],
        rtype: RegionType = RegionType.PARAGRAPH,
    ) -> Region:
        if not op_ids:
            raise ValueError("selection is empty")
        pages = {op_id[0] for op_id in op_ids}
        if len(pages) != 1:
            raise ValueError("selection spans multiple pages")
        page = pages.pop()
        owned = self.owned_ops(page)
        already = [op for op in op_ids if op in owned]
        if already:
            raise OpsAlreadyTagged(f"ops already in a region: {already[:3]}")
        ops = [doc_ops[op_id] for op_id in op_ids]
        region = Region(
            id=f"r{self._counter}-{page}-0",
            page=page,
            bbox=rect_union([op.bbox for op in ops]),
            rtype=rtype,
            ops=set(op_ids),
        )
        self._counter += 1
        self.regions[region.id] = region
        self.artifact_ops -= region.ops
        if rtype != RegionType.ARTIFACT:
            self.orders[page].append(region.id)
        self.check_invariants()
        return region

    def delete_regions(self, region_ids: list[str]) -> None:
        """Delete regions; their ops go back to untagged (not artifact)."""
        for rid in region_ids:
            self.region(rid)
        for rid in region_ids:
            region = self.regions.pop(rid)
            self.orders[region.page] = [
                r for r in self.orders[region.page] if r != rid
            ]
        self.check_invariants()

    def resize_region(self, region_id: str, new_bbox: Rect, page: Page) -> Region:
        """Re-run the assignment rule against the new bbox.

        Members with no overlap left fall back to untagged; untagged ops that
        now overlap join. Ops owned by other regions are never captured.
        """
        region = self.region(region_id)
        candidates = set(region.ops) | set(self.untagged_ops(page))
        kept: set[OpId] = set()
        for op_id in candidates:
            op = page.ops[op_id[1]]
            if overlap_ratio(op.bbox, new_bbox) > 0.0:
                kept.add(op_id)
        region.ops = kept
        boxes = [new_bbox] + [page.ops[s].bbox for (_, s) in kept]
        region.bbox = rect_union(boxes)
        self.check_invariants()
        return region

    def set_region_type(self, region_id: str, rtype: RegionType) -> Region:
        region = self.region(region_id)
        was_artifact = region.rtype == RegionType.ARTIFACT
        region.rtype = rtype
        order = self.orders[region.page]
        if rtype == RegionType.ARTIFACT and region_id in order:
            order.remove(region_id)
        elif was_artifact and rtype != RegionType.ARTIFACT:
            order.append(region_id)
        self.check_invariants()
        return region

    # -- step 2: reading order ---------------------------------------------------

    def draw_reading_order(self, page: int, polyline: Polyline) -> ReadingOrder:
        order = draw_reading_order(
            self.page_regions(page), polyline, self.orders[page]
        )
        self.orders[page] = list(order.sequence)
        self.check_invariants()
        return self.reading_order(page)

    def move_in_order(self, page: int, region_id: str, new_index: int) -> ReadingOrder:
        sequence = self.orders[page]
        if region_id not in sequence:
            raise UnknownRegion(region_id)
        if not 0 <= new_index < len(sequence):
            raise IndexOutOfRange(f"{new_index} not in [0, {len(sequence)})")
        sequence.remove(region_id)
        sequence.insert(new_index, region_id)
        self.check_invariants()
        return self.reading_order(page)

    def demote_to_artifact(self, region_id: str) -> None:
        self.set_region_type(region_id, RegionType.ARTIFACT)
