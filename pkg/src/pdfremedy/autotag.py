"""Heuristic region detection and one-shot automatic tagging.

The detector groups text into blocks by line clustering (vertical gaps above
a fraction of the median line height split blocks, font-size changes split
too), splits two-column layouts at the page midline, types oversized blocks
as headings, and proposes a figure per image. It stands behind a plugin
interface so an external ML detector can replace it; nothing downstream
depends on which detector produced the proposals.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .geometry import Rect, rect_union
from .model import ContentOp, OpKind, Page, TaggedDocument
from .regions import RegionSet, RegionType
from .structure import detect_heading_levels
from .tagmap import Tagmap, tagmap_from_regions

HEURISTIC_SCORE = 0.5  # heuristics carry no learned confidence
MIDLINE_CROSS_RATIO = 0.15  # more crossings than this means one column


@dataclass
class DetectorConfig:
    gap_factor: float = 0.8      # line gap > gap_factor * median line height splits
    heading_ratio: float = 1.15  # block size > ratio * body size means heading
    column_span_ratio: float = 0.6  # lines wider than this fraction span columns

    @classmethod
    def from_file(cls, path: str | Path) -> "DetectorConfig":
        data = json.loads(Path(path).read_text())
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class DetectorProposal:
    page: int
    bbox: Rect
    rtype: RegionType
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"detector score out of [0,1]: {self.score}")


class DetectorPlugin(Protocol):
    name: str
    version: str

    def detect(self, page: Page) -> list[DetectorProposal]: ...


_REGISTRY: dict[str, DetectorPlugin] = {}


def register_detector(plugin: DetectorPlugin) -> None:
    _REGISTRY[plugin.name] = plugin


def get_detector(name: str) -> DetectorPlugin:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"no detector {name!r}; registered: {sorted(_REGISTRY)}"
        ) from None


@dataclass
class _Line:
    ops: list[ContentOp]

    @property
    def bbox(self) -> Rect:
        return rect_union([op.bbox for op in self.ops])

    @property
    def size(self) -> float:
        return max(op.font_size or 0.0 for op in self.ops)

    @property
    def bold(self) -> bool:
        return all(op.bold for op in self.ops)


def _cluster_lines(text_ops: list[ContentOp]) -> list[_Line]:
    lines: list[_Line] = []
    for op in sorted(text_ops, key=lambda o: (-o.bbox.center[1], o.bbox.x0)):
        placed = False
        for line in lines:
            ly = line.bbox.center[1]
            tol = 0.5 * max(line.bbox.height, op.bbox.height)
            if abs(op.bbox.center[1] - ly) <= tol:
                line.ops.append(op)
                placed = True
                break
        if not placed:
            lines.append(_Line([op]))
    return lines


class HeuristicDetector:
    name = "heuristic"
    version = "1"

    def __init__(self, config: DetectorConfig | None = None):
        self.config = config or DetectorConfig()

    def detect(self, page: Page) -> list[DetectorProposal]:
        proposals: list[DetectorProposal] = []
        text_ops = [op for op in page.ops if op.kind == OpKind.TEXT and op.text]
        for op in page.ops:
            if op.kind == OpKind.IMAGE:
                proposals.append(
                    DetectorProposal(page.index, op.bbox, RegionType.FIGURE, HEURISTIC_SCORE)
                )
        if not text_ops:
            return proposals

        body_size = _body_font_size(text_ops)

        # Column lanes: ops spanning most of the text width are their own lane,
        # the rest fall left or right of the midline. Lanes only apply when the
        # midline is mostly whitespace (a real two-column layout); otherwise
        # everything shares one lane.
        text_extent = rect_union([op.bbox for op in text_ops])
        midline = (text_extent.x0 + text_extent.x1) / 2.0
        span_cut = self.config.column_span_ratio * text_extent.width
        crossing = sum(
            1 for op in text_ops if op.bbox.x0 < midline < op.bbox.x1
        )
        two_column = crossing / len(text_ops) < MIDLINE_CROSS_RATIO

        def lane(op: ContentOp) -> int:
            if not two_column or op.bbox.width >= span_cut:
                return 0
            return 1 if op.bbox.center[0] <= midline else 2

        lanes: dict[int, list[ContentOp]] = {}
        for op in text_ops:
            lanes.setdefault(lane(op), []).append(op)
        lane_lines = {k: _cluster_lines(ops) for k, ops in sorted(lanes.items())}
        all_lines = [line for lines in lane_lines.values() for line in lines]
        median_height = statistics.median(line.bbox.height for line in all_lines)

        blocks: list[list[_Line]] = []
        for _, lines in sorted(lane_lines.items()):
            current: list[_Line] | None = None
            for line in sorted(lines, key=lambda l: -l.bbox.y1):
                if current is not None:
                    prev = current[-1]
                    gap = prev.bbox.y0 - line.bbox.y1
                    same_font = abs(prev.size - line.size) <= 0.5
                    if same_font and 0 <= gap <= self.config.gap_factor * median_height:
                        current.append(line)
                        continue
                current = [line]
                blocks.append(current)

        for block in blocks:
            bbox = rect_union([line.bbox for line in block])
            size = max(line.size for line in block)
            rtype = (
                RegionType.HEADING
                if size > self.config.heading_ratio * body_size
                else RegionType.PARAGRAPH
            )
            proposals.append(DetectorProposal(page.index, bbox, rtype, HEURISTIC_SCORE))
        return proposals


def _body_font_size(text_ops: list[ContentOp]) -> float:
    weights: dict[float, int] = {}
    for op in text_ops:
        size = round(op.font_size or 0.0, 1)
        weights[size] = weights.get(size, 0) + len(op.text or "")
    return max(weights.items(), key=lambda kv: (kv[1], -kv[0]))[0]


register_detector(HeuristicDetector())


def detect_regions(
    doc: TaggedDocument, detector: DetectorPlugin | None = None
) -> RegionSet:
    """Run the detector on every page and assign ops; fully deterministic."""
    detector = detector or get_detector("heuristic")
    region_set = RegionSet(page_count=len(doc.pages))
    for page in doc.pages:
        proposals = [
            (p.bbox, p.rtype, p.score)
            for p in detector.detect(page)
            if _within(p.bbox, page)
        ]
        region_set.detect(page, proposals)
    return region_set


def _within(bbox: Rect, page: Page) -> bool:
    return page.bbox.intersection_area(bbox) > 0 or bbox.area == 0


def auto_tag(doc: TaggedDocument, detector: DetectorPlugin | None = None) -> Tagmap:
    """Produce a complete Tagmap covering every op: regions, reading order,
    heading levels, and default metadata."""
    region_set = detect_regions(doc, detector)
    tagmap = tagmap_from_regions(doc, region_set)

    heading_inputs: list[tuple[str, float, bool]] = []
    for page in tagmap.pages:
        for rid in page.reading_order:
            region = region_set.regions[rid]
            if region.rtype != RegionType.HEADING:
                continue
            ops = [doc.op(op_id) for op_id in sorted(region.ops)]
            sizes = [op.font_size or 0.0 for op in ops if op.kind == OpKind.TEXT]
            size = max(sizes) if sizes else 0.0
            bold = all(op.bold for op in ops if op.kind == OpKind.TEXT)
            heading_inputs.append((rid, size, bold))
    outline = detect_heading_levels(heading_inputs)
    tagmap.headings = [
        {"region": rid, "level": level} for rid, level in outline.entries
    ]

    title = "Untitled"
    if heading_inputs:
        first = region_set.regions[heading_inputs[0][0]]
        texts = [
            doc.op(op_id).text or "" for op_id in sorted(first.ops)
            if doc.op(op_id).kind == OpKind.TEXT
        ]
        joined = " ".join(t for t in texts if t).strip()
        if joined:
            title = joined
    tagmap.meta = {"title": title, "author": "", "language": "en"}
    tagmap.steps_done = [True, True, True, False, False, False, False, True]
    return tagmap
