"""The Tagmap: a portable, versioned record of all eight steps' decisions.

A Tagmap plus the source document deterministically assembles into one
structure tree; it is the interchange format between the CLI, the session
service, and the UI. Stored as JSON (schema below), loaded strictly.

Schema (version 1)::

    {
      "version": 1,
      "document_hash": "sha256:...",
      "pages": [{"index": 0,
                 "regions": [{"id": "r0-0", "bbox": [x0,y0,x1,y1],
                              "type": "paragraph", "ops": ["0:3", "0:4"],
                              "score": 0.5}],
                 "reading_order": ["r0-1", "r0-0"],
                 "artifacts": ["0:9"]}],
      "headings": [{"region": "r0-1", "level": 1}],
      "tables":   [{"region": "...", "h_lines": [...], "v_lines": [...],
                    "header_mode": "first_row"}],
      "lists":    [{"region": "...", "separators": [...], "nesting": {"1": 0}}],
      "figures":  [{"region": "...", "alt": "...", "decorative": false}],
      "formulas": [{"region": "...", "latex": "...", "alt": "...",
                    "manual": false}],
      "meta": {"title": "...", "author": "...", "language": "en"},
      "steps_done": [true, ...8 booleans...]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .geometry import Rect
from .model import (
    DocMeta, StructNode, TagKind, TaggedDocument, heading_tag,
    op_id_from_str, op_id_str,
)
from .regions import Region, RegionSet, RegionType
from .structure import ListSpec, TableGrid, build_list, build_table, repair_headings

TAGMAP_VERSION = 1


class TagmapError(ValueError):
    pass


@dataclass
class TagmapPage:
    index: int
    regions: list[dict[str, Any]] = field(default_factory=list)
    reading_order: list[str] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)


@dataclass
class Tagmap:
    document_hash: str = ""
    pages: list[TagmapPage] = field(default_factory=list)
    headings: list[dict[str, Any]] = field(default_factory=list)
    tables: list[dict[str, Any]] = field(default_factory=list)
    lists: list[dict[str, Any]] = field(default_factory=list)
    figures: list[dict[str, Any]] = field(default_factory=list)
    formulas: list[dict[str, Any]] = field(default_factory=list)
    meta: dict[str, str] = field(
        default_factory=lambda: {"title": "", "author": "", "language": ""}
    )
    steps_done: list[bool] = field(default_factory=lambda: [False] * 8)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "version": TAGMAP_VERSION,
            "document_hash": self.document_hash,
            "pages": [
                {
                    "index": p.index,
                    "regions": p.regions,
                    "reading_order": p.reading_order,
                    "artifacts": p.artifacts,
                }
                for p in self.pages
            ],
            "headings": self.headings,
            "tables": self.tables,
            "lists": self.lists,
            "figures": self.figures,
            "formulas": self.formulas,
            "meta": self.meta,
            "steps_done": self.steps_done,
        }

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_json(), indent=1, sort_keys=True).encode("utf-8")

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Tagmap":
        if data.get("version") != TAGMAP_VERSION:
            raise TagmapError(f"unsupported tagmap version {data.get('version')!r}")
        pages = [
            TagmapPage(
                index=p["index"],
                regions=list(p.get("regions", [])),
                reading_order=list(p.get("reading_order", [])),
                artifacts=list(p.get("artifacts", [])),
            )
            for p in data.get("pages", [])
        ]
        steps = list(data.get("steps_done", [])) or [False] * 8
        if len(steps) != 8:
            raise TagmapError("steps_done must have 8 entries")
        return cls(
            document_hash=data.get("document_hash", ""),
            pages=pages,
            headings=list(data.get("headings", [])),
            tables=list(data.get("tables", [])),
            lists=list(data.get("lists", [])),
            figures=list(data.get("figures", [])),
            formulas=list(data.get("formulas", [])),
            meta=dict(data.get("meta", {})),
            steps_done=steps,
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Tagmap":
        try:
            return cls.from_json(json.loads(raw.decode("utf-8")))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TagmapError(f"malformed tagmap: {exc}") from exc

    # -- lookups -----------------------------------------------------------------

    def page(self, index: int) -> TagmapPage:
        return self.pages[index]

    def region_entry(self, region_id: str) -> dict[str, Any] | None:
        for page in self.pages:
            for entry in page.regions:
                if entry["id"] == region_id:
                    return entry
        return None

    def region_ids(self) -> set[str]:
        return {e["id"] for p in self.pages for e in p.regions}

    def normalize(self) -> list[str]:
        """Drop step 3-7 records whose region vanished or changed type.

        Returns human-readable notes of what was cascaded away; the session
        layer surfaces these to the caller.
        """
        notes: list[str] = []
        types = {
            e["id"]: e["type"] for p in self.pages for e in p.regions
        }

        def sweep(entries: list[dict], expected: str, label: str) -> list[dict]:
            kept = []
            for entry in entries:
                rid = entry["region"]
                if types.get(rid) == expected:
                    kept.append(entry)
                else:
                    notes.append(f"dropped {label} for {rid}")
            return kept

        self.headings = sweep(self.headings, "heading", "heading level")
        self.tables = sweep(self.tables, "table", "table grid")
        self.lists = sweep(self.lists, "list", "list spec")
        self.figures = sweep(self.figures, "figure", "figure alt text")
        self.formulas = sweep(self.formulas, "formula", "formula alt text")
        return notes


def tagmap_from_regions(doc: TaggedDocument, region_set: RegionSet) -> Tagmap:
    """Snapshot a RegionSet into a fresh Tagmap (steps 4-8 left empty)."""
    pages = []
    for page in doc.pages:
        regions = sorted(region_set.page_regions(page.index), key=lambda r: r.id)
        pages.append(
            TagmapPage(
                index=page.index,
                regions=[_region_to_json(r) for r in regions],
                reading_order=list(region_set.orders[page.index]),
                artifacts=sorted(
                    op_id_str(op) for op in region_set.artifact_ops
                    if op[0] == page.index
                ),
            )
        )
    return Tagmap(document_hash=doc.source_hash, pages=pages)


def _region_to_json(region: Region) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": region.id,
        "bbox": list(region.bbox.as_tuple()),
        "type": region.rtype.value,
        "ops": sorted(op_id_str(op) for op in region.ops),
    }
    if region.detector_score is not None:
        out["score"] = region.detector_score
    return out


def region_set_from_tagmap(tagmap: Tagmap, doc: TaggedDocument) -> RegionSet:
    """Rehydrate the editable region state from a Tagmap."""
    rset = RegionSet(page_count=len(doc.pages))
    for page in tagmap.pages:
        for entry in page.regions:
            region = Region(
                id=entry["id"],
                page=page.index,
                bbox=Rect(*entry["bbox"]),
                rtype=RegionType(entry["type"]),
                ops={op_id_from_str(s) for s in entry["ops"]},
                detector_score=entry.get("score"),
            )
            rset.regions[region.id] = region
        rset.orders[page.index] = list(page.reading_order)
        rset.artifact_ops |= {op_id_from_str(s) for s in page.artifacts}
    counters = [
        int(rid.split("-", 1)[0][1:]) for rid in rset.regions if rid.startswith("r")
        and rid.split("-", 1)[0][1:].isdigit()
    ]
    rset._counter = max(counters, default=-1) + 1
    rset.check_invariants()
    return rset


def sync_tagmap_regions(
    tagmap: Tagmap, doc: TaggedDocument, rset: RegionSet
) -> list[str]:
    """Write the RegionSet back into the Tagmap pages and cascade step data.

    Returns the cascade notes (step 3-7 records dropped because their region
    vanished or changed type)."""
    snapshot = tagmap_from_regions(doc, rset)
    tagmap.document_hash = tagmap.document_hash or snapshot.document_hash
    tagmap.pages = snapshot.pages
    return tagmap.normalize()


# -- assembly -------------------------------------------------------------------

def assemble_tree(tagmap: Tagmap, doc: TaggedDocument) -> StructNode:
    """Deterministically assemble the structure tree from the Tagmap.

    Heading regions always pass through repair_headings (regions missing a
    recorded level count as bare <H>), so the assembled outline is valid by
    construction; grids and list specs default to a single cell/item when a
    region has none recorded.
    """
    entries: dict[str, dict[str, Any]] = {}
    region_page: dict[str, int] = {}
    for page in tagmap.pages:
        for entry in page.regions:
            entries[entry["id"]] = entry
            region_page[entry["id"]] = page.index

    level_by_region = {h["region"]: int(h["level"]) for h in tagmap.headings}
    grid_by_region = {t["region"]: t for t in tagmap.tables}
    spec_by_region = {l["region"]: l for l in tagmap.lists}
    figure_by_region = {f["region"]: f for f in tagmap.figures}
    formula_by_region = {f["region"]: f for f in tagmap.formulas}

    ordered_regions: list[str] = []
    for page in tagmap.pages:
        ordered_regions.extend(page.reading_order)

    heading_raw = [
        (rid, level_by_region.get(rid, 0))
        for rid in ordered_regions
        if entries[rid]["type"] == "heading"
    ]
    outline = repair_headings(heading_raw)
    final_level = dict(outline.entries)

    children: list = []
    for rid in ordered_regions:
        entry = entries[rid]
        rtype = RegionType(entry["type"])
        op_ids = sorted(op_id_from_str(s) for s in entry["ops"])
        ops = [doc.op(op_id) for op_id in op_ids]
        if rtype == RegionType.PARAGRAPH:
            children.append(StructNode(TagKind.P, list(op_ids)))
        elif rtype == RegionType.HEADING:
            children.append(
                StructNode(heading_tag(final_level[rid]), list(op_ids))
            )
        elif rtype == RegionType.CAPTION:
            children.append(StructNode(TagKind.CAPTION, list(op_ids)))
        elif rtype == RegionType.TABLE:
            raw = grid_by_region.get(rid, {})
            grid = TableGrid(
                region_id=rid,
                h_lines=[float(v) for v in raw.get("h_lines", [])],
                v_lines=[float(v) for v in raw.get("v_lines", [])],
                header_mode=raw.get("header_mode", "none"),
            )
            children.append(build_table(grid, ops))
        elif rtype == RegionType.LIST:
            raw = spec_by_region.get(rid, {})
            spec = ListSpec(
                region_id=rid,
                item_separators=[float(v) for v in raw.get("separators", [])],
                nesting={int(k): int(v) for k, v in raw.get("nesting", {}).items()},
            )
            children.append(build_list(spec, ops))
        elif rtype == RegionType.FIGURE:
            raw = figure_by_region.get(rid, {})
            if raw.get("decorative"):
                continue  # ops fall through to artifact wrapping at export
            attrs: dict[str, Any] = {}
            if raw.get("alt"):
                attrs["alt"] = raw["alt"]
            children.append(StructNode(TagKind.FIGURE, list(op_ids), attrs))
        elif rtype == RegionType.FORMULA:
            raw = formula_by_region.get(rid, {})
            attrs = {}
            if raw.get("alt"):
                attrs["alt"] = raw["alt"]
            children.append(StructNode(TagKind.FORMULA, list(op_ids), attrs))
        elif rtype == RegionType.ARTIFACT:
            continue
    return StructNode(TagKind.DOCUMENT, children)


def assemble_meta(tagmap: Tagmap) -> DocMeta:
    meta = tagmap.meta
    return DocMeta(
        title=meta.get("title", ""),
        author=meta.get("author", ""),
        language=meta.get("language", ""),
    ).with_ua_flags()
