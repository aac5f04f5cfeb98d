"""Session persistence and the eight-step workflow engine.

A session pairs one uploaded PDF with one Tagmap. Mutations go through
``put_step`` with optimistic concurrency (the caller sends the revision it
saw; a mismatch is a conflict). Every completed mutation is flushed to disk
with an atomic rename, so a reloaded store reproduces identical step views.
Step order is advisory: any step may be revisited, and views recompute from
the current Tagmap.
"""

from __future__ import annotations

import datetime as _dt
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..autotag import auto_tag, detect_regions, get_detector
from ..geometry import Rect
from ..mathtext import LatexError, formula_alt_text, word_budget
from ..model import TaggedDocument, op_id_from_str, op_id_str, validate_language
from ..pdfio import parse_pdf, write_tagged_pdf
from ..regions import Polyline, RegionSet, RegionType
from ..structure import build_list, build_table, ListSpec, TableGrid, validate_tree
from ..tagmap import (
    Tagmap, assemble_meta, assemble_tree, region_set_from_tagmap,
    sync_tagmap_regions, tagmap_from_regions,
)


class UnknownSession(KeyError):
    pass


class RevisionConflict(RuntimeError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"expected revision {expected}, session is at {actual}")
        self.actual = actual


class ValidationFailed(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class BadStepPayload(ValueError):
    pass


@dataclass
class Session:
    id: str
    tagmap: Tagmap
    revision: int = 1
    created: str = ""
    updated: str = ""
    doc: TaggedDocument | None = None  # lazily parsed, not persisted
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def info(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "revision": self.revision,
            "created": self.created,
            "updated": self.updated,
            "pages": len(self.tagmap.pages),
            "steps_done": list(self.tagmap.steps_done),
        }


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


class SessionStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._store_lock = threading.Lock()

    # -- lifecycle ---------------------------------------------------------------

    def create(self, pdf_bytes: bytes, auto: bool = True) -> Session:
        doc = parse_pdf(pdf_bytes)
        if auto:
            tagmap = auto_tag(doc)
        else:
            tagmap = tagmap_from_regions(doc, RegionSet(page_count=len(doc.pages)))
        session = Session(
            id=uuid.uuid4().hex[:12], tagmap=tagmap,
            created=_now(), updated=_now(), doc=doc,
        )
        session_dir = self.data_dir / session.id
        session_dir.mkdir(parents=True, exist_ok=True)
        (session_dir / "source.pdf").write_bytes(pdf_bytes)
        self._persist(session)
        with self._store_lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._store_lock:
            session = self._sessions.get(session_id)
        if session is None:
            session = self._load(session_id)
            if session is None:
                raise UnknownSession(session_id)
            with self._store_lock:
                self._sessions.setdefault(session_id, session)
                session = self._sessions[session_id]
        return session

    def document(self, session: Session) -> TaggedDocument:
        if session.doc is None:
            pdf = (self.data_dir / session.id / "source.pdf").read_bytes()
            session.doc = parse_pdf(pdf)
        return session.doc

    def _persist(self, session: Session) -> None:
        payload = {
            "id": session.id,
            "revision": session.revision,
            "created": session.created,
            "updated": session.updated,
            "tagmap": session.tagmap.to_json(),
        }
        path = self.data_dir / session.id / "session.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, indent=1, sort_keys=True))
        tmp.replace(path)

    def _load(self, session_id: str) -> Session | None:
        path = self.data_dir / session_id / "session.json"
        if not path.exists():
            return None
        payload = json.loads(path.read_text())
        return Session(
            id=payload["id"],
            tagmap=Tagmap.from_json(payload["tagmap"]),
            revision=payload["revision"],
            created=payload["created"],
            updated=payload["updated"],
        )

    # -- reads ----------------------------------------------------------------------

    def step_view(self, session_id: str, step: int) -> dict[str, Any]:
        session = self.get(session_id)
        doc = self.document(session)
        if not 1 <= step <= 8:
            raise BadStepPayload(f"step must be 1..8, got {step}")
        view = _STEP_VIEWS[step](session.tagmap, doc)
        view.update({"step": step, "revision": session.revision,
                     "done": session.tagmap.steps_done[step - 1]})
        return view

    def geometry(self, session_id: str, page_index: int) -> dict[str, Any]:
        session = self.get(session_id)
        doc = self.document(session)
        if not 0 <= page_index < len(doc.pages):
            raise UnknownSession(f"page {page_index}")
        page = doc.pages[page_index]
        tm_page = session.tagmap.page(page_index)
        grids = {t["region"]: t for t in session.tagmap.tables}
        seps = {l["region"]: l for l in session.tagmap.lists}
        return {
            "page": {"index": page.index, "width": page.width, "height": page.height},
            "ops": [
                {
                    "id": op_id_str(op.id),
                    "kind": op.kind.value,
                    "bbox": list(op.bbox.as_tuple()),
                    "text": op.text,
                    "font_size": op.font_size,
                }
                for op in page.ops
            ],
            "regions": tm_page.regions,
            "reading_order": tm_page.reading_order,
            "artifacts": tm_page.artifacts,
            "grids": [grids[r["id"]] for r in tm_page.regions if r["id"] in grids],
            "list_separators": [
                seps[r["id"]] for r in tm_page.regions if r["id"] in seps
            ],
        }

    # -- mutation -----------------------------------------------------------------

    def put_step(
        self, session_id: str, step: int, payload: dict[str, Any],
        expected_revision: int,
    ) -> dict[str, Any]:
        session = self.get(session_id)
        if not 1 <= step <= 8:
            raise BadStepPayload(f"step must be 1..8, got {step}")
        with session.lock:
            if expected_revision != session.revision:
                raise RevisionConflict(expected_revision, session.revision)
            doc = self.document(session)
            notes = _STEP_PUTS[step](self, session.tagmap, doc, dict(payload))
            if payload.get("mark_done") is not None:
                session.tagmap.steps_done[step - 1] = bool(payload["mark_done"])
            session.revision += 1
            session.updated = _now()
            self._persist(session)
            return {
                "id": session.id, "revision": session.revision,
                "cascades": notes,
            }

    def export(self, session_id: str) -> bytes:
        session = self.get(session_id)
        with session.lock:
            doc = self.document(session)
            tagmap = session.tagmap
            problems = _export_gate(tagmap)
            try:
                tree = assemble_tree(tagmap, doc)
            except ValueError as exc:  # e.g. a table region emptied by edits
                raise ValidationFailed(problems + [f"cannot assemble: {exc}"]) from exc
            problems += [str(v) for v in validate_tree(tree)]
            meta = assemble_meta(tagmap)
            if not meta.title:
                problems.append("metadata: title is empty")
            if not meta.language:
                problems.append("metadata: language is empty")
            if problems:
                raise ValidationFailed(problems)
            return write_tagged_pdf(doc, tree, meta)


def _export_gate(tagmap: Tagmap) -> list[str]:
    problems = []
    for step in (1, 2, 3):
        if not tagmap.steps_done[step - 1]:
            problems.append(f"step {step} not completed")
    present = {e["type"] for p in tagmap.pages for e in p.regions}
    for rtype, step in (("table", 4), ("list", 5), ("figure", 6), ("formula", 7)):
        if rtype in present and not tagmap.steps_done[step - 1]:
            problems.append(f"step {step} not completed but {rtype} regions exist")
    return problems


# -- step views -----------------------------------------------------------------

def _region_text(doc: TaggedDocument, ops: list[str]) -> str:
    parts = []
    for s in sorted(ops):
        op = doc.op(op_id_from_str(s))
        if op.text:
            parts.append(op.text)
    return " ".join(parts)


def _view_regions(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    rset = region_set_from_tagmap(tagmap, doc)
    pages = []
    for page in doc.pages:
        tm_page = tagmap.page(page.index)
        pages.append(
            {
                "page": page.index,
                "regions": [
                    dict(entry, text=_region_text(doc, entry["ops"]))
                    for entry in tm_page.regions
                ],
                "untagged": [op_id_str(op) for op in rset.untagged_ops(page)],
                "artifacts": tm_page.artifacts,
            }
        )
    return {"pages": pages}


def _view_order(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    pages = []
    for tm_page in tagmap.pages:
        boxes = {e["id"]: e["bbox"] for e in tm_page.regions}
        types = {e["id"]: e["type"] for e in tm_page.regions}
        texts = {e["id"]: _region_text(doc, e["ops"]) for e in tm_page.regions}
        pages.append(
            {
                "page": tm_page.index,
                "sequence": [
                    {
                        "region": rid, "bbox": boxes[rid], "type": types[rid],
                        "text": texts[rid][:120],
                    }
                    for rid in tm_page.reading_order
                ],
            }
        )
    return {"pages": pages}


def _view_headings(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    levels = {h["region"]: int(h["level"]) for h in tagmap.headings}
    outline = []
    prev = 0
    for tm_page in tagmap.pages:
        entries = {e["id"]: e for e in tm_page.regions}
        for rid in tm_page.reading_order:
            if entries[rid]["type"] != "heading":
                continue
            level = levels.get(rid, 1)
            allowed = list(range(1, min(prev + 1, 6) + 1)) if prev else [1]
            outline.append(
                {
                    "region": rid,
                    "page": tm_page.index,
                    "level": level,
                    "allowed_levels": allowed,
                    "text": _region_text(doc, entries[rid]["ops"]),
                }
            )
            prev = level
    return {"outline": outline}


def _table_preview(doc: TaggedDocument, entry: dict, raw: dict) -> list[list[str]]:
    ops = [doc.op(op_id_from_str(s)) for s in entry["ops"]]
    grid = TableGrid(
        region_id=entry["id"],
        h_lines=[float(v) for v in raw.get("h_lines", [])],
        v_lines=[float(v) for v in raw.get("v_lines", [])],
        header_mode=raw.get("header_mode", "none"),
    )
    if not ops:
        return []
    table = build_table(grid, ops)
    rows = []
    for tr in table.children:
        row = []
        for cell in getattr(tr, "children", []):
            texts = [
                doc.op(ref).text or "" for ref in cell.leaf_ops()
            ]
            row.append(" ".join(t for t in texts if t))
        rows.append(row)
    return rows


def _view_tables(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    grids = {t["region"]: t for t in tagmap.tables}
    tables = []
    for tm_page in tagmap.pages:
        for entry in tm_page.regions:
            if entry["type"] != "table":
                continue
            raw = grids.get(entry["id"], {})
            tables.append(
                {
                    "region": entry["id"],
                    "page": tm_page.index,
                    "bbox": entry["bbox"],
                    "h_lines": raw.get("h_lines", []),
                    "v_lines": raw.get("v_lines", []),
                    "header_mode": raw.get("header_mode", "none"),
                    "cells": _table_preview(doc, entry, raw),
                }
            )
    return {"tables": tables}


def _view_lists(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    specs = {l["region"]: l for l in tagmap.lists}
    lists = []
    for tm_page in tagmap.pages:
        for entry in tm_page.regions:
            if entry["type"] != "list":
                continue
            raw = specs.get(entry["id"], {})
            ops = [doc.op(op_id_from_str(s)) for s in entry["ops"]]
            spec = ListSpec(
                region_id=entry["id"],
                item_separators=[float(v) for v in raw.get("separators", [])],
                nesting={int(k): int(v) for k, v in raw.get("nesting", {}).items()},
            )
            items: list[str] = []
            if ops:
                built = build_list(spec, ops)
                items = [
                    " ".join(
                        filter(None, (doc.op(ref).text or "" for ref in li.leaf_ops()))
                    )
                    for li in built.iter_nodes()
                    if li.tag.value == "LI"
                ]
            lists.append(
                {
                    "region": entry["id"],
                    "page": tm_page.index,
                    "separators": raw.get("separators", []),
                    "nesting": raw.get("nesting", {}),
                    "items": items,
                }
            )
    return {"lists": lists}


def _view_figures(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    alts = {f["region"]: f for f in tagmap.figures}
    figures = []
    for tm_page in tagmap.pages:
        for entry in tm_page.regions:
            if entry["type"] != "figure":
                continue
            raw = alts.get(entry["id"], {})
            text = raw.get("alt", "")
            figures.append(
                {
                    "region": entry["id"],
                    "page": tm_page.index,
                    "bbox": entry["bbox"],
                    "alt": text,
                    "decorative": bool(raw.get("decorative", False)),
                    "words_remaining": word_budget(text).remaining,
                }
            )
    return {"figures": figures, "word_limit": 50}


def _view_formulas(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    alts = {f["region"]: f for f in tagmap.formulas}
    formulas = []
    for tm_page in tagmap.pages:
        for entry in tm_page.regions:
            if entry["type"] != "formula":
                continue
            raw = alts.get(entry["id"], {})
            formulas.append(
                {
                    "region": entry["id"],
                    "page": tm_page.index,
                    "bbox": entry["bbox"],
                    "latex": raw.get("latex", ""),
                    "alt": raw.get("alt", ""),
                    "manual": bool(raw.get("manual", False)),
                }
            )
    return {"formulas": formulas}


def _view_meta(tagmap: Tagmap, doc: TaggedDocument) -> dict[str, Any]:
    pages = []
    for tm_page in tagmap.pages:
        by_type: dict[str, int] = {}
        for entry in tm_page.regions:
            by_type[entry["type"]] = by_type.get(entry["type"], 0) + 1
        pages.append(
            {
                "page": tm_page.index,
                "regions_by_type": by_type,
                "artifact_ops": len(tm_page.artifacts),
            }
        )
    return {"meta": dict(tagmap.meta), "steps_done": list(tagmap.steps_done),
            "pages": pages}


_STEP_VIEWS = {
    1: _view_regions, 2: _view_order, 3: _view_headings, 4: _view_tables,
    5: _view_lists, 6: _view_figures, 7: _view_formulas, 8: _view_meta,
}


# -- step mutations -----------------------------------------------------------------

def _require(payload: dict, *keys: str) -> list[Any]:
    missing = [k for k in keys if k not in payload]
    if missing:
        raise BadStepPayload(f"payload missing {missing}")
    return [payload[k] for k in keys]


def _put_regions(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
                 payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    rset = region_set_from_tagmap(tagmap, doc)
    if action == "auto_detect":
        if tagmap.region_ids() and not payload.get("confirm_replace", False):
            raise BadStepPayload(
                "auto_detect replaces existing regions; pass confirm_replace=true"
            )
        detector = get_detector(payload.get("detector", "heuristic"))
        rset = detect_regions(doc, detector)
    elif action == "create":
        page, op_ids, rtype = _require(payload, "page", "op_ids", "rtype")
        ops = {op.id: op for op in doc.pages[int(page)].ops}
        created = rset.create_region_from_selection(
            ops, [op_id_from_str(s) for s in op_ids], RegionType(rtype)
        )
        payload["created_region"] = created.id
    elif action == "delete":
        (ids,) = _require(payload, "ids")
        rset.delete_regions(list(ids))
    elif action == "resize":
        rid, bbox = _require(payload, "id", "bbox")
        region = rset.region(rid)
        rset.resize_region(rid, Rect(*bbox), doc.pages[region.page])
    elif action == "set_type":
        rid, rtype = _require(payload, "id", "rtype")
        rset.set_region_type(rid, RegionType(rtype))
    elif action != "noop":
        raise BadStepPayload(f"unknown step 1 op {action!r}")
    notes = sync_tagmap_regions(tagmap, doc, rset)
    if "created_region" in payload:
        notes.append(f"created {payload['created_region']}")
    return notes


def _put_order(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
               payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    rset = region_set_from_tagmap(tagmap, doc)
    if action == "draw":
        page, points = _require(payload, "page", "polyline")
        rset.draw_reading_order(
            int(page), Polyline(tuple((float(x), float(y)) for x, y in points))
        )
    elif action == "move":
        page, rid, index = _require(payload, "page", "region", "index")
        rset.move_in_order(int(page), rid, int(index))
    elif action == "demote":
        (rid,) = _require(payload, "region")
        rset.demote_to_artifact(rid)
    elif action != "noop":
        raise BadStepPayload(f"unknown step 2 op {action!r}")
    return sync_tagmap_regions(tagmap, doc, rset)


def _put_headings(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
                  payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    if action == "set_level":
        rid, level = _require(payload, "region", "level")
        entry = tagmap.region_entry(rid)
        if entry is None or entry["type"] != "heading":
            raise BadStepPayload(f"{rid} is not a heading region")
        rows = [h for h in tagmap.headings if h["region"] != rid]
        rows.append({"region": rid, "level": int(level)})
        tagmap.headings = rows
    elif action == "auto_detect":
        from ..structure import detect_heading_levels

        inputs = []
        for tm_page in tagmap.pages:
            entries = {e["id"]: e for e in tm_page.regions}
            for rid in tm_page.reading_order:
                if entries[rid]["type"] != "heading":
                    continue
                ops = [doc.op(op_id_from_str(s)) for s in entries[rid]["ops"]]
                sizes = [op.font_size or 0.0 for op in ops if op.font_size]
                bold = all(op.bold for op in ops) if ops else False
                inputs.append((rid, max(sizes) if sizes else 0.0, bold))
        outline = detect_heading_levels(inputs)
        tagmap.headings = [
            {"region": rid, "level": level} for rid, level in outline.entries
        ]
    elif action != "noop":
        raise BadStepPayload(f"unknown step 3 op {action!r}")
    return []


def _put_tables(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
                payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    if action == "set_grid":
        rid, h_lines, v_lines, mode = _require(
            payload, "region", "h_lines", "v_lines", "header_mode"
        )
        entry = tagmap.region_entry(rid)
        if entry is None or entry["type"] != "table":
            raise BadStepPayload(f"{rid} is not a table region")
        TableGrid(  # validates sortedness and header mode
            region_id=rid, h_lines=[float(v) for v in h_lines],
            v_lines=[float(v) for v in v_lines], header_mode=mode,
        )
        rows = [t for t in tagmap.tables if t["region"] != rid]
        rows.append(
            {"region": rid, "h_lines": list(h_lines), "v_lines": list(v_lines),
             "header_mode": mode}
        )
        tagmap.tables = rows
    elif action == "clear_grid":
        (rid,) = _require(payload, "region")
        tagmap.tables = [t for t in tagmap.tables if t["region"] != rid]
    elif action != "noop":
        raise BadStepPayload(f"unknown step 4 op {action!r}")
    return []


def _put_lists(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
               payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    if action == "set_items":
        rid, separators = _require(payload, "region", "separators")
        entry = tagmap.region_entry(rid)
        if entry is None or entry["type"] != "list":
            raise BadStepPayload(f"{rid} is not a list region")
        nesting = payload.get("nesting", {})
        ListSpec(  # validates
            region_id=rid,
            item_separators=[float(v) for v in separators],
            nesting={int(k): int(v) for k, v in nesting.items()},
        )
        rows = [l for l in tagmap.lists if l["region"] != rid]
        rows.append({"region": rid, "separators": list(separators),
                     "nesting": dict(nesting)})
        tagmap.lists = rows
    elif action == "clear_items":
        (rid,) = _require(payload, "region")
        tagmap.lists = [l for l in tagmap.lists if l["region"] != rid]
    elif action != "noop":
        raise BadStepPayload(f"unknown step 5 op {action!r}")
    return []


def _put_figures(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
                 payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    if action == "set_alt":
        (rid,) = _require(payload, "region")
        entry = tagmap.region_entry(rid)
        if entry is None or entry["type"] != "figure":
            raise BadStepPayload(f"{rid} is not a figure region")
        rows = [f for f in tagmap.figures if f["region"] != rid]
        rows.append(
            {
                "region": rid,
                "alt": str(payload.get("text", "")),
                "decorative": bool(payload.get("decorative", False)),
            }
        )
        tagmap.figures = rows
    elif action != "noop":
        raise BadStepPayload(f"unknown step 6 op {action!r}")
    return []


def _put_formulas(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
                  payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    if action in ("set_latex", "set_alt_manual"):
        (rid,) = _require(payload, "region")
        entry = tagmap.region_entry(rid)
        if entry is None or entry["type"] != "formula":
            raise BadStepPayload(f"{rid} is not a formula region")
        rows = [f for f in tagmap.formulas if f["region"] != rid]
        previous = next(
            (f for f in tagmap.formulas if f["region"] == rid), {}
        )
        if action == "set_latex":
            (latex,) = _require(payload, "latex")
            try:
                alt = formula_alt_text(latex)
            except LatexError as exc:
                raise BadStepPayload(f"formula rejected: {exc}") from exc
            rows.append({"region": rid, "latex": latex, "alt": alt, "manual": False})
        else:
            (text,) = _require(payload, "text")
            rows.append(
                {"region": rid, "latex": previous.get("latex", ""),
                 "alt": str(text), "manual": True}
            )
        tagmap.formulas = rows
    elif action != "noop":
        raise BadStepPayload(f"unknown step 7 op {action!r}")
    return []


def _put_meta(store: SessionStore, tagmap: Tagmap, doc: TaggedDocument,
              payload: dict) -> list[str]:
    action = payload.get("op", "noop")
    if action == "set_meta":
        title, author, language = _require(payload, "title", "author", "language")
        validate_language(str(language))
        tagmap.meta = {
            "title": str(title), "author": str(author), "language": str(language),
        }
    elif action != "noop":
        raise BadStepPayload(f"unknown step 8 op {action!r}")
    return []


_STEP_PUTS = {
    1: _put_regions, 2: _put_order, 3: _put_headings, 4: _put_tables,
    5: _put_lists, 6: _put_figures, 7: _put_formulas, 8: _put_meta,
}
