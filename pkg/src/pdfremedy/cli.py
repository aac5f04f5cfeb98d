"""Command-line front door: batch tagging, scoring, speech, repair, serving.

Exit codes: 0 success, 1 validation failure, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .autotag import DetectorConfig, HeuristicDetector, auto_tag
from .mathtext import LatexError, formula_alt_text
from .model import StructNode, TagKind
from .pdfio import InvalidTree, MalformedPdf, MissingMeta, parse_pdf, write_tagged_pdf
from .scoring import (
    ScoreReport, TruthMap, TruthMismatch, format_csv, format_table, score_corpus,
    score_document,
)
from .structure import repair_headings_in_tree, repair_list, repair_table
from .tagmap import Tagmap, TagmapError, assemble_meta, assemble_tree


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_pdf(path: str):
    try:
        return parse_pdf(Path(path).read_bytes())
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}", 2) from exc
    except MalformedPdf as exc:
        raise _CliError(f"cannot parse {path}: {exc}", 2) from exc


def _read_truth(path: str) -> TruthMap:
    try:
        return TruthMap.load(path)
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}", 2) from exc
    except (ValueError, KeyError) as exc:
        raise _CliError(f"bad truth map {path}: {exc}", 1) from exc


def _cmd_autotag(args) -> int:
    doc = _read_pdf(args.pdf)
    detector = None
    if args.config:
        try:
            detector = HeuristicDetector(DetectorConfig.from_file(args.config))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise _CliError(f"bad config {args.config}: {exc}", 2) from exc
    tagmap = auto_tag(doc, detector)
    Path(args.output).write_bytes(tagmap.to_bytes())
    regions = sum(len(p.regions) for p in tagmap.pages)
    print(f"wrote {args.output}: {len(tagmap.pages)} pages, {regions} regions")
    return 0


def _cmd_apply(args) -> int:
    doc = _read_pdf(args.pdf)
    try:
        tagmap = Tagmap.from_bytes(Path(args.tagmap).read_bytes())
    except OSError as exc:
        raise _CliError(f"cannot read {args.tagmap}: {exc}", 2) from exc
    except TagmapError as exc:
        raise _CliError(str(exc), 1) from exc
    if tagmap.document_hash and tagmap.document_hash != doc.source_hash:
        raise _CliError(
            f"tagmap was made for a different document "
            f"({tagmap.document_hash} != {doc.source_hash})", 1,
        )
    try:
        tree = assemble_tree(tagmap, doc)
        pdf = write_tagged_pdf(doc, tree, assemble_meta(tagmap))
    except (InvalidTree, MissingMeta, ValueError) as exc:
        raise _CliError(f"cannot assemble a valid export: {exc}", 1) from exc
    Path(args.output).write_bytes(pdf)
    print(f"wrote {args.output} ({len(pdf)} bytes)")
    return 0


def _cmd_score(args) -> int:
    doc = _read_pdf(args.pdf)
    truth = _read_truth(args.truth)
    try:
        report = score_document(doc, truth, name=Path(args.pdf).stem)
    except TruthMismatch as exc:
        raise _CliError(f"truth map does not match the document: {exc}", 1) from exc
    _print_reports([report], args.format)
    return 0


def _cmd_score_corpus(args) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
    except OSError as exc:
        raise _CliError(f"cannot read {args.manifest}: {exc}", 2) from exc
    except json.JSONDecodeError as exc:
        raise _CliError(f"bad manifest: {exc}", 1) from exc
    base = Path(args.manifest).parent
    corpora = manifest.get("corpora")
    if corpora is None:
        corpora = [{"name": manifest.get("name", "corpus"),
                    "pairs": manifest.get("pairs", [])}]
    reports: list[ScoreReport] = []
    for corpus in corpora:
        pairs = []
        for pdf_path, truth_path in corpus.get("pairs", []):
            doc = _read_pdf(str(base / pdf_path))
            truth = _read_truth(str(base / truth_path))
            pairs.append((doc, truth))
        if not pairs:
            raise _CliError(f"corpus {corpus.get('name')!r} has no documents", 1)
        try:
            reports.append(score_corpus(pairs, name=corpus.get("name", "corpus")))
        except TruthMismatch as exc:
            raise _CliError(f"truth map does not match a document: {exc}", 1) from exc
    _print_reports(reports, args.format)
    return 0


def _print_reports(reports: list[ScoreReport], fmt: str) -> None:
    if fmt == "csv":
        sys.stdout.write(format_csv(reports))
    else:
        print(format_table(reports))


def _cmd_mathspeak(args) -> int:
    try:
        print(formula_alt_text(args.latex))
    except LatexError as exc:
        raise _CliError(f"cannot convert formula: {exc}", 1) from exc
    return 0


def _cmd_repair(args) -> int:
    doc = _read_pdf(args.pdf)
    tree = doc.struct_tree
    if tree is None:
        raise _CliError(f"{args.pdf} has no structure tree to repair", 1)
    for node in list(tree.iter_nodes()):
        node.children = [
            repair_table(c)
            if isinstance(c, StructNode) and c.tag == TagKind.TABLE
            else repair_list(c)
            if isinstance(c, StructNode) and c.tag == TagKind.L
            else c
            for c in node.children
        ]
    repair_headings_in_tree(tree)
    meta = doc.meta.with_ua_flags()
    if not meta.title:
        meta.title = Path(args.pdf).stem
    if not meta.language:
        meta.language = "en"
    try:
        pdf = write_tagged_pdf(doc, tree, meta)
    except (InvalidTree, MissingMeta) as exc:
        raise _CliError(f"repair left an invalid tree: {exc}", 1) from exc
    Path(args.output).write_bytes(pdf)
    print(f"wrote {args.output} ({len(pdf)} bytes)")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdfremedy",
        description="Tag untagged PDFs for screen readers and audit tag accuracy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("autotag", help="detect regions and write a tagmap")
    p.add_argument("pdf")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--config", help="JSON file with detector settings "
                                    "(gap_factor, heading_ratio)")
    p.set_defaults(func=_cmd_autotag)

    p = sub.add_parser("apply", help="apply a tagmap and write the tagged PDF")
    p.add_argument("pdf")
    p.add_argument("tagmap")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("score", help="score a tagged PDF against a truth map")
    p.add_argument("pdf")
    p.add_argument("--truth", required=True)
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("score-corpus", help="score corpora from a manifest")
    p.add_argument("manifest")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.set_defaults(func=_cmd_score_corpus)

    p = sub.add_parser("mathspeak", help="print spoken text for a LaTeX formula")
    p.add_argument("latex")
    p.set_defaults(func=_cmd_mathspeak)

    p = sub.add_parser("repair", help="repair heading/table/list structures")
    p.add_argument("pdf")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_repair)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", default="./pdfremedy-data")
    p.add_argument("--static", default=None, help="directory with the web UI build")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
