"""Parse/write round trips, MCID bijection, and malformed-input handling."""

import random
import re

import pytest

from docgen import meta, random_document, random_tree, simple_doc, text_op
from pdfremedy.model import (
    InvalidLanguageTag, OpKind, Page, StructNode, TagKind, TaggedDocument,
    set_meta,
)
from pdfremedy.pdfio import (
    InvalidTree, MalformedPdf, MissingMeta, UnresolvedContent, parse_pdf,
    write_tagged_pdf,
)


def test_empty_payload_is_malformed():
    with pytest.raises(MalformedPdf):
        parse_pdf(b"")


def test_garbage_payload_is_malformed():
    with pytest.raises(MalformedPdf):
        parse_pdf(b"this is not a pdf at all" * 10)


def test_header_without_structure_is_malformed():
    with pytest.raises(MalformedPdf):
        parse_pdf(b"%PDF-1.7\nnothing else")


def test_hello_round_trip():
    doc = simple_doc(["Hello"])
    tree = StructNode(TagKind.DOCUMENT, [StructNode(TagKind.P, [(0, 0)])])
    data = write_tagged_pdf(doc, tree, meta())
    parsed = parse_pdf(data)
    assert len(parsed.pages) == 1
    (op,) = parsed.pages[0].ops
    assert op.kind == OpKind.TEXT
    assert op.text == "Hello"
    assert parsed.struct_tree == tree


def test_study_fixture_parses(study):
    doc = study.doc
    assert len(doc.pages) == 3
    kinds = [op.kind for page in doc.pages for op in page.ops]
    assert kinds.count(OpKind.IMAGE) >= 1
    table_texts = {
        op.text for op in doc.pages[2].ops if op.kind == OpKind.TEXT
    }
    assert {"Group", "Before", "After", "Novice", "Expert"} <= table_texts


def test_single_tag_round_trip_preserves_op_count():
    doc = simple_doc(["a", "b", "c"])
    tree = StructNode(
        TagKind.DOCUMENT,
        [StructNode(TagKind.P, [(0, 0), (0, 1), (0, 2)])],
    )
    parsed = parse_pdf(write_tagged_pdf(doc, tree, meta()))
    assert len(parsed.pages[0].ops) == 3
    assert parsed.struct_tree == tree


def _mcid_sets(parsed: TaggedDocument):
    in_stream = {}
    for page in parsed.pages:
        for op in page.ops:
            if op.mcid is not None:
                in_stream.setdefault(page.index, []).append(op.mcid)
    return in_stream


def test_round_trip_random_documents_and_mcid_bijection():
    rng = random.Random(2024)
    for _ in range(20):
        doc = random_document(rng)
        tree = random_tree(rng, doc)
        data = write_tagged_pdf(doc, tree, meta())
        parsed = parse_pdf(data)
        assert parsed.struct_tree == tree
        assert parsed.meta == meta()
        # MCID bijection: stream mcids unique per page and exactly the set
        # referenced from the tree, each used once.
        refs = tree.leaf_ops()
        assert len(refs) == len(set(refs))
        stream_mcids = _mcid_sets(parsed)
        total_stream = sum(len(v) for v in stream_mcids.values())
        assert total_stream == len(refs)
        for page_index, mcids in stream_mcids.items():
            assert len(mcids) == len(set(mcids))
        # every non-referenced op is wrapped as an artifact
        referenced = set(refs)
        for page in parsed.pages:
            for op in page.ops:
                if op.id not in referenced:
                    assert op.artifact
                    assert op.mcid is None


def test_write_is_deterministic():
    doc = simple_doc(["same", "bytes"])
    tree = StructNode(TagKind.DOCUMENT, [StructNode(TagKind.P, [(0, 0), (0, 1)])])
    assert write_tagged_pdf(doc, tree, meta()) == write_tagged_pdf(doc, tree, meta())


def test_artifact_ops_not_reachable_from_tree():
    doc = simple_doc(["shown", "decoration"])
    tree = StructNode(TagKind.DOCUMENT, [StructNode(TagKind.P, [(0, 0)])])
    parsed = parse_pdf(write_tagged_pdf(doc, tree, meta()))
    assert parsed.pages[0].ops[1].artifact
    assert (0, 1) not in parsed.struct_tree.leaf_ops()


def test_invalid_tree_rejected():
    doc = simple_doc(["x"])
    bad = StructNode(TagKind.DOCUMENT, [StructNode(TagKind.TR, [(0, 0)])])
    with pytest.raises(InvalidTree):
        write_tagged_pdf(doc, bad, meta())


def test_unresolved_content_rejected():
    doc = simple_doc(["x"])
    missing = StructNode(TagKind.DOCUMENT, [StructNode(TagKind.P, [(0, 5)])])
    with pytest.raises(UnresolvedContent):
        write_tagged_pdf(doc, missing, meta())
    twice = StructNode(
        TagKind.DOCUMENT,
        [StructNode(TagKind.P, [(0, 0)]), StructNode(TagKind.P, [(0, 0)])],
    )
    with pytest.raises(UnresolvedContent):
        write_tagged_pdf(doc, twice, meta())


def test_missing_meta_rejected():
    doc = simple_doc(["x"])
    tree = StructNode(TagKind.DOCUMENT, [StructNode(TagKind.P, [(0, 0)])])
    with pytest.raises(MissingMeta):
        write_tagged_pdf(doc, tree, meta(title=""))


def test_alt_and_scope_attributes_round_trip():
    doc = simple_doc(["header", "value"])
    tree = StructNode(
        TagKind.DOCUMENT,
        [
            StructNode(TagKind.TABLE, [
                StructNode(TagKind.TR, [
                    StructNode(TagKind.TH, [(0, 0)], {"scope": "column"}),
                    StructNode(TagKind.TD, [(0, 1)]),
                ]),
            ]),
        ],
    )
    parsed = parse_pdf(write_tagged_pdf(doc, tree, meta()))
    assert parsed.struct_tree == tree

    img_doc = TaggedDocument(pages=[Page(0, 612, 792, [
        text_op(0, 0, 72, 700, "t"),
    ])])
    fig_tree = StructNode(
        TagKind.DOCUMENT,
        [StructNode(TagKind.FIGURE, [(0, 0)], {"alt": "Ünïcode ümlauts"})],
    )
    parsed = parse_pdf(write_tagged_pdf(img_doc, fig_tree, meta()))
    assert parsed.struct_tree == fig_tree


def test_set_meta_populates_ua_flags():
    doc = simple_doc(["x"])
    m = set_meta(doc, "T", "A", "en")
    assert m.ua_flags == frozenset({"marked", "display-doc-title", "pdfua-id"})


def test_set_meta_rejects_bad_language():
    doc = simple_doc(["x"])
    with pytest.raises(InvalidLanguageTag):
        set_meta(doc, "T", "A", "")
    with pytest.raises(InvalidLanguageTag):
        set_meta(doc, "T", "A", "not a tag!")


def test_set_meta_keeps_regional_subtag():
    doc = simple_doc(["x"])
    assert set_meta(doc, "T", "A", "de-CH").language == "de-CH"


def test_exported_flags_survive_round_trip():
    doc = simple_doc(["x"])
    tree = StructNode(TagKind.DOCUMENT, [StructNode(TagKind.P, [(0, 0)])])
    data = write_tagged_pdf(doc, tree, set_meta(doc, "T", "A", "de-CH"))
    parsed = parse_pdf(data)
    assert parsed.meta.language == "de-CH"
    assert parsed.meta.ua_flags == frozenset({"marked", "display-doc-title", "pdfua-id"})
    assert b"pdfuaid" in data
    assert re.search(rb"/Marked\s+true", data)


def test_preexisting_tree_preserved_on_parse(study):
    # write a tagged file, then parse: the tree is exposed, not rebuilt
    from pdfremedy.tagmap import assemble_meta, assemble_tree

    tree = assemble_tree(study.golden, study.doc)
    data = write_tagged_pdf(study.doc, tree, assemble_meta(study.golden))
    parsed = parse_pdf(data)
    assert parsed.struct_tree is not None
    assert parsed.struct_tree == tree


def test_malformed_error_carries_context():
    try:
        parse_pdf(b"")
    except MalformedPdf as exc:
        assert "offset" in str(exc)
    else:
        pytest.fail("expected MalformedPdf")
