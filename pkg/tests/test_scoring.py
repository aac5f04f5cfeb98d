"""Score formula spot-checks, criterion semantics, pooling, and a naive oracle."""

import random

import pytest

from docgen import scored_doc
from pdfremedy.model import StructNode, TagKind
from pdfremedy.scoring import (
    CRITERION_KEYS, CriterionResult, ScoreReport, TruthMap, TruthMismatch,
    format_csv, format_table, score_corpus, score_document,
)

HEADING_TAG_SET = {TagKind.H1, TagKind.H2, TagKind.H3, TagKind.H4, TagKind.H5, TagKind.H6}


# -- the published arithmetic --------------------------------------------------------

@pytest.mark.parametrize(
    "ct,wt,expected",
    [(16, 1, "94.1"), (12, 5, "70.6"), (36, 23, "61.0"), (4, 5, "44.4")],
)
def test_score_formula_spot_checks(ct, wt, expected):
    result = CriterionResult("headings_tagged", ct=ct, wt=wt)
    assert f"{result.score:.1f}" == expected


def test_report_average_is_mean_of_defined_rows():
    report = ScoreReport(name="x")
    report.row("headings_tagged").ct = 1
    report.row("tables_tagged").wt = 1
    # all other criteria undefined
    assert report.average == pytest.approx(50.0)


# -- perfect tagging ------------------------------------------------------------------

def test_perfect_tree_scores_100_everywhere():
    doc, truth, _ = scored_doc()
    report = score_document(doc, truth)
    for key in CRITERION_KEYS:
        row = report.row(key)
        assert row.total > 0, key
        assert row.score == pytest.approx(100.0), key
    assert report.average == pytest.approx(100.0)


def test_untagged_document_scores_zero():
    doc, truth, _ = scored_doc()
    doc.struct_tree = None
    report = score_document(doc, truth)
    for key in CRITERION_KEYS:
        assert report.row(key).score == pytest.approx(0.0), key


# -- criterion semantics ----------------------------------------------------------------

def test_title_as_paragraph_accepted_with_level_shift():
    doc, truth, tree = scored_doc()
    title_node = tree.children[0]
    title_node.tag = TagKind.P
    # shift every other heading up one level to match the paragraph title
    tree.children[1].tag = TagKind.H1
    tree.children[3].tag = TagKind.H2
    report = score_document(doc, truth)
    assert report.row("headings_tagged").score == pytest.approx(100.0)
    assert report.row("headings_level").score == pytest.approx(100.0)


def test_title_as_h1_with_unshifted_levels():
    doc, truth, _ = scored_doc()
    report = score_document(doc, truth)
    assert report.row("headings_level").score == pytest.approx(100.0)


def test_wrong_level_counts_against_level_only():
    doc, truth, tree = scored_doc()
    tree.children[3].tag = TagKind.H2  # truth says level 3 under an H1 title
    report = score_document(doc, truth)
    assert report.row("headings_tagged").score == pytest.approx(100.0)
    assert report.row("headings_level").ct == 2
    assert report.row("headings_level").wt == 1


def test_caption_inside_figure_not_an_error():
    doc, truth, tree = scored_doc()
    fig = next(n for n in tree.iter_nodes() if n.tag == TagKind.FIGURE)
    cap = next(n for n in tree.iter_nodes() if n.tag == TagKind.CAPTION)
    tree.children.remove(cap)
    fig.children.append(cap)
    report = score_document(doc, truth)
    assert report.row("figures_tagged").score == pytest.approx(100.0)
    assert report.row("captions").score == pytest.approx(100.0)


def test_formula_reference_in_or_out_accepted():
    doc, truth, tree = scored_doc()
    formula = next(n for n in tree.iter_nodes() if n.tag == TagKind.FORMULA)
    ref = truth.element("formula").optional_ops
    formula.children = [c for c in formula.children if c not in ref]
    report = score_document(doc, truth)
    assert report.row("formulas_tagged").score == pytest.approx(100.0)


def test_formula_missing_alt_fails_only_alt():
    doc, truth, tree = scored_doc()
    formula = next(n for n in tree.iter_nodes() if n.tag == TagKind.FORMULA)
    formula.attributes.pop("alt")
    report = score_document(doc, truth)
    assert report.row("formulas_tagged").score == pytest.approx(100.0)
    assert report.row("formulas_alt").score == pytest.approx(0.0)


def test_decorative_swallowing_figure_fails_figures():
    doc, truth, tree = scored_doc()
    fig = next(n for n in tree.iter_nodes() if n.tag == TagKind.FIGURE)
    tree.children.remove(fig)  # figure dropped entirely (marked artifact)
    for op in doc.pages[0].ops:
        if op.id in truth.element("figure").ops:
            op.artifact = True
    report = score_document(doc, truth)
    assert report.row("figures_tagged").score == pytest.approx(0.0)
    assert report.row("all_content_tagged").score == pytest.approx(100.0)


def test_reading_order_breaks_on_interrupted_sentence():
    doc, truth, tree = scored_doc()
    para = next(n for n in tree.iter_nodes() if n.tag == TagKind.P)
    fig = next(n for n in tree.iter_nodes() if n.tag == TagKind.FIGURE)
    # wedge the figure between the two linked paragraph ops
    a, b = para.children
    para.children = [a]
    tree.children.remove(fig)
    insert_at = tree.children.index(para) + 1
    tree.children[insert_at:insert_at] = [fig, StructNode(TagKind.P, [b])]
    report = score_document(doc, truth)
    assert report.row("reading_order").score == pytest.approx(0.0)
    # swapping whole blocks is not an error
    doc2, truth2, tree2 = scored_doc()
    tree2.children[2], tree2.children[4] = tree2.children[4], tree2.children[2]
    report2 = score_document(doc2, truth2)
    assert report2.row("reading_order").score == pytest.approx(100.0)


def test_incomplete_page_fails_all_content_and_reading_order():
    doc, truth, tree = scored_doc()
    para = next(n for n in tree.iter_nodes() if n.tag == TagKind.P)
    dropped = para.children.pop()  # one op now untagged and not artifact
    report = score_document(doc, truth)
    assert report.row("all_content_tagged").score == pytest.approx(0.0)
    assert report.row("reading_order").score == pytest.approx(0.0)


def test_extra_list_tag_on_non_list_content_not_an_error():
    doc, truth, tree = scored_doc()
    para = next(n for n in tree.iter_nodes() if n.tag == TagKind.P)
    idx = tree.children.index(para)
    tree.children[idx] = StructNode(TagKind.L, [
        StructNode(TagKind.LI, [StructNode(TagKind.LBODY, list(para.children))])
    ])
    report = score_document(doc, truth)
    assert report.row("lists_tagged").score == pytest.approx(100.0)
    assert report.row("lists_structure").score == pytest.approx(100.0)


def test_table_struct_requires_grid_agreement():
    doc, truth, tree = scored_doc()
    table = next(n for n in tree.iter_nodes() if n.tag == TagKind.TABLE)
    # merge the two rows into one: tagged fine, structure wrong
    cells = [c for tr in table.children for c in tr.children]
    table.children = [StructNode(TagKind.TR, cells)]
    report = score_document(doc, truth)
    assert report.row("tables_tagged").score == pytest.approx(100.0)
    assert report.row("tables_structure").score == pytest.approx(0.0)


def test_truth_mismatch_on_unknown_ops():
    doc, truth, _ = scored_doc()
    truth.elements[0].ops.add((7, 99))
    with pytest.raises(TruthMismatch):
        score_document(doc, truth)


def test_monotonic_improvement():
    doc, truth, tree = scored_doc()
    heading = tree.children[1]
    heading.tag = TagKind.P  # break one heading
    before = score_document(doc, truth)
    heading.tag = TagKind.H2  # fix it again
    after = score_document(doc, truth)
    for key in CRITERION_KEYS:
        b, a = before.row(key).score, after.row(key).score
        if b is not None:
            assert a is not None and a >= b


# -- corpus pooling ------------------------------------------------------------------

def test_corpus_pools_counts_not_percentages():
    doc1, truth1, tree1 = scored_doc()
    doc2, truth2, tree2 = scored_doc()
    # doc1: 1 of its 3 headings correct; doc2's truth only declares the title
    tree1.children[1].tag = TagKind.P
    tree1.children[3].tag = TagKind.P
    truth2.elements = [
        el for el in truth2.elements if el.role != "heading" or el.is_title
    ]
    pooled = score_corpus([(doc1, truth1), (doc2, truth2)])
    row = pooled.row("headings_tagged")
    assert (row.ct, row.wt) == (2, 2)
    assert row.score == pytest.approx(50.0)
    # mean of per-document percentages would be (33.3 + 100)/2 = 66.7
    assert row.score != pytest.approx((100.0 / 3 + 100.0) / 2, abs=1.0)


def test_corpus_counts_documents_for_all_content():
    docs = []
    for i in range(10):
        doc, truth, tree = scored_doc()
        if i >= 7:
            next(n for n in tree.iter_nodes() if n.tag == TagKind.P).children.pop()
        docs.append((doc, truth))
    pooled = score_corpus(docs, name="corpus")
    row = pooled.row("all_content_tagged")
    assert (row.ct, row.wt) == (7, 3)
    assert f"{row.score:.1f}" == "70.0"
    assert row.total == 10


def test_single_document_corpus_equals_score_document():
    doc, truth, _ = scored_doc()
    single = score_document(doc, truth)
    pooled = score_corpus([(doc, truth)])
    for key in CRITERION_KEYS:
        assert (pooled.row(key).ct, pooled.row(key).wt) == (
            single.row(key).ct, single.row(key).wt,
        )


def test_undefined_criteria_excluded_from_average():
    doc, truth, _ = scored_doc()
    truth.elements = [el for el in truth.elements if el.role == "heading"]
    truth.continuity_links = []
    report = score_document(doc, truth)
    assert report.row("formulas_tagged").score is None
    defined = [r.score for r in report.rows.values() if r.score is not None]
    assert report.average == pytest.approx(sum(defined) / len(defined))


# -- report formats ------------------------------------------------------------------

def test_table_format_has_13_rows_and_counts():
    doc, truth, _ = scored_doc()
    text = format_table([score_document(doc, truth, name="demo")])
    lines = text.splitlines()
    assert len(lines) == 2 + 13 + 1  # header, rule, criteria, average
    assert "Headings Tagged" in text
    assert "(3)" in text  # three heading elements pooled
    assert lines[-1].startswith("Average Score")


def test_csv_is_deterministic():
    doc, truth, _ = scored_doc()
    a = format_csv([score_document(doc, truth, name="demo")])
    b = format_csv([score_document(doc, truth, name="demo")])
    assert a == b
    assert a.splitlines()[0] == "criterion,demo score,demo total"


def test_truth_json_round_trip():
    _, truth, _ = scored_doc()
    again = TruthMap.from_json(truth.to_json())
    assert again.to_json() == truth.to_json()


# -- randomized corruption vs a naive recount -------------------------------------------

def _naive_counts(doc, truth):
    """Independent quadratic recount of every criterion."""
    tree = doc.struct_tree
    nodes = list(tree.iter_nodes()) if tree else []
    node_ops = {id(n): set(n.leaf_ops()) for n in nodes}
    flat = tree.leaf_ops() if tree else []
    pos = {op: i for i, op in enumerate(flat)}
    artifact = {op.id for p in doc.pages for op in p.ops if op.artifact}
    every = [op.id for p in doc.pages for op in p.ops]
    counts = {}

    def jac(a, b):
        return len(a & b) / len(a | b) if a | b else 1.0

    def find(el, tags, extra):
        best, bj = None, 0.0
        for n in nodes:
            if n.tag not in tags:
                continue
            j = jac(el.ops, node_ops[id(n)])
            if j > bj:
                best, bj = n, j
        if best is None or bj < 0.5:
            return None
        ops = node_ops[id(best)]
        if not el.ops <= ops or (ops - el.ops - extra):
            return None
        return best

    def caption_extra(el):
        return set().union(*[
            c.ops for c in truth.elements
            if c.role == "caption" and c.caption_for == el.id
        ] or [set()])

    ok_all = all(op in set(flat) | artifact for op in every)
    counts["all_content_tagged"] = (1, 0) if ok_all else (0, 1)

    ro = [0, 0]
    for page in doc.pages:
        complete = all(
            op.id in set(flat) | artifact for op in page.ops
        )
        intact = all(
            not (a[0] == page.index)
            or (a in pos and b in pos and pos[b] == pos[a] + 1)
            for a, b in truth.continuity_links
        )
        ro[0 if complete and intact else 1] += 1
    counts["reading_order"] = tuple(ro)

    def tally(role, fn):
        ct = wt = 0
        for el in truth.elements:
            if el.role != role:
                continue
            if fn(el):
                ct += 1
            else:
                wt += 1
        return ct, wt

    title = next((e for e in truth.elements if e.is_title), None)
    tmode = "h1"
    if title is not None:
        m = find(title, HEADING_TAG_SET | {TagKind.P}, set())
        if m is not None and m.tag == TagKind.P:
            tmode = "p"

    def heading_ok(el):
        tags = HEADING_TAG_SET | ({TagKind.P} if el.is_title else set())
        return find(el, tags, set()) is not None

    def level_ok(el):
        tags = HEADING_TAG_SET | ({TagKind.P} if el.is_title else set())
        m = find(el, tags, set())
        if m is None:
            return False
        if el.is_title:
            return m.tag in (TagKind.P, TagKind.H1)
        if m.tag not in HEADING_TAG_SET:
            return False
        actual = int(m.tag.value[1])
        return actual == (el.level if tmode == "h1" else el.level - 1)

    counts["headings_tagged"] = tally("heading", heading_ok)
    counts["headings_level"] = tally("heading", level_ok)
    counts["tables_tagged"] = tally(
        "table", lambda el: find(el, {TagKind.TABLE}, caption_extra(el)) is not None
    )

    def grid_ok(el):
        m = find(el, {TagKind.TABLE}, caption_extra(el))
        if m is None or el.grid is None:
            return False
        got = []
        for tr in m.children:
            if isinstance(tr, StructNode) and tr.tag == TagKind.TR:
                got.append([
                    (c.tag == TagKind.TH, frozenset(c.leaf_ops()))
                    for c in tr.children
                    if isinstance(c, StructNode) and c.tag in (TagKind.TH, TagKind.TD)
                    and c.leaf_ops()
                ])
        want = []
        for r, row in enumerate(el.grid):
            want.append([
                (
                    (el.header_mode in ("first_row", "both") and r == 0)
                    or (el.header_mode in ("first_col", "both") and c == 0),
                    frozenset(cell),
                )
                for c, cell in enumerate(row) if cell
            ])
        return got == want

    counts["tables_structure"] = tally("table", grid_ok)
    counts["lists_tagged"] = tally(
        "list", lambda el: find(el, {TagKind.L}, caption_extra(el)) is not None
    )

    def items_ok(el):
        m = find(el, {TagKind.L}, caption_extra(el))
        if m is None or el.items is None:
            return False
        got = []

        def walk(l):
            for li in l.children:
                if not isinstance(li, StructNode) or li.tag != TagKind.LI:
                    continue
                mine = set()
                for part in li.children:
                    if isinstance(part, StructNode) and part.tag == TagKind.L:
                        continue
                    mine |= set(part.leaf_ops()) if isinstance(part, StructNode) else {part}
                got.append(frozenset(mine))
                for part in li.children:
                    if isinstance(part, StructNode) and part.tag == TagKind.L:
                        walk(part)

        walk(m)
        return got == [frozenset(i) for i in el.items]

    counts["lists_structure"] = tally("list", items_ok)
    counts["figures_tagged"] = tally(
        "figure", lambda el: find(el, {TagKind.FIGURE}, caption_extra(el)) is not None
    )

    def fig_alt(el):
        m = find(el, {TagKind.FIGURE}, caption_extra(el))
        return m is not None and (bool(m.attributes.get("alt")) or not el.requires_alt)

    counts["figures_alt"] = tally("figure", fig_alt)
    counts["formulas_tagged"] = tally(
        "formula", lambda el: find(el, {TagKind.FORMULA}, el.optional_ops) is not None
    )

    def form_alt(el):
        m = find(el, {TagKind.FORMULA}, el.optional_ops)
        return m is not None and (bool(m.attributes.get("alt")) or not el.requires_alt)

    counts["formulas_alt"] = tally("formula", form_alt)
    counts["captions"] = tally(
        "caption", lambda el: find(el, {TagKind.CAPTION}, set()) is not None
    )
    return counts


def _corrupt(rng, doc, truth, tree):
    roll = rng.random()
    nodes = [n for n in tree.iter_nodes() if n is not tree]
    if roll < 0.25 and nodes:
        victim = rng.choice(nodes)
        for parent in tree.iter_nodes():
            if victim in parent.children:
                parent.children.remove(victim)
                parent.children.extend(victim.leaf_ops())
                break
    elif roll < 0.45 and nodes:
        victim = rng.choice(nodes)
        victim.tag = rng.choice([TagKind.P, TagKind.H1, TagKind.H4, TagKind.FIGURE])
    elif roll < 0.6:
        rng.shuffle(tree.children)
    elif roll < 0.75 and nodes:
        victim = rng.choice(nodes)
        victim.attributes.pop("alt", None)
    elif roll < 0.9 and len(tree.children) >= 2:
        a, b = rng.sample(range(len(tree.children)), 2)
        tree.children[a], tree.children[b] = tree.children[b], tree.children[a]
    else:
        for op in doc.pages[0].ops:
            if rng.random() < 0.2:
                op.artifact = not op.artifact


def test_randomized_corruption_matches_naive_recount():
    rng = random.Random(99)
    for _ in range(120):
        doc, truth, tree = scored_doc()
        for _ in range(rng.randint(1, 4)):
            _corrupt(rng, doc, truth, tree)
        report = score_document(doc, truth)
        expected = _naive_counts(doc, truth)
        for key in CRITERION_KEYS:
            row = report.row(key)
            assert (row.ct, row.wt) == expected[key], key
