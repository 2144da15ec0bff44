import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_fixture
from molnull.dynamic import AbstractionProfile, DynamicProfile
from molnull.ir import AbstractionKey
from molnull.reporting import (
    CrossTab,
    Level,
    ShareKind,
    build_dynamic_crosstab,
    build_static_crosstab,
    crosstab_from_classes,
    emit_report,
    optional_share,
    project_label,
    project_stats,
    recombination_share,
    round_half_up,
)
from molnull.static import DEFINITELY, POSSIBLY, NullabilityClass, fixpoint_analyze
from table_fixtures import (
    DEFINITE_CELLS,
    DEFINITE_PRINTED,
    DYNAMIC_CELLS,
    POSSIBLE_CELLS,
    POSSIBLE_PRINTED,
    tab,
)


def test_canonical_corpus_crosstabs():
    r = fixpoint_analyze(load_fixture("pdppn.mol"))
    t = build_static_crosstab(r, level=Level.DEFINITE_ONLY)
    assert t.column_totals == {1: 3}
    assert (t.cells[(1, 1)], t.cells[(1, 0)]) == (1, 2)
    t = build_static_crosstab(r, level=Level.DEFINITE_OR_POSSIBLE)
    assert (t.cells[(1, 1)], t.cells[(1, 0)]) == (2, 1)


def test_dynamic_crosstab():
    key = AbstractionKey("f", ("C", "C"))
    t = build_dynamic_crosstab(DynamicProfile({key: AbstractionProfile(3, (True, True))}))
    assert dict(t.cells) == {(2, 2): 1}
    assert build_dynamic_crosstab(DynamicProfile({})).total == 0


@pytest.mark.parametrize("cells,printed", [(DEFINITE_CELLS, DEFINITE_PRINTED), (POSSIBLE_CELLS, POSSIBLE_PRINTED)])
def test_fixture_grids_reproduce_printed_percentages(cells, printed):
    t = tab(cells)
    for cell, pct in printed.items():
        assert round_half_up(t.percent(*cell)) == pct, cell


def test_shares_are_exact_and_undefined_when_empty():
    t = tab(DEFINITE_CELLS)
    assert recombination_share(t, ShareKind.SINGLE_PARAM) == Fraction(1969, 3518)
    assert recombination_share(t, ShareKind.TRUE_RECOMBINATION) == Fraction(352, 1549)
    empty = CrossTab()
    assert recombination_share(empty, ShareKind.SINGLE_PARAM) is None
    assert recombination_share(empty, ShareKind.TRUE_RECOMBINATION) is None
    assert optional_share(empty) is None


def test_optional_share_extremes():
    assert optional_share(CrossTab.from_counts([((2, 2), 5), ((1, 1), 3)])) == 0
    assert optional_share(CrossTab.from_counts([((2, 1), 2), ((3, 0), 2)])) == 1


def test_project_stats_examples():
    s = project_stats([("a", 1, 50), ("b", 1, 50)])
    assert (s.mean, s.sample_stddev) == (50, 0)
    s = project_stats([("a", 1, 0), ("b", 1, 100)])
    assert s.sample_stddev == pytest.approx(math.sqrt((50**2 + 50**2) / 1))
    s = project_stats([("a", 1, 70)])
    assert s.mean == 70 and s.sample_stddev is None
    with pytest.raises(ValueError):
        project_stats([("a", 1, 101)])


@settings(max_examples=200)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=2, max_size=30))
def test_project_stats_two_pass(values):
    s = project_stats([(str(i), 1, v) for i, v in enumerate(values)])
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    assert s.mean == pytest.approx(mean, rel=1e-12, abs=1e-12)
    assert s.sample_stddev == pytest.approx(math.sqrt(var), rel=1e-12, abs=1e-9)


classes = st.sampled_from(list(NullabilityClass))
per_method = st.dictionaries(st.text("abc", min_size=1, max_size=4), st.lists(classes, min_size=1, max_size=7), max_size=25)


@given(per_method)
def test_column_conservation(methods):
    t = crosstab_from_classes(methods)
    for c, total in t.column_totals.items():
        assert sum(t.cells.get((c, r), 0) for r in range(c + 1)) == total
    assert t.total == len(methods)


@given(per_method, st.randoms(use_true_random=False))
def test_order_invariance(methods, rnd):
    items = list(methods.items())
    rnd.shuffle(items)
    assert crosstab_from_classes(dict(items)).cells == crosstab_from_classes(methods).cells


@given(per_method)
def test_possible_dominates_definite(methods):
    d = crosstab_from_classes(methods, DEFINITELY)
    p = crosstab_from_classes(methods, POSSIBLY, Level.DEFINITE_OR_POSSIBLE)
    for classes_ in methods.values():
        assert sum(c >= POSSIBLY for c in classes_) >= sum(c >= DEFINITELY for c in classes_)
    sd = recombination_share(d, ShareKind.TRUE_RECOMBINATION)
    sp = recombination_share(p, ShareKind.TRUE_RECOMBINATION)
    if sd is not None:
        assert sp >= sd


def test_emit_report_csv_and_text():
    assert emit_report([CrossTab()], "csv") == b"ref_params,required,count\n"
    t = tab(DYNAMIC_CELLS)
    text = emit_report([(t, "dynamic")], "text").decode()
    totals = next(line for line in text.splitlines() if line.startswith("total # of methods"))
    assert totals.split()[4:] == ["126", "202", "63", "24", "10", "4", "1", "430"]
    assert emit_report([t, project_stats([("a", 1, 10), ("b", 2, 30)])]) == emit_report(
        [t, project_stats([("a", 1, 10), ("b", 2, 30)])]
    )


def test_csv_cells_ordered_by_column_then_row():
    t = CrossTab.from_counts([((2, 1), 1), ((1, 0), 2)])
    rows = emit_report([t], "csv").decode().splitlines()[1:]
    assert rows == ["1,0,2", "1,1,0", "2,0,0", "2,1,1", "2,2,0"]


def test_project_label():
    assert project_label("p3_m10") == "p3"
    assert project_label("plain") == "default"


def test_crosstab_rejects_bad_cells():
    with pytest.raises(ValueError):
        CrossTab().add(2, 3)
