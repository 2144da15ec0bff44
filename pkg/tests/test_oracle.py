import pytest
from hypothesis import given, settings

from conftest import load_fixture
from molnull.ir import parse_program
from molnull.oracle import FAIL, OK, Oracle, OracleInfeasible, classify_all, oracle_classify, oracle_outcomes
from molnull.static import DEFINITELY, NOT_LOCALLY, POSSIBLY, fixpoint_analyze
from progen import programs


def test_canonical_shapes():
    p = load_fixture("pdppn.mol")
    assert oracle_classify(p, "pD", 0) is DEFINITELY
    assert oracle_classify(p, "pP", 0) is POSSIBLY
    assert oracle_classify(p, "pN", 0) is NOT_LOCALLY
    assert oracle_classify(load_fixture("guarded.mol"), "guarded", 0) is NOT_LOCALLY


def test_forward_matches_callee():
    p = load_fixture("forward_chain.mol")
    sink = oracle_classify(p, "c3", 0)
    assert oracle_classify(p, "c2", 0) is sink is DEFINITELY
    assert oracle_classify(p, "maybe", 0) is POSSIBLY


def test_outcome_sets():
    p = load_fixture("pdppn.mol")
    assert oracle_outcomes(p, p.index.by_qualified["pP"], 0) == {FAIL, OK}


def test_abstraction_key_takes_meet():
    p = parse_program(
        """
        classifier C; classifier D extends C;
        class A is C { method f(req p: C) { deref p; } }
        class B is D { method f(req p: C) { return; } }
        """
    )
    key = p.methods[0].key
    assert oracle_classify(p, "A.f", 0) is DEFINITELY
    assert oracle_classify(p, key, 0) is NOT_LOCALLY


def test_recursion_is_cut_not_looped():
    p = parse_program("classifier C; method r(req p: C) { if opaque { call r(p); } deref p; }")
    assert oracle_classify(p, "r", 0) is DEFINITELY
    p = parse_program("classifier C; method r(req p: C) { call r(p); }")
    assert oracle_classify(p, "r", 0) is NOT_LOCALLY


def test_budget_is_explicit():
    body = " ".join(f"if opaque {{ x{i} = new C; }} else {{ x{i} = null; }}" for i in range(14))
    p = parse_program(f"classifier C; method m(req p: C) {{ {body} }}")
    with pytest.raises(OracleInfeasible):
        oracle_classify(p, "m", 0, budget=1000)


def test_oracle_reuse_matches_fresh():
    p = load_fixture("forward_chain.mol")
    shared = Oracle(p)
    for m in p.methods:
        assert shared.classify(m, 0) is oracle_classify(p, m, 0)


@settings(max_examples=150, deadline=None)
@given(programs())
def test_analysis_equals_oracle_on_single_null_programs(src):
    p = parse_program(src)
    assert fixpoint_analyze(p).method_classes == classify_all(p)


@settings(max_examples=150, deadline=None)
@given(programs(single_null=False))
def test_analysis_is_a_lower_bound(src):
    p = parse_program(src)
    static = fixpoint_analyze(p).method_classes
    oracle = classify_all(p)
    assert all(static[k] <= oracle[k] for k in oracle)
