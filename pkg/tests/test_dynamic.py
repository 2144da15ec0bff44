import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_fixture
from molnull.dynamic import (
    COMPLETED,
    EXPLICIT_FAILURE,
    NULL_DEREF,
    STEP_LIMIT,
    AbstractionProfile,
    CallRecord,
    DynamicProfile,
    ExecutionTrace,
    aggregate_trace,
    run_program,
)
from molnull.ir import AbstractionKey, MolError, parse_program

PROG = parse_program(
    """
    classifier C; classifier D extends C;
    class A is C { method f(req p: C, opt q: C) { deref p; } }
    class B is D { method f(req p: C, opt q: C) { return; } }
    method main() {
      x = new C; y = new D;
      call f(x, null);
      call f(y, x);
      if opaque { call f(null, x); }
    }
    method boom() { fail; }
    method spin() { while opaque { x = new C; } }
    method forever() { while opaque { x = new C; } call forever(); }
    entry main, boom;
    """
)
F = AbstractionKey("f", ("C", "C"))


def test_records_and_dispatch():
    trace = run_program(PROG, "main", seed=3)
    assert trace.records[0] == CallRecord(F, "A.f", (False, True))
    assert trace.records[1] == CallRecord(F, "B.f", (False, False))


def test_outcomes():
    outcomes = {run_program(PROG, "main", s).outcome for s in range(20)}
    assert outcomes == {COMPLETED, NULL_DEREF}
    failing = next(run_program(PROG, "main", s) for s in range(20) if run_program(PROG, "main", s).outcome == NULL_DEREF)
    assert failing.location.startswith("A.f:")
    boom = run_program(PROG, "boom", 0)
    assert boom.outcome == EXPLICIT_FAILURE and boom.location == "boom:11:21"


def test_step_limit():
    trace = run_program(PROG, "forever", 0, step_limit=50)
    assert trace.outcome == STEP_LIMIT
    assert trace.steps == 50


def test_step_accounting():
    # entry body: two assigns, three calls (each callee runs one statement), one if
    trace = run_program(PROG, "main", seed=next(s for s in range(50) if run_program(PROG, "main", s).total_calls == 2))
    assert trace.outcome == COMPLETED
    assert trace.steps == 2 + 2 + 2 + 1


@given(st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_runs_are_pure_functions_of_seed(seed):
    a = run_program(PROG, "spin", seed)
    b = run_program(PROG, "spin", seed)
    assert a.serialize() == b.serialize() and a.steps == b.steps


def test_serialize_format():
    trace = run_program(PROG, "main", seed=3)
    lines = trace.serialize().splitlines()
    assert lines[0] == "f(C,C)\tA.f\t01"
    assert lines[-1].startswith("#end\toutcome=")
    assert lines[-1].endswith(f"seed=3\ttotal_calls={trace.total_calls}")


def test_entry_arguments_follow_qualifiers():
    p = parse_program("classifier C; method m(req a: C, opt b: C, val v) { deref a; if b == null { fail; } }")
    assert run_program(p, "m", 0).outcome == EXPLICIT_FAILURE


def test_aggregate():
    traces = [run_program(PROG, "main", s) for s in range(30)]
    prof = aggregate_trace(traces, PROG).per_abstraction[F]
    assert prof.call_count == sum(t.total_calls for t in traces)
    assert prof.never_null == (False, False)
    assert prof.implementations == {"A.f", "B.f"}


def test_aggregate_rejects_unknown_abstraction():
    bad = ExecutionTrace([CallRecord(AbstractionKey("zz", ()), "zz", ())], COMPLETED, 0)
    with pytest.raises(MolError):
        aggregate_trace([bad], PROG)


def test_profile_csv_round_trip():
    prof = aggregate_trace([run_program(PROG, "main", 3)], PROG)
    text = prof.to_csv()
    assert text.splitlines()[0] == "abstraction,ref_param_count,call_count,never_null_bitstring"
    again = DynamicProfile.from_csv(text)
    assert {k: (v.call_count, v.never_null) for k, v in again.per_abstraction.items()} == {
        k: (v.call_count, v.never_null) for k, v in prof.per_abstraction.items()
    }


profiles = st.dictionaries(
    st.sampled_from([AbstractionKey(n, ("C", "C")) for n in "abc"]),
    st.builds(AbstractionProfile, st.integers(1, 9), st.tuples(st.booleans(), st.booleans())),
    max_size=3,
).map(DynamicProfile)


def _flat(p):
    return {k: (v.call_count, v.never_null) for k, v in p.per_abstraction.items()}


@given(profiles, profiles, profiles)
def test_merge_commutative_associative(a, b, c):
    assert _flat(a.merge(b)) == _flat(b.merge(a))
    assert _flat(a.merge(b).merge(c)) == _flat(a.merge(b.merge(c)))


def test_clock_client_runs():
    p = load_fixture("clock_work.mol")
    trace = run_program(p, "clientSetup", 0)
    assert trace.outcome == COMPLETED
    assert [r.implementation for r in trace.records] == ["Clock.display", "Window.setColor"]
