"""Interprocedural classification of reference parameters.

Every reference parameter ends up in one of three classes: not locally
required, possibly required, or definitely required. Each method body is
analysed once, producing a :class:`MethodTransfer` that maps the classes of
callee parameters to the classes of this method's parameters. The transfers
are then iterated from the all-``NOT_LOCALLY_REQUIRED`` environment until
nothing changes.
"""

from __future__ import annotations

import csv
import io
from array import array
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Mapping, NamedTuple, Optional, Union

from molnull import kernels
from molnull.ir import (
    AbstractionKey,
    Assign,
    Call,
    Deref,
    Diagnostic,
    Fail,
    If,
    IsNull,
    MethodDecl,
    MolError,
    New,
    NotNull,
    NullLit,
    Opaque,
    Program,
    Return,
    Var,
    While,
    iter_statements,
    method_variables,
)

DEFAULT_LOOP_BOUND = 1
DEFAULT_MAX_PATHS = 4096


class NullabilityClass(IntEnum):
    """Chain lattice NOT_LOCALLY_REQUIRED < POSSIBLY_REQUIRED < DEFINITELY_REQUIRED."""

    NOT_LOCALLY_REQUIRED = 0
    POSSIBLY_REQUIRED = 1
    DEFINITELY_REQUIRED = 2

    def join(self, other: "NullabilityClass") -> "NullabilityClass":
        return self if self >= other else other

    def meet(self, other: "NullabilityClass") -> "NullabilityClass":
        return self if self <= other else other

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, text: str) -> "NullabilityClass":
        return cls[text.strip().upper()]


NOT_LOCALLY = NullabilityClass.NOT_LOCALLY_REQUIRED
POSSIBLY = NullabilityClass.POSSIBLY_REQUIRED
DEFINITELY = NullabilityClass.DEFINITELY_REQUIRED


class _LocalFail:
    __slots__ = ()

    def __repr__(self) -> str:
        return "LocalFail"

    def __reduce__(self):
        return "LOCAL_FAIL"


LOCAL_FAIL = _LocalFail()


class CalleeUse(NamedTuple):
    callee: AbstractionKey
    position: int


PathEvent = Union[_LocalFail, CalleeUse]
PathSet = frozenset  # frozenset of frozensets of PathEvent


@dataclass(frozen=True)
class FallbackSummary:
    local: NullabilityClass
    dependencies: frozenset = frozenset()


@dataclass(frozen=True)
class MethodTransfer:
    method: str
    key: AbstractionKey
    per_param: Mapping = field(default_factory=dict)

    @property
    def over_budget(self) -> bool:
        return any(isinstance(v, FallbackSummary) for v in self.per_param.values())


class _PathBudget(Exception):
    pass


# Abstract values along one path. The entry null is exact: under the
# hypothesis the chosen parameter is null and every other reference
# parameter holds an object, and ``opaque`` only ever produces scalars.
_UNSET, _NULL, _OBJ, _VAL = 0, 1, 2, 3


class _Summarizer:
    def __init__(self, method: MethodDecl, program: Program, loop_bound: int, max_paths: int):
        self.method = method
        self.index = program.index
        self.loop_bound = loop_bound
        self.max_paths = max_paths
        self.slots = {v: i for i, v in enumerate(method_variables(method))}
        self.call_keys: dict = {}

    def callee_key(self, s: Call) -> AbstractionKey:
        key = self.call_keys.get(s)
        if key is None:
            try:
                key = self.index.resolve_call(s.method, len(s.args))
            except KeyError:
                raise MolError(
                    [Diagnostic("unresolved", f"unresolved call target {s.method}/{len(s.args)}",
                                self.method.qualified_name, s.line, s.col)]
                ) from None
            self.call_keys[s] = key
        return key

    def run(self, null_param: int) -> PathSet:
        state = [_UNSET] * len(self.slots)
        for i, p in enumerate(self.method.params):
            state[i] = (_NULL if i == null_param else _OBJ) if p.is_reference else _VAL
        live, done = self.block(self.method.body, {(tuple(state), frozenset())})
        done |= {ev for _, ev in live}
        if len(done) > self.max_paths:
            raise _PathBudget
        return frozenset(done)

    def _set(self, state: tuple, var: str, value: int) -> tuple:
        i = self.slots[var]
        return state[:i] + (value,) + state[i + 1:]

    def cond(self, cond, state: tuple) -> tuple:
        """(may be true, may be false) for ``cond`` in ``state``."""
        if isinstance(cond, Opaque):
            return True, True
        is_null = state[self.slots[cond.var]] == _NULL
        if isinstance(cond, IsNull):
            return is_null, not is_null
        return not is_null, is_null

    def block(self, stmts: tuple, live: set):
        done: set = set()
        for s in stmts:
            if not live:
                break
            live = self.stmt(s, live, done)
            if len(live) > self.max_paths or len(done) > self.max_paths:
                raise _PathBudget
        return live, done

    def stmt(self, s, live: set, done: set) -> set:
        if isinstance(s, Deref):
            nxt = set()
            slot = self.slots[s.var]
            for st, ev in live:
                if st[slot] == _NULL:
                    done.add(ev | {LOCAL_FAIL})
                else:
                    nxt.add((st, ev))
            return nxt
        if isinstance(s, Assign):
            e = s.expr
            nxt = set()
            for st, ev in live:
                if isinstance(e, NullLit):
                    v = _NULL
                elif isinstance(e, New):
                    v = _OBJ
                elif isinstance(e, Var):
                    v = st[self.slots[e.name]]
                else:
                    v = _VAL
                nxt.add((self._set(st, s.var, v), ev))
            return nxt
        if isinstance(s, Call):
            key = self.callee_key(s)
            nxt = set()
            for st, ev in live:
                nulls = [j for j, a in enumerate(s.args) if a is None or st[self.slots[a]] == _NULL]
                # A callee's classes assume exactly one null argument; with
                # several nulls nothing is claimed about this call.
                if len(nulls) == 1:
                    ev = ev | {CalleeUse(key, nulls[0])}
                nxt.add((st, ev))
            return nxt
        if isinstance(s, Return):
            done.update(ev for _, ev in live)
            return set()
        if isinstance(s, Fail):
            done.update(ev | {LOCAL_FAIL} for _, ev in live)
            return set()
        if isinstance(s, If):
            then_in, else_in = set(), set()
            for c in live:
                t, f = self.cond(s.cond, c[0])
                if t:
                    then_in.add(c)
                if f:
                    else_in.add(c)
            a, da = self.block(s.then, then_in)
            b, db = self.block(s.orelse, else_in)
            done |= da | db
            return a | b
        if isinstance(s, While):
            exits: set = set()
            current = live
            for k in range(self.loop_bound + 1):
                cont = set()
                for c in current:
                    t, f = self.cond(s.cond, c[0])
                    if f:
                        exits.add(c)
                    if t:
                        cont.add(c)
                if k == self.loop_bound or not cont:
                    break
                current, d = self.block(s.body, cont)
                done |= d
            return exits
        raise TypeError(f"unknown statement {s!r}")


def _fallback(method: MethodDecl, null_param: int, callee_key) -> FallbackSummary:
    """Cheap summary used once the path budget is exhausted.

    DEFINITELY_REQUIRED only when the entry null is dereferenced (or ``fail``
    runs) before the first branch; otherwise at most POSSIBLY_REQUIRED.
    """
    name = method.params[null_param].name
    holds = {name}
    local = None
    for s in method.body:
        if isinstance(s, (If, While, Return)):
            break
        if isinstance(s, Fail) or (isinstance(s, Deref) and s.var in holds):
            local = DEFINITELY
            break
        if isinstance(s, Assign):
            if isinstance(s.expr, Var) and s.expr.name in holds:
                holds.add(s.var)
            else:
                holds.discard(s.var)
    aliases = {name}
    for s in iter_statements(method.body):
        if isinstance(s, Assign) and isinstance(s.expr, Var) and s.expr.name in aliases:
            aliases.add(s.var)
    deps = set()
    for s in iter_statements(method.body):
        if local is None and (isinstance(s, Fail) or (isinstance(s, Deref) and s.var in aliases)):
            local = POSSIBLY
        if isinstance(s, Call):
            key = callee_key(s)
            deps.update((key, j) for j, a in enumerate(s.args) if a is not None and a in aliases)
    return FallbackSummary(local or NOT_LOCALLY, frozenset(deps))


def summarize_method(
    method: MethodDecl,
    program: Program,
    loop_bound: int = DEFAULT_LOOP_BOUND,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> MethodTransfer:
    """Build the per-parameter path summary of ``method``.

    For each reference parameter the body is executed under the hypothesis
    that this parameter is null and every other reference parameter is not.
    Opaque conditions go both ways, null tests are decided, and loops run
    their body 0..``loop_bound`` times. Each surviving path is recorded as the
    set of its events; paths end at ``return``, ``fail``, a null dereference,
    or the end of the body.
    """
    if loop_bound < 0 or max_paths < 1:
        raise ValueError("loop_bound must be >= 0 and max_paths >= 1")
    summ = _Summarizer(method, program, loop_bound, max_paths)
    per_param: dict = {}
    for i, p in enumerate(method.params):
        if not p.is_reference:
            continue
        try:
            per_param[i] = summ.run(i)
        except _PathBudget:
            per_param[i] = _fallback(method, i, summ.callee_key)
    return MethodTransfer(method.qualified_name, method.key, per_param)


def _path_status(path: frozenset, env: Mapping) -> NullabilityClass:
    if LOCAL_FAIL in path:
        return DEFINITELY
    status = NOT_LOCALLY
    for ev in path:
        try:
            status = status.join(NullabilityClass(env[(ev.callee, ev.position)]))
        except KeyError:
            raise KeyError(f"environment has no entry for {ev.callee} position {ev.position}") from None
    return status


def evaluate_transfer(t: MethodTransfer, env: Mapping) -> dict:
    """Classify each parameter of ``t`` against callee classes in ``env``.

    A path fails if it fails locally or uses a DEFINITELY_REQUIRED callee
    position, may fail if it uses a POSSIBLY_REQUIRED one, and is fine
    otherwise. All paths failing gives DEFINITELY_REQUIRED, all fine gives
    NOT_LOCALLY_REQUIRED, anything else POSSIBLY_REQUIRED.
    """
    result = {}
    for i, summary in t.per_param.items():
        if isinstance(summary, FallbackSummary):
            dep = NOT_LOCALLY
            for d in summary.dependencies:
                if env[d] >= POSSIBLY:
                    dep = POSSIBLY
            result[i] = summary.local.join(dep)
            continue
        statuses = {_path_status(path, env) for path in summary}
        if not statuses or statuses == {NOT_LOCALLY}:
            result[i] = NOT_LOCALLY
        elif statuses == {DEFINITELY}:
            result[i] = DEFINITELY
        else:
            result[i] = POSSIBLY
    return result


@dataclass
class StaticResult:
    """Fixpoint classes per abstraction position and per implementation position."""

    classes: dict
    method_classes: dict
    iterations: int
    path_budget_exceeded: set
    loop_bound: int = DEFAULT_LOOP_BOUND
    max_paths: int = DEFAULT_MAX_PATHS
    history: Optional[list] = None

    @property
    def entry_count(self) -> int:
        return len(self.method_classes)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# loop_bound={self.loop_bound},max_paths={self.max_paths},sweeps={self.iterations}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "param_index", "class"])
        for (name, i), c in self.method_classes.items():
            w.writerow([name, i, c.label])
        return buf.getvalue()

    def to_text(self) -> str:
        rows = [(name, str(i), c.label) for (name, i), c in self.method_classes.items()]
        width = max([len("method")] + [len(r[0]) for r in rows])
        lines = [
            f"loop_bound: {self.loop_bound}",
            f"max_paths: {self.max_paths}",
            f"sweeps: {self.iterations}",
            "",
            f"{'method'.ljust(width)}  param  class",
        ]
        lines += [f"{n.ljust(width)}  {i.rjust(5)}  {c}" for n, i, c in rows]
        return "\n".join(lines) + "\n"


def read_static_csv(text: str) -> dict:
    """Parse :meth:`StaticResult.to_csv` output into ``{method: {index: class}}``."""
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    out: dict = {}
    for rec in csv.DictReader(rows):
        out.setdefault(rec["method"], {})[int(rec["param_index"])] = NullabilityClass.from_label(rec["class"])
    return out


class _FlatTransfers:
    """Transfers flattened into the array layout described in :mod:`molnull.kernels`."""

    def __init__(self, transfers: list, program: Program):
        self.slots: dict = {}
        for m in program.methods:
            for i in m.signature.reference_positions:
                self.slots.setdefault((m.key, i), len(self.slots))
        self.entries: list = []
        kind, local, path_start, path_fail, ev_start, ev_slot, entry_slot = (array("i") for _ in range(7))
        for t in transfers:
            for i, summary in sorted(t.per_param.items()):
                self.entries.append((t.method, i))
                entry_slot.append(self.slots[(t.key, i)])
                path_start.append(len(path_fail))
                if isinstance(summary, FallbackSummary):
                    kind.append(1)
                    local.append(int(summary.local))
                    ev_start.append(len(ev_slot))
                    path_fail.append(0)
                    ev_slot.extend(self._slot(d) for d in sorted(summary.dependencies, key=str))
                    continue
                kind.append(0)
                local.append(0)
                for path in sorted(summary, key=lambda p: sorted(map(repr, p))):
                    ev_start.append(len(ev_slot))
                    path_fail.append(1 if LOCAL_FAIL in path else 0)
                    uses = sorted((e for e in path if isinstance(e, CalleeUse)), key=repr)
                    ev_slot.extend(self._slot(u) for u in uses)
        path_start.append(len(path_fail))
        ev_start.append(len(ev_slot))
        self.arrays = (kind, local, path_start, path_fail, ev_start, ev_slot, entry_slot)

    def _slot(self, use) -> int:
        key, pos = use
        try:
            return self.slots[(key, pos)]
        except KeyError:
            raise MolError([Diagnostic("unresolved", f"no reference parameter {pos} in {key}", str(key))]) from None


def build_transfers(
    program: Program, loop_bound: int = DEFAULT_LOOP_BOUND, max_paths: int = DEFAULT_MAX_PATHS
) -> list:
    return [summarize_method(m, program, loop_bound, max_paths) for m in program.methods]


def fixpoint_analyze(
    program: Program,
    loop_bound: int = DEFAULT_LOOP_BOUND,
    max_paths: int = DEFAULT_MAX_PATHS,
    *,
    order: Optional[Iterable[int]] = None,
    transfers: Optional[list] = None,
    record_history: bool = False,
    backend=None,
) -> StaticResult:
    """Least fixpoint of all method transfers, starting from NOT_LOCALLY_REQUIRED.

    Each sweep evaluates every transfer against the previous sweep's
    environment (so visiting order cannot matter), joins the results into the
    per-implementation classes, and publishes the meet over implementations
    of each abstraction as the new environment. The count includes the final
    sweep that observes no change.
    """
    if transfers is None:
        transfers = build_transfers(program, loop_bound, max_paths)
    if order is not None:
        transfers = [transfers[i] for i in order]
    k = backend or kernels
    flat = _FlatTransfers(transfers, program)
    env = array("b", bytes(len(flat.slots)))
    impl = array("b", bytes(len(flat.entries)))
    history = [bytes(impl)] if record_history else None
    sweeps = 0
    while True:
        sweeps += 1
        changed = k.sweep(*flat.arrays, env, impl)
        if record_history:
            history.append(bytes(impl))
        if not changed:
            break
    method_classes = {entry: NullabilityClass(impl[n]) for n, entry in enumerate(flat.entries)}
    if order is not None:
        by_name = {t.method: t for t in transfers}
        method_classes = {
            (m.qualified_name, i): method_classes[(m.qualified_name, i)]
            for m in program.methods
            if m.qualified_name in by_name
            for i in sorted(by_name[m.qualified_name].per_param)
        }
    classes = {slot: NullabilityClass(env[n]) for slot, n in flat.slots.items()}
    exceeded = {t.key for t in transfers if t.over_budget}
    if record_history:
        history = [
            {entry: NullabilityClass(snap[n]) for n, entry in enumerate(flat.entries)} for snap in history
        ]
    return StaticResult(classes, method_classes, sweeps, exceeded, loop_bound, max_paths, history)
