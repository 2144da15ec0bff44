"""Instrumented execution of MOL programs and per-abstraction null profiles.

Every ``opaque`` condition or expression is resolved by a splitmix64 stream
seeded from the run's seed: a condition takes the top bit of the next
64-bit output, an expression becomes a scalar carrying the whole output.
Runs are therefore a pure function of (program, entry, seed, step limit).

A step is one statement execution; a ``while`` costs one step per test of
its condition.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from molnull import kernels
from molnull.checker import Registry, select_implementation
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
)

DEFAULT_STEP_LIMIT = 1_000_000

COMPLETED = "Completed"
NULL_DEREF = "NullDerefFailure"
EXPLICIT_FAILURE = "ExplicitFailure"
STEP_LIMIT = "StepLimit"


@dataclass
class ObjectRef:
    id: int
    classifier: str
    fields: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scalar:
    token: int


class CallRecord(NamedTuple):
    abstraction: AbstractionKey
    implementation: str
    arg_null: tuple


@dataclass
class ExecutionTrace:
    records: list
    outcome: str
    seed: int
    location: Optional[str] = None
    entry: str = ""
    steps: int = 0

    @property
    def total_calls(self) -> int:
        return len(self.records)

    def serialize(self) -> str:
        lines = [
            f"{r.abstraction}\t{r.implementation}\t{''.join('1' if b else '0' for b in r.arg_null)}"
            for r in self.records
        ]
        lines.append(
            f"#end\toutcome={self.outcome}\tlocation={self.location or '-'}"
            f"\tseed={self.seed}\ttotal_calls={self.total_calls}"
        )
        return "\n".join(lines) + "\n"


class _Frame:
    __slots__ = ("method", "env", "cursors")

    def __init__(self, method: MethodDecl, env: dict):
        self.method = method
        self.env = env
        self.cursors = [[method.body, 0]]


class Interpreter:
    """One execution of a program; not reusable across runs."""

    def __init__(self, program: Program, seed: int, step_limit: int = DEFAULT_STEP_LIMIT,
                 registry: Optional[Registry] = None):
        self.program = program
        self.registry = registry or Registry.build(program)
        self.rng = kernels.SplitMix64(seed)
        self.seed = seed
        self.step_limit = step_limit
        self.next_id = 0
        self.fields_for = {}
        for c in program.classes:
            self.fields_for.setdefault(c.classifier, []).extend(f.name for f in c.fields)

    def new_object(self, classifier: str) -> ObjectRef:
        self.next_id += 1
        return ObjectRef(self.next_id, classifier, {f: None for f in self.fields_for.get(classifier, ())})

    def entry_args(self, method: MethodDecl) -> dict:
        env = {}
        for p in method.params:
            if not p.is_reference:
                env[p.name] = Scalar(self.rng.next_u64())
            elif p.required:
                env[p.name] = self.new_object(p.type_name)
            else:
                env[p.name] = None
        return env

    def _test(self, cond, env: dict) -> bool:
        if isinstance(cond, Opaque):
            return self.rng.coin()
        value = env[cond.var]
        return (value is None) if isinstance(cond, IsNull) else (value is not None)

    def run(self, entry: str) -> ExecutionTrace:
        index = self.program.index
        method = index.resolve_entry(entry)
        records: list = []
        frames = [_Frame(method, self.entry_args(method))]
        steps = 0
        limit = self.step_limit

        def finish(outcome: str, where: Optional[str] = None) -> ExecutionTrace:
            return ExecutionTrace(records, outcome, self.seed, where, entry, steps)

        while frames:
            frame = frames[-1]
            if not frame.cursors:
                frames.pop()
                continue
            cur = frame.cursors[-1]
            stmts, i = cur
            if i >= len(stmts):
                frame.cursors.pop()
                continue
            s = stmts[i]
            if steps >= limit:
                return finish(STEP_LIMIT)
            steps += 1
            env = frame.env
            if isinstance(s, Assign):
                cur[1] = i + 1
                e = s.expr
                if isinstance(e, Var):
                    env[s.var] = env[e.name]
                elif isinstance(e, New):
                    env[s.var] = self.new_object(e.classifier)
                elif isinstance(e, NullLit):
                    env[s.var] = None
                else:
                    env[s.var] = Scalar(self.rng.next_u64())
            elif isinstance(s, Deref):
                cur[1] = i + 1
                if env[s.var] is None:
                    return finish(NULL_DEREF, f"{frame.method.qualified_name}:{s.line}:{s.col}")
            elif isinstance(s, Call):
                cur[1] = i + 1
                args = [None if a is None else env[a] for a in s.args]
                key = index.resolve_call(s.method, len(args))
                impl, _ = select_implementation(
                    self.program, self.registry, key,
                    (a.classifier if isinstance(a, ObjectRef) else None for a in args),
                )
                callee = impl.method
                records.append(
                    CallRecord(key, callee.qualified_name,
                               tuple(args[j] is None for j in callee.signature.reference_positions))
                )
                frames.append(_Frame(callee, {p.name: v for p, v in zip(callee.params, args)}))
            elif isinstance(s, If):
                cur[1] = i + 1
                branch = s.then if self._test(s.cond, env) else s.orelse
                if branch:
                    frame.cursors.append([branch, 0])
            elif isinstance(s, While):
                if self._test(s.cond, env):
                    frame.cursors.append([s.body, 0])  # the while is re-tested when the body ends
                else:
                    cur[1] = i + 1
            elif isinstance(s, Return):
                frames.pop()
            elif isinstance(s, Fail):
                return finish(EXPLICIT_FAILURE, f"{frame.method.qualified_name}:{s.line}:{s.col}")
        return finish(COMPLETED)


def run_program(program: Program, entry: str, seed: int, step_limit: int = DEFAULT_STEP_LIMIT,
                registry: Optional[Registry] = None) -> ExecutionTrace:
    """Execute ``entry`` once; runtime failures are encoded in the trace outcome."""
    return Interpreter(program, seed, step_limit, registry).run(entry)


# ----------------------------------------------------------------- profiles


@dataclass
class AbstractionProfile:
    call_count: int
    never_null: tuple
    implementations: frozenset = frozenset()

    @property
    def ref_param_count(self) -> int:
        return len(self.never_null)

    @property
    def never_null_count(self) -> int:
        return sum(self.never_null)


@dataclass
class DynamicProfile:
    per_abstraction: dict = field(default_factory=dict)

    def merge(self, other: "DynamicProfile") -> "DynamicProfile":
        """Commutative merge; a flag stays never-null only if it is in both."""
        out = dict(self.per_abstraction)
        for key, b in other.per_abstraction.items():
            a = out.get(key)
            if a is None:
                out[key] = b
            else:
                out[key] = AbstractionProfile(
                    a.call_count + b.call_count,
                    tuple(x and y for x, y in zip(a.never_null, b.never_null)),
                    a.implementations | b.implementations,
                )
        return DynamicProfile(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["abstraction", "ref_param_count", "call_count", "never_null_bitstring"])
        for key in sorted(self.per_abstraction, key=str):
            prof = self.per_abstraction[key]
            bits = "".join("1" if b else "0" for b in prof.never_null)
            w.writerow([str(key), prof.ref_param_count, prof.call_count, bits])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DynamicProfile":
        out = {}
        for rec in csv.DictReader(io.StringIO(text)):
            bits = rec["never_null_bitstring"]
            if len(bits) != int(rec["ref_param_count"]):
                raise ValueError(f"bitstring length mismatch for {rec['abstraction']}")
            out[AbstractionKey.parse(rec["abstraction"])] = AbstractionProfile(
                int(rec["call_count"]), tuple(b == "1" for b in bits)
            )
        return cls(out)


def aggregate_trace(traces: Iterable, program: Program) -> DynamicProfile:
    """Fold call records per abstraction; one null observation makes a position nullable."""
    index = program.index
    acc: dict = {}
    for trace in traces:
        for r in trace.records:
            impls = index.implementations(r.abstraction)
            if not impls:
                raise MolError([Diagnostic("unresolved", f"abstraction {r.abstraction} is not in the program",
                                           r.implementation)])
            entry = acc.get(r.abstraction)
            if entry is None:
                entry = acc[r.abstraction] = [0, [True] * len(r.arg_null), set()]
            entry[0] += 1
            flags = entry[1]
            for i, is_null in enumerate(r.arg_null):
                if is_null:
                    flags[i] = False
            entry[2].add(r.implementation)
    return DynamicProfile(
        {k: AbstractionProfile(n, tuple(flags), frozenset(impls)) for k, (n, flags, impls) in acc.items()}
    )
