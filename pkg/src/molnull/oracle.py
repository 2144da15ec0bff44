"""Exhaustive whole-program classification, for checking the fixpoint analysis.

The oracle never looks at path summaries. It runs the program with every
``opaque`` taking both outcomes, loops unrolled to a bound and callees
executed in full (recursion cut at a depth bound), and simply asks whether
some, all, or none of the terminating executions fail.
"""

from __future__ import annotations

from typing import Iterable, Optional, Union

from molnull.checker import Registry, select_implementation
from molnull.ir import (
    AbstractionKey,
    Assign,
    Call,
    Deref,
    Fail,
    If,
    IsNull,
    MethodDecl,
    New,
    NullLit,
    Opaque,
    Program,
    Return,
    Var,
    While,
)
from molnull.static import DEFINITELY, NOT_LOCALLY, POSSIBLY, NullabilityClass

FAIL, OK = "fail", "ok"
_BOTH = frozenset({FAIL, OK})
_NULL = None
_SCALAR = "<scalar>"


class OracleInfeasible(Exception):
    """The exhaustive enumeration went over its step budget."""


class _Oracle:
    def __init__(self, program: Program, loop_bound: int, max_depth: int, budget: int):
        self.program = program
        self.registry = Registry.build(program)
        self.loop_bound = loop_bound
        self.max_depth = max_depth
        self.budget = budget
        self.steps = 0
        self.memo: dict = {}

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise OracleInfeasible(f"more than {self.budget} steps")

    def call(self, method: MethodDecl, args: tuple, depth: int) -> frozenset:
        """Outcomes of running ``method`` on ``args``: each arg is None, a classifier name, or a scalar."""
        if depth > self.max_depth:
            return frozenset()
        memo_key = (method.qualified_name, args, depth)
        hit = self.memo.get(memo_key)
        if hit is not None:
            return hit
        env = {p.name: a for p, a in zip(method.params, args)}
        outcomes: set = set()
        for end, _ in self.block(method.body, env, depth):
            outcomes.add(end or OK)
            if outcomes >= _BOTH:
                break
        result = frozenset(outcomes)
        self.memo[memo_key] = result
        return result

    def block(self, stmts: tuple, env: dict, depth: int, i: int = 0):
        """Yield ``(outcome, env)``: outcome FAIL/OK when the method ended, None when the block fell through."""
        if i == len(stmts):
            yield None, env
            return
        self.tick()
        s = stmts[i]
        if isinstance(s, Return):
            yield OK, env
        elif isinstance(s, Fail):
            yield FAIL, env
        elif isinstance(s, Deref):
            if env[s.var] is _NULL:
                yield FAIL, env
            else:
                yield from self.block(stmts, env, depth, i + 1)
        elif isinstance(s, Assign):
            e = s.expr
            if isinstance(e, NullLit):
                v = _NULL
            elif isinstance(e, New):
                v = e.classifier
            elif isinstance(e, Var):
                v = env[e.name]
            else:
                v = _SCALAR
            yield from self.block(stmts, {**env, s.var: v}, depth, i + 1)
        elif isinstance(s, Call):
            args = tuple(None if a is None else env[a] for a in s.args)
            key = self.program.index.resolve_call(s.method, len(args))
            impl, _ = select_implementation(
                self.program, self.registry, key, (a if a not in (None, _SCALAR) else None for a in args)
            )
            outcomes = self.call(impl.method, args, depth + 1)
            if FAIL in outcomes:
                yield FAIL, env
            if OK in outcomes:
                yield from self.block(stmts, env, depth, i + 1)
        elif isinstance(s, If):
            for taken in self.choices(s.cond, env):
                for end, env2 in self.block(s.then if taken else s.orelse, env, depth):
                    if end is None:
                        yield from self.block(stmts, env2, depth, i + 1)
                    else:
                        yield end, env2
        elif isinstance(s, While):
            yield from self.loop(s, stmts, env, depth, i, 0)
        else:
            raise TypeError(f"unknown statement {s!r}")

    def loop(self, s: While, stmts: tuple, env: dict, depth: int, i: int, done: int):
        for taken in self.choices(s.cond, env):
            if not taken:
                yield from self.block(stmts, env, depth, i + 1)
            elif done < self.loop_bound:
                for end, env2 in self.block(s.body, env, depth):
                    if end is None:
                        yield from self.loop(s, stmts, env2, depth, i, done + 1)
                    else:
                        yield end, env2

    @staticmethod
    def choices(cond, env: dict):
        if isinstance(cond, Opaque):
            return (True, False)
        is_null = env[cond.var] is _NULL
        return ((is_null,) if isinstance(cond, IsNull) else (not is_null,))


def _entry_args(method: MethodDecl, param: int) -> tuple:
    args = []
    for i, p in enumerate(method.params):
        if not p.is_reference:
            args.append(_SCALAR)
        else:
            args.append(_NULL if i == param else p.type_name)
    return tuple(args)


def _classify(outcomes: frozenset) -> NullabilityClass:
    if outcomes == {FAIL}:
        return DEFINITELY
    if FAIL in outcomes:
        return POSSIBLY
    return NOT_LOCALLY


class Oracle:
    """Reusable enumerator; callee outcomes are memoized across queries.

    ``budget`` bounds the steps of each single query.
    """

    def __init__(self, program: Program, loop_bound: int = 1, max_depth: int = 12, budget: int = 2_000_000):
        self.program = program
        self._engine = _Oracle(program, loop_bound, max_depth, budget)

    def outcomes(self, method: MethodDecl, param: int) -> frozenset:
        self._engine.steps = 0
        return self._engine.call(method, _entry_args(method, param), 0)

    def classify(self, method: Union[str, AbstractionKey, MethodDecl], param: int) -> NullabilityClass:
        if isinstance(method, AbstractionKey):
            impls = self.program.index.implementations(method)
            return min(self.classify(m, param) for m in impls)
        if isinstance(method, str):
            method = self.program.index.by_qualified[method]
        return _classify(self.outcomes(method, param))


def oracle_outcomes(
    program: Program,
    method: MethodDecl,
    param: int,
    loop_bound: int = 1,
    max_depth: int = 12,
    budget: int = 2_000_000,
) -> frozenset:
    return Oracle(program, loop_bound, max_depth, budget).outcomes(method, param)


def oracle_classify(
    program: Program,
    method: Union[str, AbstractionKey, MethodDecl],
    param: int,
    loop_bound: int = 1,
    max_depth: int = 12,
    budget: int = 2_000_000,
) -> NullabilityClass:
    """Class of ``param`` by exhaustive enumeration.

    ``method`` may be a declaration, a qualified implementation name, or an
    abstraction key (then the meet over its implementations). Raises
    :class:`OracleInfeasible` when the enumeration exceeds ``budget`` steps.
    """
    return Oracle(program, loop_bound, max_depth, budget).classify(method, param)


def classify_all(program: Program, loop_bound: int = 1, max_depth: int = 12,
                 budget: int = 2_000_000, methods: Optional[Iterable] = None) -> dict:
    """Oracle class for every reference parameter of ``methods`` (default: all implementations)."""
    oracle = Oracle(program, loop_bound, max_depth, budget)
    return {
        (m.qualified_name, i): oracle.classify(m, i)
        for m in (program.methods if methods is None else methods)
        for i in m.signature.reference_positions
    }
