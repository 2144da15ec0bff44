"""Call-safety checking under the recombinant and the conventional call models.

A reference declaration has two independent parts: a classifier (nominal,
declared hierarchy) and a face (a set of method signatures, ordered by set
inclusion). Under the recombinant model the faces of all non-nullable
parameters are pooled at method entry, and a call is safe when its
abstraction is in the pool or in the face of any argument known to be
non-null; the implementation may live in any class. The conventional model
instead insists that the first argument is the target: its face must list
the method and its classifier must own an implementation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Optional

from molnull.ir import (
    AbstractionKey,
    Assign,
    Call,
    Diagnostic,
    If,
    IsNull,
    MethodDecl,
    New,
    NotNull,
    NullLit,
    Opaque,
    Program,
    ProgramIndex,
    Var,
    While,
    iter_statements,
)


class Mode(str, Enum):
    CONTINUUM = "continuum"
    CONVENTIONAL = "conventional"


class Nullability(str, Enum):
    REQUIRED = "req"
    OPTIONAL = "opt"


@dataclass(frozen=True)
class DeclType:
    classifier: Optional[str]
    face: Optional[str]
    nullability: Nullability = Nullability.REQUIRED

    @property
    def required(self) -> bool:
        return self.nullability is Nullability.REQUIRED


@dataclass(frozen=True)
class Face:
    name: str
    signatures: frozenset = frozenset()


def resolve_face(program: Program, name: Optional[str]) -> Face:
    """Resolve a face by name; a name with no face declaration is the empty face."""
    return Face(name or "", program.index.face_keys(name))


def face_subtype(sub: Face, sup: Face) -> bool:
    return sup.signatures <= sub.signatures


def decl_type(program: Program, type_name: Optional[str], qualifier: str = "req") -> DeclType:
    # One name serves as both classifier and face, as in the source language's sugar.
    face = type_name if type_name in program.index.faces else None
    return DeclType(type_name, face, Nullability(qualifier))


# ------------------------------------------------------------------ registry


class Implementation(NamedTuple):
    owner: Optional[str]
    method: MethodDecl


@dataclass
class Registry:
    implementations: dict = field(default_factory=dict)
    classifier_of: dict = field(default_factory=dict)

    @classmethod
    def build(cls, program: Program) -> "Registry":
        reg = cls(classifier_of={c.name: c.classifier for c in program.classes})
        for m in program.methods:
            reg.implementations.setdefault(m.key, []).append(Implementation(m.owner, m))
        return reg

    def has(self, key: AbstractionKey) -> bool:
        return bool(self.implementations.get(key))

    def owners(self, key: AbstractionKey) -> list:
        return [i.owner for i in self.implementations.get(key, ())]


def _candidates(registry: Registry, index: ProgramIndex, key: AbstractionKey, classifier: str):
    ranked = []
    anc = index.ancestors(classifier)
    for order, impl in enumerate(registry.implementations.get(key, ())):
        if impl.owner is None:
            continue
        d = anc.get(registry.classifier_of.get(impl.owner))
        if d is not None:
            ranked.append((d, order, impl))
    ranked.sort(key=lambda r: (r[0], r[1]))
    return ranked


def select_implementation(
    program: Program, registry: Registry, key: AbstractionKey, arg_classifiers: Iterable
) -> tuple:
    """Pick the implementation a call dispatches to.

    The first argument holding an object decides: among implementations owned
    by a class whose classifier is that object's classifier or an ancestor,
    the nearest wins, declaration order breaking ties. Otherwise a
    free-standing implementation, otherwise the first declared one.
    Returns ``(implementation, tied)``.
    """
    impls = registry.implementations.get(key)
    if not impls:
        raise LookupError(f"no implementation of {key}")
    for c in arg_classifiers:
        if c is None:
            continue
        ranked = _candidates(registry, program.index, key, c)
        if ranked:
            tied = len(ranked) > 1 and ranked[0][0] == ranked[1][0]
            return ranked[0][2], tied
        break
    for impl in impls:
        if impl.owner is None:
            return impl, False
    return impls[0], False


# --------------------------------------------------------------------- pools


@dataclass(frozen=True)
class AssurancePool:
    proven: frozenset = frozenset()

    def absorb(self, keys: Iterable) -> "AssurancePool":
        return AssurancePool(self.proven | frozenset(keys))


def entry_pool(method: MethodDecl, program: Program) -> AssurancePool:
    proven: set = set()
    for p in method.params:
        if p.required:
            proven |= program.index.face_keys(decl_type(program, p.type_name).face)
    return AssurancePool(frozenset(proven))


# -------------------------------------------------------------------- errors


@dataclass(frozen=True)
class CheckError:
    kind: str
    message: str
    missing: frozenset = frozenset()


@dataclass(frozen=True)
class SourceInfo:
    classifier: Optional[str]
    proven: frozenset = frozenset()
    nullable: bool = False


def check_assignment(program: Program, target: DeclType, source: SourceInfo) -> Optional[CheckError]:
    if source.nullable:
        if target.required:
            return CheckError("NullToRequired", "possibly-null value assigned to a required declaration")
        return None
    if (
        target.classifier is not None
        and source.classifier is not None
        and not program.index.is_subclassifier(source.classifier, target.classifier)
    ):
        return CheckError(
            "ClassifierMismatch", f"{source.classifier} is not {target.classifier} or a descendant of it"
        )
    if source.classifier is None and target.classifier is not None:
        return CheckError("ClassifierMismatch", f"unclassified value assigned to {target.classifier}")
    missing = program.index.face_keys(target.face) - source.proven
    if missing:
        names = ", ".join(sorted(map(str, missing)))
        return CheckError("FaceUnproven", f"face {target.face} not proven: {names}", frozenset(missing))
    return None


def check_call(
    program: Program,
    pool: AssurancePool,
    call: Call,
    mode: Mode,
    registry: Registry,
    local_types: Mapping,
    known_non_null: frozenset,
) -> Optional[CheckError]:
    idx = program.index
    try:
        key = idx.resolve_call(call.method, len(call.args))
    except KeyError:
        return CheckError("NoAssurance", f"{call.method}/{len(call.args)} does not resolve")

    def assured(arg: Optional[str]) -> bool:
        if arg is None or arg not in local_types:
            return False
        t = local_types[arg]
        return t.classifier is not None and (t.required or arg in known_non_null)

    def face_of(arg: str) -> frozenset:
        return idx.face_keys(local_types[arg].face)

    if mode is Mode.CONTINUUM:
        proven = key in pool.proven or any(assured(a) and key in face_of(a) for a in call.args)
        if not proven:
            return CheckError("NoAssurance", f"no non-nullable argument or pooled face proves {key}")
        if not registry.has(key):
            return CheckError("NoImplementation", f"{key} is proven but has no implementation")
        return None

    if not call.args:
        if key not in pool.proven:
            return CheckError("NoAssurance", f"{key} has no target and is not proven")
        if not any(o is None for o in registry.owners(key)):
            return CheckError("WrongOwner", f"{key} has no free-standing implementation")
        return None
    target = call.args[0]
    if not assured(target):
        return CheckError("NoAssurance", f"target argument of {key} is not known to be non-null")
    if key not in face_of(target):
        return CheckError("NoAssurance", f"face of target {target} does not list {key}")
    tclass = local_types[target].classifier
    for owner in registry.owners(key):
        if owner is not None and idx.is_subclassifier(tclass, registry.classifier_of[owner]):
            return None
    owners = ", ".join(o or "<free-standing>" for o in registry.owners(key)) or "nobody"
    return CheckError(
        "WrongOwner", f"{key} is implemented by {owners}, not by the target's classifier {tclass}"
    )


# ------------------------------------------------------------ whole programs


def _local_types(method: MethodDecl, program: Program) -> dict:
    """Declared types of parameters, and of locals inferred from their first typed assignment."""
    types = {p.name: decl_type(program, p.type_name, p.qualifier) for p in method.params if p.is_reference}
    values = {p.name for p in method.params if not p.is_reference}
    pending = []
    for s in iter_statements(method.body):
        if isinstance(s, Assign) and s.var not in types and s.var not in values:
            pending.append(s)
    for _ in range(len(pending) + 1):
        for s in pending:
            if s.var in types:
                continue
            e = s.expr
            if isinstance(e, New):
                types[s.var] = decl_type(program, e.classifier)
            elif isinstance(e, Var) and e.name in types:
                t = types[e.name]
                types[s.var] = DeclType(t.classifier, t.face, Nullability.REQUIRED)
    for s in pending:
        if s.var not in types and isinstance(s.expr, NullLit):
            types[s.var] = DeclType(None, None, Nullability.REQUIRED)
    return types


def check_method(program: Program, method: MethodDecl, mode: Mode, registry: Registry) -> list:
    types = _local_types(method, program)
    where = method.qualified_name
    diags: list = []
    all_keys = frozenset(registry.implementations)

    def diag(err: CheckError, s):
        diags.append(Diagnostic(err.kind, err.message, where, s.line, s.col))

    def guarded(cond, positive: bool):
        """Variable proven non-null inside the branch selected by ``positive``."""
        if isinstance(cond, NotNull) and positive:
            return cond.var
        if isinstance(cond, IsNull) and not positive:
            return cond.var
        return None

    def branch(cond, positive: bool, pool: AssurancePool, known: frozenset):
        v = guarded(cond, positive)
        if v is None or v not in types:
            return pool, known
        return pool.absorb(program.index.face_keys(types[v].face)), known | {v}

    def walk(stmts, pool: AssurancePool, known: frozenset):
        for s in stmts:
            if isinstance(s, Call):
                err = check_call(program, pool, s, mode, registry, types, known)
                if err:
                    diag(err, s)
            elif isinstance(s, Assign):
                target = types.get(s.var)
                if target is None:
                    continue  # value variable
                e = s.expr
                if isinstance(e, NullLit):
                    src = SourceInfo(None, nullable=True)
                elif isinstance(e, New):
                    src = SourceInfo(e.classifier, all_keys)
                elif isinstance(e, Var) and e.name in types:
                    st = types[e.name]
                    nullable = st.classifier is None or not (st.required or e.name in known)
                    src = SourceInfo(st.classifier, pool.proven | program.index.face_keys(st.face), nullable)
                else:
                    continue
                err = check_assignment(program, target, src)
                known = known - {s.var}
                if err:
                    diag(err, s)
                elif not src.nullable:
                    known = known | {s.var}
                    pool = pool.absorb(program.index.face_keys(target.face))
            elif isinstance(s, If):
                walk(s.then, *branch(s.cond, True, pool, known))
                walk(s.orelse, *branch(s.cond, False, pool, known))
            elif isinstance(s, While):
                walk(s.body, *branch(s.cond, True, pool, known))

    walk(method.body, entry_pool(method, program), frozenset())
    return diags


def dispatch_warnings(program: Program, registry: Registry) -> list:
    """Warn where two implementations of one abstraction are owned by classes with the same classifier."""
    out = []
    for key, impls in registry.implementations.items():
        seen: dict = {}
        for impl in impls:
            if impl.owner is None:
                continue
            c = registry.classifier_of.get(impl.owner)
            if c in seen:
                m = impl.method
                out.append(
                    Diagnostic(
                        "AmbiguousDispatch",
                        f"{key} is implemented by {seen[c]} and {impl.owner} for classifier {c}; "
                        f"{seen[c]} wins by declaration order",
                        m.qualified_name, m.line, m.col, "warning",
                    )
                )
            else:
                seen[c] = impl.owner
    return out


def check_program(program: Program, mode: Mode | str) -> list:
    """All diagnostics of ``program`` under ``mode``, ordered by method and position."""
    mode = Mode(mode)
    registry = Registry.build(program)
    diags = []
    for m in program.methods:
        diags.extend(check_method(program, m, mode, registry))
    diags.extend(dispatch_warnings(program, registry))
    return diags


def errors_only(diags: Iterable) -> list:
    return [d for d in diags if d.severity == "error"]
