"""Seeded synthetic MOL corpora whose parameter classes are known by construction.

Each generated method is a sequence of per-parameter snippets. A snippet
touches only its own parameter, so under the one-null hypothesis the class
of a parameter is decided by its snippet alone:

======================  =========================================
snippet                 class
======================  =========================================
``deref p``             definitely required
``if opaque {deref p}`` possibly required
unused / null-guarded   not locally required
``call g(.., p, ..)``   class of ``g`` at that position
conditional forward     as above, capped at possibly required
wrapped in a loop       as above, capped at possibly required
======================  =========================================

Forwarding only targets earlier methods, so expected classes are computed
in generation order. A recursive method prepends ``if opaque { call self(..) }``,
which leaves every class unchanged.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from molnull.ir import (
    AbstractionKey,
    Assign,
    Call,
    ClassDecl,
    ClassifierDecl,
    Deref,
    Diagnostic,
    FaceDecl,
    If,
    MethodDecl,
    MethodSignature,
    MolError,
    New,
    NotNull,
    Opaque,
    Param,
    Program,
    While,
    print_program,
    validate_program,
)
from molnull.reporting import CrossTab, crosstab_csv, crosstab_from_classes
from molnull.static import DEFINITELY, NOT_LOCALLY, POSSIBLY, NullabilityClass

SHAPES = ("pD", "pP", "pN", "forward", "recursive")
BASE_SHAPES = ("pD", "pP", "pN")

DEFAULT_MIX = {"pD": 0.35, "pP": 0.15, "pN": 0.25, "forward": 0.20, "recursive": 0.05}
# Column totals of the reference static sample; they shape the arity distribution.
ARITY_WEIGHTS = (1969, 920, 397, 168, 44, 16, 4)
VALUE_PARAM_WEIGHTS = (6, 3, 1)
CLASSIFIER_COUNT = 4
PROJECT_WEIGHTS = (30, 20, 15, 12, 10, 8, 5)
TARGETS_PER_DRIVER = 4


@dataclass
class CorpusSpec:
    method_count: int = 2000
    max_ref_params: int = 7
    class_mix: dict = field(default_factory=lambda: dict(DEFAULT_MIX))
    loop_density: float = 0.1
    seed: int = 42
    duplicate_rate: float = 0.05
    value_only_rate: float = 0.03

    def validate(self) -> None:
        problems = []
        unknown = set(self.class_mix) - set(SHAPES)
        if unknown:
            problems.append(f"unknown shapes in class mix: {', '.join(sorted(unknown))}")
        if any(v < 0 for v in self.class_mix.values()):
            problems.append("class mix fractions must be non-negative")
        if abs(sum(self.class_mix.values()) - 1.0) > 1e-9:
            problems.append(f"class mix fractions sum to {sum(self.class_mix.values())}, not 1")
        if sum(self.class_mix.get(s, 0.0) for s in BASE_SHAPES) <= 0:
            problems.append("infeasible class mix: no weight on pD, pP or pN")
        if self.max_ref_params < 1:
            problems.append("max_ref_params must be >= 1")
        if self.method_count < 0:
            problems.append("method_count must be >= 0")
        for name in ("loop_density", "duplicate_rate", "value_only_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name} must lie in [0, 1]")
        if problems:
            raise MolError([Diagnostic("corpus", p) for p in problems])


@dataclass
class GroundTruth:
    """Expected classes per abstraction position and per implementation position."""

    expected_class: dict
    expected_method_class: dict
    expected_crosstab: CrossTab
    loop_free: frozenset = frozenset()
    keys: dict = field(default_factory=dict, repr=False)  # implementation -> abstraction key

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["implementation", "abstraction", "param_index", "class", "loop_free"])
        for (impl, i), c in self.expected_method_class.items():
            key = self.keys[impl]
            w.writerow([impl, str(key), i, c.label, int(impl in self.loop_free)])
        return buf.getvalue()


@dataclass
class _Shape:
    kind: str
    target: Optional[tuple] = None  # (abstraction key, position) of a forward
    conditional: bool = False
    looped: bool = False


class _Generator:
    def __init__(self, spec: CorpusSpec):
        self.spec = spec
        self.rng = random.Random(spec.seed)
        self.classifiers = [f"K{i}" for i in range(CLASSIFIER_COUNT)]
        self.methods: list = []
        self.primary: dict = {}  # key -> MethodDecl
        self.abstract_class: dict = {}  # (key, pos) -> class
        self.impl_class: dict = {}  # (qualified name, pos) -> class
        self.by_type: dict = {}  # classifier -> [(key, pos)]
        self.loop_free: set = set()
        self.projects = [f"p{i}" for i in range(len(PROJECT_WEIGHTS))]
        self.counter = 0
        self.recipes: dict = {}  # key -> (method, shapes, recursive), not yet duplicated

    # -- drawing

    def draw_shape(self, allow_recursive: bool = True) -> str:
        mix = self.spec.class_mix
        shapes = [s for s in SHAPES if mix.get(s, 0) > 0 and (allow_recursive or s != "recursive")]
        return self.rng.choices(shapes, [mix[s] for s in shapes])[0]

    def draw_base(self) -> str:
        mix = self.spec.class_mix
        shapes = [s for s in BASE_SHAPES if mix.get(s, 0) > 0]
        return self.rng.choices(shapes, [mix[s] for s in shapes])[0]

    def arity(self) -> int:
        weights = ARITY_WEIGHTS[: self.spec.max_ref_params]
        if self.spec.max_ref_params > len(ARITY_WEIGHTS):
            weights = weights + (1,) * (self.spec.max_ref_params - len(ARITY_WEIGHTS))
        return self.rng.choices(range(1, len(weights) + 1), weights)[0]

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    # -- snippets

    def shape_for(self, ptype: str, recursive_ok: bool) -> _Shape:
        kind = self.draw_shape(recursive_ok)
        if kind == "forward":
            targets = self.by_type.get(ptype)
            if not targets:
                kind = self.draw_base()
            else:
                return _Shape("forward", self.rng.choice(targets), self.rng.random() < 0.4)
        return _Shape(kind)

    def snippet(self, shape: _Shape, pname: str) -> tuple:
        if shape.kind == "pD":
            body = (Deref(pname),)
        elif shape.kind == "pP":
            body = (If(Opaque(), (Deref(pname),)),)
        elif shape.kind == "pN":
            body = () if self.rng.random() < 0.5 else (If(NotNull(pname), (Deref(pname),)),)
        else:
            key, pos = shape.target
            callee = self.primary[key]
            stmts, args = [], []
            for j, p in enumerate(callee.params):
                if j == pos:
                    args.append(pname)
                elif p.is_reference:
                    v = self.fresh("n")
                    stmts.append(Assign(v, New(p.type_name)))
                    args.append(v)
                else:
                    v = self.fresh("s")
                    stmts.append(Assign(v, Opaque()))
                    args.append(v)
            stmts.append(Call(key.name, tuple(args)))
            body = (If(Opaque(), tuple(stmts)),) if shape.conditional else tuple(stmts)
        if shape.looped and body:
            body = (While(Opaque(), body),)
        return body

    def shape_class(self, shape: _Shape) -> NullabilityClass:
        if shape.kind == "pD":
            c = DEFINITELY
        elif shape.kind == "pP":
            c = POSSIBLY
        elif shape.kind == "pN":
            c = NOT_LOCALLY
        else:
            c = self.abstract_class[shape.target]
            if shape.conditional:
                c = c.meet(POSSIBLY)
        if shape.looped:
            c = c.meet(POSSIBLY)
        return c

    # -- methods

    def build_body(self, name: str, params: tuple, shapes: list, recursive: bool) -> tuple:
        body: list = []
        if recursive:
            body.append(If(Opaque(), (Call(name, tuple(p.name for p in params)),)))
        for p, shape in zip(params, shapes):
            body.extend(self.snippet(shape, p.name))
        return tuple(body)

    def new_method(self, idx: int):
        project = self.rng.choices(self.projects, PROJECT_WEIGHTS)[0]
        name = f"{project}_m{idx}"
        n_ref = self.arity()
        n_val = self.rng.choices(range(len(VALUE_PARAM_WEIGHTS)), VALUE_PARAM_WEIGHTS)[0]
        types = [self.rng.choice(self.classifiers) for _ in range(n_ref)]
        recursive = False
        shapes = []
        for t in types:
            shape = self.shape_for(t, True)
            if shape.kind == "recursive":
                recursive = True
                shape = self.shape_for(t, False)
            shape.looped = shape.kind != "pN" and self.rng.random() < self.spec.loop_density
            shapes.append(shape)
        params = tuple(Param(f"a{i}", "req", t) for i, t in enumerate(types))
        params += tuple(Param(f"v{i}", "val") for i in range(n_val))
        self.counter = 0
        body = self.build_body(name, params, shapes, recursive)
        method = MethodDecl(MethodSignature(name, params), body, f"C_{types[0]}")
        self.add(method, [self.shape_class(s) for s in shapes], not any(s.looped for s in shapes))
        return method, shapes, recursive

    def duplicate(self, method: MethodDecl, shapes: list, recursive: bool):
        """Second implementation in the subclassifier's class; each class is at least the original's."""
        upgraded = []
        for s in shapes:
            if s.kind in ("pP", "pN") and self.rng.random() < 0.5:
                s = _Shape("pD", looped=s.looped)
            upgraded.append(s)
        self.counter = 0
        body = self.build_body(method.name, method.params, upgraded, recursive)
        dup = MethodDecl(method.signature, body, f"{method.owner}s")
        self.add(dup, [self.shape_class(s) for s in upgraded], not any(s.looped for s in upgraded), primary=False)

    def value_only(self, idx: int):
        name = f"{self.rng.choice(self.projects)}_v{idx}"
        params = tuple(Param(f"v{i}", "val") for i in range(self.rng.randint(1, 2)))
        method = MethodDecl(MethodSignature(name, params), (Assign("s", Opaque()),), None)
        self.methods.append(method)
        self.primary[method.key] = method

    def add(self, method: MethodDecl, classes: list, loop_free: bool, primary: bool = True):
        self.methods.append(method)
        key = method.key
        for pos, c in enumerate(classes):
            self.impl_class[(method.qualified_name, pos)] = c
            prev = self.abstract_class.get((key, pos))
            self.abstract_class[(key, pos)] = c if prev is None else prev.meet(c)
        if loop_free:
            self.loop_free.add(method.qualified_name)
        if primary:
            self.primary[key] = method
            for pos, p in enumerate(method.params):
                if p.is_reference:
                    self.by_type.setdefault(p.type_name, []).append((key, pos))

    # -- drivers

    def drivers(self) -> tuple:
        targets = [m for m in self.primary.values() if m.signature.reference_positions]
        duplicated = {m.key for m in self.methods if m.owner and m.owner.endswith("s")}
        drivers = []
        for start in range(0, len(targets), TARGETS_PER_DRIVER):
            self.counter = 0
            body = []
            for m in targets[start: start + TARGETS_PER_DRIVER]:
                null_pos = self.rng.choice(m.signature.reference_positions)
                setup, full = self.driver_args(m, m.key in duplicated)
                body.extend(setup)
                with_null = tuple(None if j == null_pos else a for j, a in enumerate(full))
                body.append(If(Opaque(), (Call(m.name, with_null),), (Call(m.name, full),)))
            drivers.append(MethodDecl(MethodSignature(f"drive_{len(drivers)}"), tuple(body)))
        self.counter = 0
        cover = []
        for m in targets:
            setup, full = self.driver_args(m, False)
            cover.extend(setup)
            cover.append(Call(m.name, full))
        drivers.append(MethodDecl(MethodSignature("cover_all"), tuple(cover)))
        return tuple(drivers)

    def driver_args(self, m: MethodDecl, sub_first: bool) -> tuple:
        setup, args = [], []
        for j, p in enumerate(m.params):
            if p.is_reference:
                v = self.fresh("n")
                cls = f"{p.type_name}s" if j == 0 and sub_first else p.type_name
                setup.append(Assign(v, New(cls)))
            else:
                v = self.fresh("s")
                setup.append(Assign(v, Opaque()))
            args.append(v)
        return setup, tuple(args)

    # -- whole program

    def generate(self) -> tuple:
        spec = self.spec
        for idx in range(spec.method_count):
            roll = self.rng.random()
            if roll < spec.value_only_rate:
                self.value_only(idx)
            elif roll < spec.value_only_rate + spec.duplicate_rate and self.recipes:
                key = self.rng.choice(sorted(self.recipes, key=str))
                self.duplicate(*self.recipes.pop(key))
            else:
                m, shapes, recursive = self.new_method(idx)
                self.recipes[m.key] = (m, shapes, recursive)
        drivers = self.drivers()
        methods = tuple(self.methods) + drivers
        program = Program(
            classifiers=tuple(
                d for c in self.classifiers for d in (ClassifierDecl(c), ClassifierDecl(f"{c}s", (c,)))
            ),
            faces=self.faces(),
            classes=tuple(
                ClassDecl(f"C_{n}", n) for c in self.classifiers for n in (c, f"{c}s")
            ),
            methods=methods,
            entry_points=tuple(d.name for d in drivers),
        )
        problems = validate_program(program)
        if problems:
            raise MolError(problems)
        keys = {m.qualified_name: m.key for m in self.methods}
        per_impl: dict = {}
        for (impl, _), c in self.impl_class.items():
            per_impl.setdefault(impl, []).append(c)
        truth = GroundTruth(
            expected_class=dict(self.abstract_class),
            expected_method_class=dict(self.impl_class),
            expected_crosstab=crosstab_from_classes(per_impl),
            loop_free=frozenset(self.loop_free),
            keys=keys,
        )
        return program, truth

    def faces(self) -> tuple:
        faces = []
        for c in self.classifiers:
            sigs = tuple(
                m.signature for m in self.primary.values() if m.params and m.params[0].type_name == c
            )
            faces.append(FaceDecl(c, sigs))
            faces.append(FaceDecl(f"{c}s", sigs))
        return tuple(faces)


def generate_corpus(spec: CorpusSpec) -> tuple:
    """Build ``(program, ground_truth)`` for ``spec``; deterministic in ``spec.seed``."""
    spec.validate()
    return _Generator(spec).generate()


def corpus_files(program: Program, truth: GroundTruth, spec: CorpusSpec) -> dict:
    """File name to text for everything :func:`write_corpus` emits."""
    source = print_program(program)
    manifest = {
        "spec": asdict(spec),
        "methods": len(program.methods),
        "implementations_with_reference_parameters": len({i for i, _ in truth.expected_method_class}),
        "entry_points": list(program.entry_points),
        "corpus_sha256": hashlib.sha256(source.encode("utf-8")).hexdigest(),
    }
    return {
        "corpus.mol": source,
        "ground_truth.csv": truth.to_csv(),
        "expected_crosstab.csv": crosstab_csv(truth.expected_crosstab),
        "manifest.json": json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    }


def write_corpus(out_dir, program: Program, truth: GroundTruth, spec: CorpusSpec) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in corpus_files(program, truth, spec).items():
        path = out / name
        path.write_bytes(text.encode("utf-8"))
        written.append(path)
    return written


def read_ground_truth(text: str) -> dict:
    """``{(implementation, index): class}`` from a ground-truth CSV."""
    return {
        (rec["implementation"], int(rec["param_index"])): NullabilityClass.from_label(rec["class"])
        for rec in csv.DictReader(io.StringIO(text))
    }


def abstraction_of(key_text: str) -> AbstractionKey:
    return AbstractionKey.parse(key_text)
