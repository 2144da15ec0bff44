"""MOL: a minimal object-oriented intermediate language.

MOL keeps exactly the features the nullability analyses care about:
dereference (the one failing-if-null primitive), calls with explicit
parameters (there is no implicit target), assignment of ``null`` / ``new`` /
variables / ``opaque`` values, null tests, opaque branches, loops, ``return``
and ``fail``.

Source positions are carried on every node but excluded from equality, so
``parse_program(print_program(p)) == p`` holds structurally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Optional, Union

KEYWORDS = frozenset(
    {
        "classifier", "extends", "face", "class", "is", "method", "entry",
        "req", "opt", "val", "deref", "call", "return", "fail", "if", "else",
        "while", "null", "new", "opaque",
    }
)

VALUE_TYPE = "val"


# ---------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    where: str = "-"
    line: int = 0
    col: int = 0
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity} {self.kind} {self.where}:{self.line}:{self.col} {self.message}"

    def as_dict(self) -> dict:
        return {
            "severity": self.severity,
            "kind": self.kind,
            "where": self.where,
            "line": self.line,
            "col": self.col,
            "message": self.message,
        }


class MolError(Exception):
    """Raised when MOL text or a Program is rejected; carries the diagnostics."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# ------------------------------------------------------------------- the AST


class AbstractionKey(NamedTuple):
    """Method identity shared by all implementations: name plus parameter type names.

    Nullability qualifiers and the owning class are not part of the key.
    """

    name: str
    types: tuple

    @property
    def arity(self) -> int:
        return len(self.types)

    def __str__(self) -> str:
        return f"{self.name}({','.join(self.types)})"

    @classmethod
    def parse(cls, text: str) -> "AbstractionKey":
        m = re.fullmatch(r"\s*([A-Za-z_]\w*)\((.*)\)\s*", text)
        if not m:
            raise ValueError(f"malformed abstraction key {text!r}")
        inner = m.group(2).strip()
        types = tuple(t.strip() for t in inner.split(",")) if inner else ()
        return cls(m.group(1), types)


@dataclass(frozen=True)
class Param:
    name: str
    qualifier: str  # "req" | "opt" | "val"
    type_name: Optional[str] = None

    @property
    def is_reference(self) -> bool:
        return self.qualifier != "val"

    @property
    def required(self) -> bool:
        return self.qualifier == "req"


@dataclass(frozen=True)
class MethodSignature:
    name: str
    params: tuple = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def key(self) -> AbstractionKey:
        return AbstractionKey(
            self.name, tuple(p.type_name if p.is_reference else VALUE_TYPE for p in self.params)
        )

    @property
    def reference_positions(self) -> tuple:
        return tuple(i for i, p in enumerate(self.params) if p.is_reference)


# Expressions and conditions


@dataclass(frozen=True)
class NullLit:
    pass


@dataclass(frozen=True)
class New:
    classifier: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Opaque:
    """An unknown value (as an expression) or an unknown outcome (as a condition)."""


@dataclass(frozen=True)
class IsNull:
    var: str


@dataclass(frozen=True)
class NotNull:
    var: str


Expr = Union[NullLit, New, Var, Opaque]
Cond = Union[IsNull, NotNull, Opaque]


# Statements


@dataclass(frozen=True)
class Deref:
    var: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    method: str
    args: tuple = ()  # variable names; None stands for the null literal
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Cond
    then: tuple = ()
    orelse: tuple = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: Cond
    body: tuple = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Return:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Fail:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Stmt = Union[Deref, Call, Assign, If, While, Return, Fail]


# Declarations


@dataclass(frozen=True)
class ClassifierDecl:
    name: str
    parents: tuple = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FaceDecl:
    name: str
    signatures: tuple = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FieldDecl:
    name: str
    type_name: str
    qualifier: str = "opt"


@dataclass(frozen=True)
class ClassDecl:
    name: str
    classifier: str
    fields: tuple = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MethodDecl:
    signature: MethodSignature
    body: tuple = ()
    owner: Optional[str] = None

    @property
    def name(self) -> str:
        return self.signature.name

    @property
    def params(self) -> tuple:
        return self.signature.params

    @property
    def key(self) -> AbstractionKey:
        return self.signature.key

    @property
    def qualified_name(self) -> str:
        return f"{self.owner}.{self.name}" if self.owner else self.name

    @property
    def line(self) -> int:
        return self.signature.line

    @property
    def col(self) -> int:
        return self.signature.col


@dataclass(frozen=True)
class Program:
    classifiers: tuple = ()
    faces: tuple = ()
    classes: tuple = ()
    methods: tuple = ()
    entry_points: tuple = ()

    @cached_property
    def index(self) -> "ProgramIndex":
        return ProgramIndex(self)

    def merged(self, other: "Program") -> "Program":
        return Program(
            self.classifiers + other.classifiers,
            self.faces + other.faces,
            self.classes + other.classes,
            self.methods + other.methods,
            self.entry_points + other.entry_points,
        )


class ProgramIndex:
    """Lookup tables over a Program; built lazily and cached on the Program."""

    def __init__(self, program: Program):
        self.program = program
        self.classifiers = {c.name: c for c in program.classifiers}
        self.faces = {f.name: f for f in program.faces}
        self.classes = {c.name: c for c in program.classes}
        self.by_key: dict = {}
        self.by_name: dict = {}
        self.by_qualified: dict = {}
        for m in program.methods:
            self.by_key.setdefault(m.key, []).append(m)
            self.by_name.setdefault(m.name, []).append(m)
            self.by_qualified.setdefault(m.qualified_name, m)
        self._ancestors: dict = {}
        self._face_keys: dict = {}

    def keys_for_call(self, name: str, arity: int) -> list:
        seen = []
        for m in self.by_name.get(name, ()):
            if m.key.arity == arity and m.key not in seen:
                seen.append(m.key)
        return seen

    def resolve_call(self, name: str, arity: int) -> AbstractionKey:
        keys = self.keys_for_call(name, arity)
        if len(keys) != 1:
            raise KeyError(f"{name}/{arity}")
        return keys[0]

    def implementations(self, key: AbstractionKey) -> list:
        return self.by_key.get(key, [])

    def resolve_entry(self, name: str) -> MethodDecl:
        cands = self.by_name.get(name, [])
        if not cands:
            raise MolError([Diagnostic("unresolved", f"unresolved entry {name}", name)])
        free = [m for m in cands if m.owner is None]
        pick = free or cands
        if len(pick) > 1:
            raise MolError([Diagnostic("ambiguous", f"ambiguous entry {name}", name)])
        return pick[0]

    def ancestors(self, classifier: str) -> dict:
        """Map every ancestor-or-self of ``classifier`` to its shortest distance."""
        if classifier in self._ancestors:
            return self._ancestors[classifier]
        dist = {classifier: 0}
        frontier = [classifier]
        while frontier:
            nxt = []
            for c in frontier:
                decl = self.classifiers.get(c)
                for parent in decl.parents if decl else ():
                    if parent not in dist:
                        dist[parent] = dist[c] + 1
                        nxt.append(parent)
            frontier = nxt
        self._ancestors[classifier] = dist
        return dist

    def is_subclassifier(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)

    def face_keys(self, face_name: Optional[str]) -> frozenset:
        keys = self._face_keys.get(face_name)
        if keys is None:
            face = self.faces.get(face_name) if face_name else None
            keys = frozenset(s.key for s in face.signatures) if face else frozenset()
            self._face_keys[face_name] = keys
        return keys


def iter_statements(stmts: Iterable) -> Iterator:
    """Yield every statement in a body, depth first, in source order."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from iter_statements(s.then)
            yield from iter_statements(s.orelse)
        elif isinstance(s, While):
            yield from iter_statements(s.body)


def method_variables(method: MethodDecl) -> tuple:
    """Parameters first, then locals in order of first assignment."""
    names = [p.name for p in method.params]
    for s in iter_statements(method.body):
        if isinstance(s, Assign) and s.var not in names:
            names.append(s.var)
    return tuple(names)


# -------------------------------------------------------------------- lexing


class Token(NamedTuple):
    kind: str  # "name" | "op" | "eof"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<nl>\n)|(?P<ws>[ \t\r\f]+)|(?P<comment>//[^\n]*)"
    r"|(?P<op>==|!=|[{}();:,=])|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<bad>.)"
)


def tokenize(text: str) -> list:
    tokens = []
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            continue
        elif kind == "bad":
            raise MolError([Diagnostic("syntax", f"unexpected character {m.group()!r}", "-", line, col)])
        else:
            tokens.append(Token(kind, m.group(), line, col))
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


# ------------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise MolError([Diagnostic("syntax", f"expected {expected}, found {found}", "-", t.line, t.col)])

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def take(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def name(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.fail(what)
        self.i += 1
        return t

    # items

    def program(self) -> Program:
        classifiers, faces, classes, methods, entries = [], [], [], [], []
        while self.tok.kind != "eof":
            if self.at("classifier"):
                classifiers.append(self.classifier())
            elif self.at("face"):
                faces.append(self.face())
            elif self.at("class"):
                cls, owned = self.class_()
                classes.append(cls)
                methods.extend(owned)
            elif self.at("method"):
                methods.append(self.method(None))
            elif self.at("entry"):
                self.take("entry")
                entries.append(self.name("entry method name").text)
                while self.accept(","):
                    entries.append(self.name("entry method name").text)
                self.take(";")
            else:
                self.fail("'classifier', 'face', 'class', 'method' or 'entry'")
        return Program(tuple(classifiers), tuple(faces), tuple(classes), tuple(methods), tuple(entries))

    def classifier(self) -> ClassifierDecl:
        kw = self.take("classifier")
        name = self.name("classifier name").text
        parents = []
        if self.accept("extends"):
            parents.append(self.name("parent classifier").text)
            while self.accept(","):
                parents.append(self.name("parent classifier").text)
        self.take(";")
        return ClassifierDecl(name, tuple(parents), kw.line, kw.col)

    def face(self) -> FaceDecl:
        kw = self.take("face")
        name = self.name("face name").text
        self.take("{")
        sigs = []
        while not self.at("}"):
            t = self.name("signature name")
            params = self.param_list()
            self.take(";")
            sigs.append(MethodSignature(t.text, params, t.line, t.col))
        self.take("}")
        return FaceDecl(name, tuple(sigs), kw.line, kw.col)

    def param_list(self) -> tuple:
        self.take("(")
        params = []
        while not self.at(")"):
            if params:
                self.accept(",")
            params.append(self.paramdecl())
        self.take(")")
        return tuple(params)

    def paramdecl(self) -> Param:
        if self.accept("val"):
            return Param(self.name("parameter name").text, "val")
        if self.at("req") or self.at("opt"):
            qual = self.tok.text
            self.i += 1
        else:
            self.fail("'req', 'opt' or 'val'")
        pname = self.name("parameter name").text
        self.take(":")
        return Param(pname, qual, self.name("classifier name").text)

    def class_(self):
        kw = self.take("class")
        name = self.name("class name").text
        self.take("is")
        classifier = self.name("classifier name").text
        self.take("{")
        fields, methods = [], []
        while not self.at("}"):
            if self.at("method"):
                methods.append(self.method(name))
                continue
            qual = "opt"
            if self.at("req") or self.at("opt"):
                qual = self.tok.text
                self.i += 1
            fname = self.name("field name or 'method'").text
            self.take(":")
            ftype = self.name("classifier name").text
            self.take(";")
            fields.append(FieldDecl(fname, ftype, qual))
        self.take("}")
        return ClassDecl(name, classifier, tuple(fields), kw.line, kw.col), methods

    def method(self, owner: Optional[str]) -> MethodDecl:
        self.take("method")
        t = self.name("method name")
        params = self.param_list()
        body = self.block()
        return MethodDecl(MethodSignature(t.text, params, t.line, t.col), body, owner)

    # statements

    def block(self) -> tuple:
        self.take("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("'}'")
            stmts.append(self.stmt())
        self.take("}")
        return tuple(stmts)

    def stmt(self) -> Stmt:
        t = self.tok
        if self.accept("deref"):
            v = self.name("variable").text
            self.take(";")
            return Deref(v, t.line, t.col)
        if self.accept("call"):
            callee = self.name("method name").text
            self.take("(")
            args = []
            while not self.at(")"):
                if args:
                    self.accept(",")
                if self.accept("null"):
                    args.append(None)
                else:
                    args.append(self.name("argument").text)
            self.take(")")
            self.take(";")
            return Call(callee, tuple(args), t.line, t.col)
        if self.accept("return"):
            self.take(";")
            return Return(t.line, t.col)
        if self.accept("fail"):
            self.take(";")
            return Fail(t.line, t.col)
        if self.accept("if"):
            cond = self.cond()
            then = self.block()
            orelse = self.block() if self.accept("else") else ()
            return If(cond, then, orelse, t.line, t.col)
        if self.accept("while"):
            cond = self.cond()
            return While(cond, self.block(), t.line, t.col)
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            self.take("=")
            expr = self.expr()
            self.take(";")
            return Assign(t.text, expr, t.line, t.col)
        self.fail("statement")

    def expr(self) -> Expr:
        if self.accept("null"):
            return NullLit()
        if self.accept("new"):
            return New(self.name("classifier name").text)
        if self.accept("opaque"):
            return Opaque()
        return Var(self.name("expression").text)

    def cond(self) -> Cond:
        if self.accept("opaque"):
            return Opaque()
        v = self.name("condition variable").text
        if self.accept("=="):
            self.take("null")
            return IsNull(v)
        if self.accept("!="):
            self.take("null")
            return NotNull(v)
        self.fail("'==' or '!='")


def parse_program(text: str, validate: bool = True) -> Program:
    """Parse MOL source text.

    Raises MolError carrying positioned diagnostics on syntax errors and, when
    ``validate`` is true, on any violation reported by :func:`validate_program`.
    """
    try:
        program = _Parser(text).program()
    except RecursionError:
        raise MolError([Diagnostic("syntax", "nesting too deep")]) from None
    if validate:
        diags = validate_program(program)
        if diags:
            raise MolError(diags)
    return program


def parse_files(paths: Iterable, validate: bool = True) -> Program:
    """Parse and link several .mol files into one Program."""
    program = Program()
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            program = program.merged(parse_program(text, validate=False))
        except MolError as err:
            raise MolError(
                [Diagnostic(d.kind, d.message, f"{path}", d.line, d.col, d.severity) for d in err.diagnostics]
            ) from None
    if validate:
        diags = validate_program(program)
        if diags:
            raise MolError(diags)
    return program


# ---------------------------------------------------------------- validation


def validate_program(program: Program) -> list:
    """Return one diagnostic per violated Program invariant (empty when valid)."""
    diags: list = []
    err = diags.append
    idx = program.index

    def dup(kind: str, names: Iterable, decls: Iterable):
        seen = set()
        for n, d in zip(names, decls):
            if n in seen:
                err(Diagnostic("duplicate", f"duplicate {kind} {n}", n, d.line, d.col))
            seen.add(n)

    dup("classifier", (c.name for c in program.classifiers), program.classifiers)
    dup("face", (f.name for f in program.faces), program.faces)
    dup("class", (c.name for c in program.classes), program.classes)

    for c in program.classifiers:
        for parent in c.parents:
            if parent not in idx.classifiers:
                err(Diagnostic("unresolved", f"unresolved classifier {parent}", c.name, c.line, c.col))
    for c in _cyclic_classifiers(program):
        err(Diagnostic("cycle", "cyclic classifier hierarchy", c.name, c.line, c.col))

    def check_type(name: Optional[str], where: str, line: int, col: int):
        if name not in idx.classifiers:
            err(Diagnostic("unresolved", f"unresolved classifier {name}", where, line, col))

    for f in program.faces:
        seen_keys = set()
        for s in f.signatures:
            for p in s.params:
                if p.is_reference:
                    check_type(p.type_name, f.name, s.line, s.col)
            if s.key in seen_keys:
                err(Diagnostic("duplicate", f"duplicate signature {s.key} in face", f.name, s.line, s.col))
            seen_keys.add(s.key)
            _check_param_names(s, f.name, err)

    for c in program.classes:
        check_type(c.classifier, c.name, c.line, c.col)
        fnames = set()
        for fd in c.fields:
            check_type(fd.type_name, c.name, c.line, c.col)
            if fd.name in fnames:
                err(Diagnostic("duplicate", f"duplicate field {fd.name}", c.name, c.line, c.col))
            fnames.add(fd.name)

    scopes: dict = {}
    for m in program.methods:
        if m.owner is not None and m.owner not in idx.classes:
            err(Diagnostic("unresolved", f"unresolved class {m.owner}", m.qualified_name, m.line, m.col))
        scope = scopes.setdefault(m.owner, set())
        if m.key in scope:
            where = f"class {m.owner}" if m.owner else "global scope"
            err(Diagnostic("duplicate", f"duplicate method {m.key} in {where}", m.qualified_name, m.line, m.col))
        scope.add(m.key)
        for p in m.params:
            if p.is_reference:
                check_type(p.type_name, m.qualified_name, m.line, m.col)
        _check_param_names(m.signature, m.qualified_name, err)
        _check_body(m, idx, err)

    seen_entries = set()
    for e in program.entry_points:
        if e in seen_entries:
            err(Diagnostic("duplicate", f"duplicate entry {e}", e))
        seen_entries.add(e)
        try:
            idx.resolve_entry(e)
        except MolError as exc:
            diags.extend(exc.diagnostics)
    return diags


def _check_param_names(sig: MethodSignature, where: str, err):
    names = set()
    for p in sig.params:
        if p.name in names:
            err(Diagnostic("duplicate", f"duplicate parameter {p.name}", where, sig.line, sig.col))
        names.add(p.name)


def _cyclic_classifiers(program: Program) -> list:
    parents = {c.name: c.parents for c in program.classifiers}
    state: dict = {}
    on_cycle = set()

    def visit(n: str, stack: list):
        state[n] = 1
        stack.append(n)
        for p in parents.get(n, ()):
            if state.get(p) == 1:
                on_cycle.update(stack[stack.index(p):])
            elif p in parents and p not in state:
                visit(p, stack)
        stack.pop()
        state[n] = 2

    for c in program.classifiers:
        if c.name not in state:
            visit(c.name, [])
    return [c for c in program.classifiers if c.name in on_cycle]


def _variable_kinds(method: MethodDecl, where: str, err) -> dict:
    kinds = {p.name: ("ref" if p.is_reference else "val") for p in method.params}
    for s in iter_statements(method.body):
        if not isinstance(s, Assign):
            continue
        e = s.expr
        if isinstance(e, (NullLit, New)):
            k = "ref"
        elif isinstance(e, Opaque):
            k = "val"
        else:
            k = kinds.get(e.name)
        if k is None:
            continue
        prev = kinds.setdefault(s.var, k)
        if prev != k:
            err(Diagnostic("kind", f"inconsistent variable kind for {s.var}", where, s.line, s.col))
    return kinds


def _check_body(method: MethodDecl, idx: ProgramIndex, err):
    where = method.qualified_name
    kinds = _variable_kinds(method, where, err)
    known = set(kinds)

    def use(var: str, s, want: Optional[str] = None):
        if var not in known:
            err(Diagnostic("unassigned", f"undefined variable {var}", where, s.line, s.col))
            return
        if var not in assigned_now[0]:
            err(Diagnostic("unassigned", f"possibly-unassigned variable {var}", where, s.line, s.col))
        if want and kinds.get(var) not in (want, None):
            err(Diagnostic("kind", f"{var} is not a {'reference' if want == 'ref' else 'value'} variable",
                           where, s.line, s.col))

    assigned_now = [frozenset()]

    def cond_var(cond) -> Optional[str]:
        return cond.var if isinstance(cond, (IsNull, NotNull)) else None

    def walk(stmts, assigned: frozenset):
        """Return the definitely-assigned set after ``stmts``, or None if every path has left."""
        for s in stmts:
            if assigned is None:
                assigned = frozenset(known)  # unreachable code: do not report uses
            assigned_now[0] = assigned
            if isinstance(s, Deref):
                use(s.var, s, "ref")
            elif isinstance(s, Call):
                _check_call(s, idx, kinds, where, err, lambda v: use(v, s))
            elif isinstance(s, Assign):
                if isinstance(s.expr, Var):
                    use(s.expr.name, s)
                elif isinstance(s.expr, New) and s.expr.classifier not in idx.classifiers:
                    err(Diagnostic("unresolved", f"unresolved classifier {s.expr.classifier}", where, s.line, s.col))
                assigned = assigned | {s.var}
            elif isinstance(s, If):
                v = cond_var(s.cond)
                if v:
                    use(v, s, "ref")
                a = walk(s.then, assigned)
                b = walk(s.orelse, assigned)
                assigned = a if b is None else b if a is None else a & b
            elif isinstance(s, While):
                v = cond_var(s.cond)
                if v:
                    use(v, s, "ref")
                walk(s.body, assigned)
                assigned_now[0] = assigned
            elif isinstance(s, (Return, Fail)):
                assigned = None
        return assigned

    walk(method.body, frozenset(p.name for p in method.params))


def _check_call(s: Call, idx: ProgramIndex, kinds: dict, where: str, err, use):
    for a in s.args:
        if a is not None:
            use(a)
    if s.method not in idx.by_name:
        err(Diagnostic("unresolved", f"unresolved method {s.method}", where, s.line, s.col))
        return
    keys = idx.keys_for_call(s.method, len(s.args))
    if not keys:
        err(Diagnostic("arity", f"arity mismatch at call {s.method}(...)", where, s.line, s.col))
        return
    if len(keys) > 1:
        err(Diagnostic("ambiguous", f"ambiguous call {s.method}/{len(s.args)}", where, s.line, s.col))
        return
    for j, (a, ptype) in enumerate(zip(s.args, keys[0].types)):
        want = "val" if ptype == VALUE_TYPE else "ref"
        have = "ref" if a is None else kinds.get(a)
        if have is not None and have != want:
            err(Diagnostic("kind", f"argument {j} of {s.method} must be a "
                                   f"{'reference' if want == 'ref' else 'value'}", where, s.line, s.col))


# ------------------------------------------------------------------ printing


def _fmt_param(p: Param) -> str:
    return f"val {p.name}" if p.qualifier == "val" else f"{p.qualifier} {p.name}: {p.type_name}"


def _fmt_params(params: tuple) -> str:
    return ", ".join(_fmt_param(p) for p in params)


def _fmt_cond(c: Cond) -> str:
    if isinstance(c, IsNull):
        return f"{c.var} == null"
    if isinstance(c, NotNull):
        return f"{c.var} != null"
    return "opaque"


def _fmt_expr(e: Expr) -> str:
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, New):
        return f"new {e.classifier}"
    if isinstance(e, Var):
        return e.name
    return "opaque"


def _print_block(stmts: tuple, indent: str, out: list):
    for s in stmts:
        if isinstance(s, Deref):
            out.append(f"{indent}deref {s.var};")
        elif isinstance(s, Call):
            args = ", ".join("null" if a is None else a for a in s.args)
            out.append(f"{indent}call {s.method}({args});")
        elif isinstance(s, Assign):
            out.append(f"{indent}{s.var} = {_fmt_expr(s.expr)};")
        elif isinstance(s, Return):
            out.append(f"{indent}return;")
        elif isinstance(s, Fail):
            out.append(f"{indent}fail;")
        elif isinstance(s, If):
            out.append(f"{indent}if {_fmt_cond(s.cond)} {{")
            _print_block(s.then, indent + "  ", out)
            if s.orelse:
                out.append(f"{indent}}} else {{")
                _print_block(s.orelse, indent + "  ", out)
            out.append(f"{indent}}}")
        elif isinstance(s, While):
            out.append(f"{indent}while {_fmt_cond(s.cond)} {{")
            _print_block(s.body, indent + "  ", out)
            out.append(f"{indent}}}")


def _print_method(m: MethodDecl, indent: str, out: list):
    out.append(f"{indent}method {m.name}({_fmt_params(m.params)}) {{")
    _print_block(m.body, indent + "  ", out)
    out.append(f"{indent}}}")


def print_program(program: Program) -> str:
    """Render the canonical text form: classifiers, faces, classes, free methods, entries."""
    out: list = []
    for c in program.classifiers:
        ext = f" extends {', '.join(c.parents)}" if c.parents else ""
        out.append(f"classifier {c.name}{ext};")
    for f in program.faces:
        out.append("")
        out.append(f"face {f.name} {{")
        for s in f.signatures:
            out.append(f"  {s.name}({_fmt_params(s.params)});")
        out.append("}")
    owned: dict = {}
    for m in program.methods:
        if m.owner is not None:
            owned.setdefault(m.owner, []).append(m)
    for c in program.classes:
        out.append("")
        out.append(f"class {c.name} is {c.classifier} {{")
        for fd in c.fields:
            out.append(f"  {fd.qualifier} {fd.name}: {fd.type_name};")
        for m in owned.pop(c.name, []):
            _print_method(m, "  ", out)
        out.append("}")
    for m in program.methods:
        if m.owner is None:
            out.append("")
            _print_method(m, "", out)
    if program.entry_points:
        out.append("")
        out.append(f"entry {', '.join(program.entry_points)};")
    while out and out[0] == "":
        out.pop(0)
    return "\n".join(out) + "\n" if out else ""
