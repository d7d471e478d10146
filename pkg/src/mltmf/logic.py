"""Terms and well-formed formulas of the higher-order language.

Concrete syntax::

    ~A          negation            (binds tightest)
    A & B       conjunction         (left associative)
    A | B       disjunction         (left associative)
    A -> B      implication         (right associative)
    A <-> B     biconditional       (left associative, loosest)
    forall x. A / exists x. A       the body extends as far right as possible

``#`` starts a comment that runs to the end of the line.  Identifiers are
resolved against a :class:`Signature`: declared constants, functions and
predicates keep their class, any other bare identifier in term position is a
variable.  A binder over a declared function or predicate symbol is a
higher-order quantifier.
"""

from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Union

from .errors import (
    ArityMismatchError,
    FormulaSyntaxError,
    InvalidFormulaError,
    SelfApplicationError,
    SignatureError,
    UnknownSymbolError,
)

# ---------------------------------------------------------------------------
# signature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    """Declared symbols.  Predicates may have arity 0 (propositional letters)."""

    constants: frozenset = frozenset()
    functions: Mapping[str, int] = field(default_factory=dict)
    predicates: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "constants", frozenset(self.constants))
        object.__setattr__(self, "functions", dict(self.functions))
        object.__setattr__(self, "predicates", dict(self.predicates))
        seen = set(self.constants)
        for cls, table in (("function", self.functions), ("predicate", self.predicates)):
            for name, arity in table.items():
                if name in seen:
                    raise SignatureError(f"symbol {name!r} declared twice")
                seen.add(name)
                if not isinstance(arity, int) or isinstance(arity, bool):
                    raise SignatureError(f"{cls} {name!r} has non-integer arity {arity!r}")
                if arity < (1 if cls == "function" else 0):
                    raise SignatureError(f"{cls} {name!r} has invalid arity {arity}")
        for name in seen:
            if not _IDENT_RE.fullmatch(name) or name in KEYWORDS:
                raise SignatureError(f"{name!r} is not a valid identifier")

    def __hash__(self):
        return hash((self.constants, tuple(sorted(self.functions.items())),
                     tuple(sorted(self.predicates.items()))))

    def __contains__(self, name):
        return name in self.constants or name in self.functions or name in self.predicates

    def kind(self, name):
        if name in self.constants:
            return "constant"
        if name in self.functions:
            return "function"
        if name in self.predicates:
            return "predicate"
        return None

    def arity(self, name):
        if name in self.functions:
            return self.functions[name]
        return self.predicates.get(name)

    def merge(self, other: "Signature") -> "Signature":
        """Union of two signatures; conflicting declarations raise SignatureError."""
        funcs = dict(self.functions)
        preds = dict(self.predicates)
        for name, ar in other.functions.items():
            if funcs.get(name, ar) != ar:
                raise SignatureError(f"function {name!r} declared with arities {funcs[name]} and {ar}")
            funcs[name] = ar
        for name, ar in other.predicates.items():
            if preds.get(name, ar) != ar:
                raise SignatureError(f"predicate {name!r} declared with arities {preds[name]} and {ar}")
            preds[name] = ar
        return Signature(self.constants | other.constants, funcs, preds)

    def with_constants(self, names: Iterable[str]) -> "Signature":
        return Signature(self.constants | set(names), self.functions, self.predicates)

    def to_json(self) -> dict:
        return {
            "constants": sorted(self.constants),
            "functions": dict(sorted(self.functions.items())),
            "predicates": dict(sorted(self.predicates.items())),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Signature":
        return cls(
            frozenset(data.get("constants", ())),
            dict(data.get("functions", {})),
            dict(data.get("predicates", {})),
        )


def load_signature(path) -> Signature:
    return Signature.from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# abstract syntax
# ---------------------------------------------------------------------------


def _tupled(obj, attr="args"):
    value = getattr(obj, attr)
    if not isinstance(value, tuple):
        object.__setattr__(obj, attr, tuple(value))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Elem:
    """A domain element.  Appears only in grounded formulas."""

    name: str


@dataclass(frozen=True)
class Func:
    name: str
    args: tuple = ()

    def __post_init__(self):
        _tupled(self)


@dataclass(frozen=True)
class PredTerm:
    """A predicate applied to terms, used in term position."""

    name: str
    args: tuple = ()

    def __post_init__(self):
        _tupled(self)


Term = Union[Var, Const, Elem, Func, PredTerm]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()

    def __post_init__(self):
        _tupled(self)

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Not:
    body: "Wff"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Implies:
    left: "Wff"
    right: "Wff"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class And:
    left: "Wff"
    right: "Wff"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Or:
    left: "Wff"
    right: "Wff"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Iff:
    left: "Wff"
    right: "Wff"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class ForAll:
    var: str
    body: "Wff"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Wff"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Truth:
    """Truth constant; produced by grounding, never by the parser."""

    value: bool

    def __str__(self):
        return format_formula(self)


Wff = Union[Atom, Not, Implies, And, Or, Iff, ForAll, Exists, Truth]
BINARY = (Implies, And, Or, Iff)
QUANTIFIERS = (ForAll, Exists)
SUGAR = (And, Or, Iff, Exists)


def conjoin(formulas: Iterable[Wff]) -> Wff:
    items = list(formulas)
    if not items:
        return Truth(True)
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disjoin(formulas: Iterable[Wff]) -> Wff:
    items = list(formulas)
    if not items:
        return Truth(False)
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


# ---------------------------------------------------------------------------
# traversal helpers
# ---------------------------------------------------------------------------


def subterms(term) -> Iterator:
    yield term
    if isinstance(term, (Func, PredTerm)):
        for a in term.args:
            yield from subterms(a)


def iter_nodes(f, path=""):
    """Yield ``(node, path)`` for every formula and term node, pre-order."""
    yield f, path
    if isinstance(f, (Atom, Func, PredTerm)):
        for i, a in enumerate(f.args):
            yield from iter_nodes(a, f"{path}.args[{i}]" if path else f"args[{i}]")
    elif isinstance(f, Not):
        yield from iter_nodes(f.body, _join(path, "body"))
    elif isinstance(f, BINARY):
        yield from iter_nodes(f.left, _join(path, "left"))
        yield from iter_nodes(f.right, _join(path, "right"))
    elif isinstance(f, QUANTIFIERS):
        yield from iter_nodes(f.body, _join(path, "body"))


def _join(path, part):
    return f"{path}.{part}" if path else part


@functools.lru_cache(maxsize=1 << 16)
def symbols_of(f) -> dict:
    """Names used in *f* grouped by class: constants, functions, predicates, binders.

    Results are cached per formula; callers must not modify them.
    """
    out = {"constants": set(), "functions": {}, "predicates": {}, "binders": set()}
    for node, _ in iter_nodes(f):
        if isinstance(node, Const):
            out["constants"].add(node.name)
        elif isinstance(node, Func):
            out["functions"].setdefault(node.name, len(node.args))
        elif isinstance(node, (Atom, PredTerm)):
            name = node.pred if isinstance(node, Atom) else node.name
            out["predicates"].setdefault(name, len(node.args))
        elif isinstance(node, QUANTIFIERS):
            out["binders"].add(node.var)
    return out


def infer_signature(formulas: Iterable[Wff], base: Signature | None = None) -> Signature:
    """Smallest signature declaring every symbol used by *formulas* (merged into *base*)."""
    consts, funcs, preds = set(), {}, {}
    for f in formulas:
        syms = symbols_of(f)
        consts |= syms["constants"]
        for table, target in ((syms["functions"], funcs), (syms["predicates"], preds)):
            for name, ar in table.items():
                if target.setdefault(name, ar) != ar:
                    raise SignatureError(f"{name!r} used with arities {target[name]} and {ar}")
    sig = Signature(frozenset(consts), funcs, preds)
    return base.merge(sig) if base is not None else sig


def free_variables(f, sig: Signature | None = None) -> set:
    """Free first-order variables of *f*."""
    if isinstance(f, Var):
        return {f.name}
    if isinstance(f, (Const, Elem, Truth)):
        return set()
    if isinstance(f, (Atom, Func, PredTerm)):
        out = set()
        for a in f.args:
            out |= free_variables(a, sig)
        return out
    if isinstance(f, Not):
        return free_variables(f.body, sig)
    if isinstance(f, BINARY):
        return free_variables(f.left, sig) | free_variables(f.right, sig)
    if isinstance(f, QUANTIFIERS):
        return free_variables(f.body, sig) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def substitute(f, mapping: Mapping[str, object]):
    """Replace free variables by terms (no capture check: values must be closed)."""
    if not mapping:
        return f
    if isinstance(f, Var):
        return mapping.get(f.name, f)
    if isinstance(f, (Const, Elem, Truth)):
        return f
    if isinstance(f, Func):
        return Func(f.name, tuple(substitute(a, mapping) for a in f.args))
    if isinstance(f, PredTerm):
        return PredTerm(f.name, tuple(substitute(a, mapping) for a in f.args))
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(substitute(a, mapping) for a in f.args))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, BINARY):
        return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, QUANTIFIERS):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return type(f)(f.var, substitute(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def is_quantifier_free(f) -> bool:
    return not any(isinstance(n, QUANTIFIERS) for n, _ in iter_nodes(f))


# ---------------------------------------------------------------------------
# sugar
# ---------------------------------------------------------------------------


def desugar(f: Wff) -> Wff:
    """Rewrite And/Or/Iff/Exists into the primitive connectives ~, ->, forall."""
    if isinstance(f, (Atom, Truth)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.body))
    if isinstance(f, Implies):
        return Implies(desugar(f.left), desugar(f.right))
    if isinstance(f, And):
        return Not(Implies(desugar(f.left), Not(desugar(f.right))))
    if isinstance(f, Or):
        return Implies(Not(desugar(f.left)), desugar(f.right))
    if isinstance(f, Iff):
        a, b = desugar(f.left), desugar(f.right)
        return Not(Implies(Implies(a, b), Not(Implies(b, a))))
    if isinstance(f, ForAll):
        return ForAll(f.var, desugar(f.body))
    if isinstance(f, Exists):
        return Not(ForAll(f.var, Not(desugar(f.body))))
    raise TypeError(f"not a formula: {f!r}")


def resugar(f: Wff) -> Wff:
    """Inverse pattern rewrite of :func:`desugar`, applied bottom-up."""
    if isinstance(f, (Atom, Truth)):
        return f
    if isinstance(f, QUANTIFIERS):
        return type(f)(f.var, resugar(f.body))
    if isinstance(f, BINARY):
        g = type(f)(resugar(f.left), resugar(f.right))
        if isinstance(g, Implies) and isinstance(g.left, Not):
            return Or(g.left.body, g.right)
        if (isinstance(g, And) and isinstance(g.left, Implies) and isinstance(g.right, Implies)
                and g.left.left == g.right.right and g.left.right == g.right.left):
            return Iff(g.left.left, g.left.right)
        return g
    if isinstance(f, Not):
        body = resugar(f.body)
        if isinstance(body, Implies) and isinstance(body.right, Not):
            g = And(body.left, body.right.body)
            if (isinstance(g.left, Implies) and isinstance(g.right, Implies)
                    and g.left.left == g.right.right and g.left.right == g.right.left):
                return Iff(g.left.left, g.left.right)
            return g
        if isinstance(body, ForAll) and isinstance(body.body, Not):
            return Exists(body.var, body.body.body)
        return Not(body)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_OPS = {Iff: "<->", Implies: "->", Or: "|", And: "&"}
_NOT_PREC = 5


def format_term(t) -> str:
    if isinstance(t, (Var, Const, Elem)):
        return t.name
    if isinstance(t, (Func, PredTerm)):
        if not t.args:
            return t.name
        return f"{t.name}({', '.join(format_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


def format_formula(f: Wff) -> str:
    """Canonical text with minimal parentheses; ``parse_formula`` inverts it."""
    return _fmt(f, 0, True)


def _fmt(f, ctx, rightmost):
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(format_term(a) for a in f.args)})"
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return "~" + _fmt(f.body, _NOT_PREC, rightmost)
    if isinstance(f, QUANTIFIERS):
        kw = "forall" if isinstance(f, ForAll) else "exists"
        text = f"{kw} {f.var}. {_fmt(f.body, 0, True)}"
        return text if rightmost else f"({text})"
    if isinstance(f, BINARY):
        p = _PREC[type(f)]
        if p < ctx:
            return "(" + _fmt(f, 0, True) + ")"
        if isinstance(f, Implies):
            lctx, rctx = p + 1, p
        else:
            lctx, rctx = p, p + 1
        left = _fmt(f.left, lctx, False)
        right = _fmt(f.right, rctx, rightmost)
        return f"{left} {_OPS[type(f)]} {right}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# lexer / parser
# ---------------------------------------------------------------------------

KEYWORDS = frozenset({"forall", "exists"})
_IDENT_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_']*")
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iff><->|↔)
  | (?P<imp>->|→)
  | (?P<not>~|¬)
  | (?P<and>&|∧)
  | (?P<or>\||∨)
  | (?P<lp>\()
  | (?P<rp>\))
  | (?P<comma>,)
  | (?P<dot>\.)
  | (?P<forall>∀)
  | (?P<exists>∃)
  | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            if kind == "ident" and m.group() in KEYWORDS:
                kind = m.group()
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, sig):
        self.tokens = tokenize(text)
        self.i = 0
        self.sig = sig

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind, what):
        if self.tok.kind != kind:
            raise FormulaSyntaxError(f"unexpected {self.tok.text or 'end of input'!r}", self.tok.pos, (what,))
        return self.advance()

    def parse(self):
        f = self.iff()
        if self.tok.kind != "eof":
            raise FormulaSyntaxError(
                f"unexpected {self.tok.text!r}", self.tok.pos, ("'&'", "'|'", "'->'", "'<->'", "end of input")
            )
        return f

    def iff(self):
        f = self.imp()
        while self.tok.kind == "iff":
            self.advance()
            f = Iff(f, self.imp())
        return f

    def imp(self):
        f = self.disj()
        if self.tok.kind == "imp":
            self.advance()
            return Implies(f, self.imp())
        return f

    def disj(self):
        f = self.conj()
        while self.tok.kind == "or":
            self.advance()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.tok.kind == "and":
            self.advance()
            f = And(f, self.unary())
        return f

    def unary(self):
        t = self.tok
        if t.kind == "not":
            self.advance()
            return Not(self.unary())
        if t.kind in ("forall", "exists"):
            self.advance()
            name = self.expect("ident", "binder name")
            if self.sig.kind(name.text) == "constant":
                raise FormulaSyntaxError(f"constant {name.text!r} cannot be quantified", name.pos)
            self.expect("dot", "'.'")
            body = self.iff()
            return ForAll(name.text, body) if t.kind == "forall" else Exists(name.text, body)
        if t.kind == "lp":
            self.advance()
            f = self.iff()
            self.expect("rp", "')'")
            return f
        if t.kind == "ident":
            return self.atom()
        raise FormulaSyntaxError(
            f"unexpected {t.text or 'end of input'!r}", t.pos, ("formula", "'~'", "'('", "'forall'", "'exists'")
        )

    def arglist(self):
        args = []
        if self.tok.kind == "lp":
            self.advance()
            args.append(self.term())
            while self.tok.kind == "comma":
                self.advance()
                args.append(self.term())
            self.expect("rp", "')'")
        return args

    def atom(self):
        name = self.advance()
        kind = self.sig.kind(name.text)
        has_args = self.tok.kind == "lp"
        args = self.arglist()
        if kind == "predicate":
            return Atom(name.text, args)
        if kind is None:
            raise UnknownSymbolError(name.text, f"unknown predicate {name.text!r} at position {name.pos}")
        what = "function" if kind == "function" else "constant"
        raise FormulaSyntaxError(
            f"{what} {name.text!r} used as a formula{'' if has_args else ''}", name.pos, ("predicate",)
        )

    def term(self):
        t = self.tok
        if t.kind != "ident":
            raise FormulaSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos, ("term",))
        self.advance()
        kind = self.sig.kind(t.text)
        if self.tok.kind == "lp":
            args = self.arglist()
            if kind == "function":
                return Func(t.text, args)
            if kind == "predicate":
                return PredTerm(t.text, args)
            if kind == "constant":
                raise FormulaSyntaxError(f"constant {t.text!r} applied to arguments", t.pos)
            raise UnknownSymbolError(t.text, f"unknown function {t.text!r} at position {t.pos}")
        if kind == "constant":
            return Const(t.text)
        if kind == "function":
            return Func(t.text, ())
        if kind == "predicate":
            return PredTerm(t.text, ())
        return Var(t.text)


def parse_unchecked(text: str, sig: Signature) -> Wff:
    """Parse *text* without validating arities or self-application."""
    return _Parser(text, sig).parse()


def parse_formula(text: str, sig: Signature) -> Wff:
    """Parse and validate *text*; raise on the first problem found."""
    f = _Parser(text, sig).parse()
    report = validate_wff(f, sig)
    report.raise_first()
    return f


def parse_term(text: str, sig: Signature):
    p = _Parser(text, sig)
    t = p.term()
    if p.tok.kind != "eof":
        raise FormulaSyntaxError(f"unexpected {p.tok.text!r}", p.tok.pos, ("end of input",))
    return t


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    kind: str  # "arity" | "self_application" | "unknown_symbol" | "bad_binder" | "not_wff"
    symbol: str
    path: str
    message: str
    inner_path: str = ""
    expected: int | None = None
    got: int | None = None

    def to_json(self):
        return {"kind": self.kind, "symbol": self.symbol, "path": self.path or "<root>",
                "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def __bool__(self):
        return self.ok

    def of_kind(self, kind):
        return [f for f in self.findings if f.kind == kind]

    def raise_first(self):
        for f in self.findings:
            if f.kind == "self_application":
                raise SelfApplicationError(f.symbol, f.path, f.inner_path)
            if f.kind == "arity":
                raise ArityMismatchError(f.symbol, f.expected, f.got, f.path)
            if f.kind == "unknown_symbol":
                raise UnknownSymbolError(f.symbol)
            raise InvalidFormulaError(f.message)


def _first_occurrence(args, name, base):
    for i, a in enumerate(args):
        for node, p in iter_nodes(a, f"{base}.args[{i}]" if base else f"args[{i}]"):
            if isinstance(node, (Func, PredTerm)) and node.name == name:
                return p
    return None


def validate_wff(f, sig: Signature) -> ValidationReport:
    """Every arity violation, unknown symbol and self-application in *f*."""
    findings = []
    for node, path in iter_nodes(f):
        if isinstance(node, (Atom, Func, PredTerm)):
            name = node.pred if isinstance(node, Atom) else node.name
            want = "function" if isinstance(node, Func) else "predicate"
            kind = sig.kind(name)
            if kind != want:
                msg = f"{name!r} is not a declared {want}" if kind is None else f"{name!r} is a {kind}, not a {want}"
                findings.append(Finding("unknown_symbol", name, path, msg))
            elif sig.arity(name) != len(node.args):
                findings.append(Finding(
                    "arity", name, path,
                    f"{name!r} expects {sig.arity(name)} argument(s), got {len(node.args)}",
                    expected=sig.arity(name), got=len(node.args)))
            inner = _first_occurrence(node.args, name, path)
            if inner is not None:
                findings.append(Finding(
                    "self_application", name, path,
                    f"{name!r} occurs inside its own arguments at {inner}", inner_path=inner))
        elif isinstance(node, Const):
            if sig.kind(node.name) != "constant":
                findings.append(Finding("unknown_symbol", node.name, path, f"{node.name!r} is not a declared constant"))
        elif isinstance(node, QUANTIFIERS):
            if sig.kind(node.var) == "constant":
                findings.append(Finding("bad_binder", node.var, path, f"constant {node.var!r} cannot be quantified"))
        elif isinstance(node, (Elem, Truth)):
            findings.append(Finding("not_wff", getattr(node, "name", str(node)), path,
                                    "ground-only node in formula"))
    return ValidationReport(tuple(findings))


def binder_kind(name: str, sig: Signature) -> str:
    """'variable', 'function' or 'predicate' for a quantifier binder."""
    kind = sig.kind(name)
    if kind in ("function", "predicate"):
        return kind
    if kind == "constant":
        raise InvalidFormulaError(f"constant {name!r} cannot be quantified")
    return "variable"
