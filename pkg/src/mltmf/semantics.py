"""Finite interpretations, grounding, truth evaluation, entailment and consistency.

Two evaluation routes exist on purpose: :func:`evaluate` walks the formula
with an environment, while :func:`ground` expands quantifiers first and
:func:`evaluate_ground` reads the tables off the expanded tree.

Entailment and consistency quantify over every interpretation with a given
domain size in which distinct constants denote distinct elements; relations
and function tables range freely.  They are decided by grounding to
propositional atoms and running the DPLL search in :mod:`mltmf.sat`.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import sat
from .errors import (
    BudgetExceeded,
    FreeVariableError,
    MissingTableError,
    SignatureError,
    UnknownSymbolError,
)
from .logic import (
    And,
    Atom,
    BINARY,
    Const,
    Elem,
    Exists,
    ForAll,
    Func,
    Iff,
    Implies,
    Not,
    Or,
    PredTerm,
    QUANTIFIERS,
    Signature,
    Truth,
    Var,
    Wff,
    binder_kind,
    format_formula,
    free_variables,
    infer_signature,
    iter_nodes,
    symbols_of,
)


@dataclass(frozen=True)
class QuantifierBudget:
    """Caps on quantifier expansion and on the size of propositional problems."""

    max_domain_for_ho: int = 4
    max_ho_arity: int = 2
    max_ground_atoms: int = 24
    max_ho_candidates: int = 1 << 16

    def __post_init__(self):
        for name in ("max_domain_for_ho", "max_ho_arity", "max_ground_atoms", "max_ho_candidates"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_BUDGET = QuantifierBudget()


# ---------------------------------------------------------------------------
# interpretations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Interpretation:
    signature: Signature
    domain: tuple
    constants: Mapping[str, str] = field(default_factory=dict)
    functions: Mapping[str, Mapping[tuple, str]] = field(default_factory=dict)
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    designated_true: str | None = None
    designated_false: str | None = None

    def __post_init__(self):
        dom = tuple(self.domain)
        object.__setattr__(self, "domain", dom)
        if not dom:
            raise ValueError("interpretation domain must be non-empty")
        if len(set(dom)) != len(dom):
            raise ValueError("duplicate domain elements")
        dset = set(dom)
        sig = self.signature
        consts = dict(self.constants)
        for c in sig.constants:
            if c not in consts:
                raise MissingTableError(f"no element assigned to constant {c!r}")
            if consts[c] not in dset:
                raise ValueError(f"constant {c!r} denotes {consts[c]!r}, not in the domain")
        funcs = {}
        for f, ar in sig.functions.items():
            if f not in self.functions:
                raise MissingTableError(f"no table for function {f!r}")
            table = {tuple(k): v for k, v in self.functions[f].items()}
            for args in itertools.product(dom, repeat=ar):
                if table.get(args) not in dset:
                    raise MissingTableError(f"function {f!r} undefined or out of domain at {args}")
            funcs[f] = table
        rels = {}
        for p, ar in sig.predicates.items():
            if p not in self.relations:
                raise MissingTableError(f"no table for predicate {p!r}")
            rows = frozenset(tuple(r) for r in self.relations[p])
            for r in rows:
                if len(r) != ar or not set(r) <= dset:
                    raise ValueError(f"bad tuple {r} for predicate {p!r}/{ar}")
            rels[p] = rows
        for d in (self.designated_true, self.designated_false):
            if d is not None and d not in dset:
                raise ValueError(f"designated element {d!r} not in the domain")
        object.__setattr__(self, "constants", consts)
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "relations", rels)

    def __eq__(self, other):
        if not isinstance(other, Interpretation):
            return NotImplemented
        return (self.signature == other.signature and set(self.domain) == set(other.domain)
                and self.constants == other.constants and self.functions == other.functions
                and self.relations == other.relations
                and self.designated_true == other.designated_true
                and self.designated_false == other.designated_false)

    def rename(self, mapping: Mapping[str, str]) -> "Interpretation":
        """Isomorphic copy with domain elements renamed by *mapping*."""
        m = lambda d: mapping.get(d, d)  # noqa: E731
        return Interpretation(
            self.signature,
            tuple(m(d) for d in self.domain),
            {c: m(d) for c, d in self.constants.items()},
            {f: {tuple(map(m, k)): m(v) for k, v in t.items()} for f, t in self.functions.items()},
            {p: frozenset(tuple(map(m, r)) for r in rows) for p, rows in self.relations.items()},
            m(self.designated_true) if self.designated_true is not None else None,
            m(self.designated_false) if self.designated_false is not None else None,
        )

    def with_relation(self, pred: str, rows) -> "Interpretation":
        rels = dict(self.relations)
        rels[pred] = frozenset(tuple(r) for r in rows)
        return Interpretation(self.signature, self.domain, self.constants, self.functions,
                              rels, self.designated_true, self.designated_false)

    def with_function(self, name: str, table) -> "Interpretation":
        funcs = dict(self.functions)
        funcs[name] = dict(table)
        return Interpretation(self.signature, self.domain, self.constants, funcs,
                              self.relations, self.designated_true, self.designated_false)

    def to_json(self) -> dict:
        out = {
            "domain": list(self.domain),
            "constants": dict(sorted(self.constants.items())),
            "functions": {f: {",".join(k): v for k, v in sorted(t.items())}
                          for f, t in sorted(self.functions.items())},
            "relations": {p: sorted(list(r) for r in rows) for p, rows in sorted(self.relations.items())},
        }
        if self.designated_true is not None:
            out["designated_true"] = self.designated_true
        if self.designated_false is not None:
            out["designated_false"] = self.designated_false
        return out

    @classmethod
    def from_json(cls, data: Mapping, sig: Signature | None = None) -> "Interpretation":
        funcs = {f: {tuple(k.split(",")): v for k, v in t.items()}
                 for f, t in data.get("functions", {}).items()}
        rels = {p: frozenset(tuple(r) for r in rows) for p, rows in data.get("relations", {}).items()}
        if sig is None:
            if "signature" in data:
                sig = Signature.from_json(data["signature"])
            else:
                preds = {}
                for p, rows in rels.items():
                    if not rows:
                        raise SignatureError(f"cannot infer arity of empty relation {p!r}; supply a signature")
                    preds[p] = len(next(iter(rows)))
                sig = Signature(frozenset(data.get("constants", {})),
                                {f: len(next(iter(t))) for f, t in funcs.items() if t}, preds)
        return cls(sig, tuple(data["domain"]), dict(data.get("constants", {})), funcs, rels,
                   data.get("designated_true"), data.get("designated_false"))


def load_interpretation(path, sig: Signature | None = None) -> Interpretation:
    return Interpretation.from_json(json.loads(Path(path).read_text()), sig)


# ---------------------------------------------------------------------------
# higher-order candidate enumeration
# ---------------------------------------------------------------------------


def _ho_count(kind, n, arity):
    cells = n ** arity
    return 2 ** cells if kind == "predicate" else n ** cells


def _check_ho_budget(kind, name, n, arity, budget):
    count = _ho_count(kind, n, arity)
    what = "relations" if kind == "predicate" else "function tables"
    if n > budget.max_domain_for_ho:
        raise BudgetExceeded(f"quantifier over {name!r} on a domain of {n} (limit {budget.max_domain_for_ho}) "
                             f"would enumerate {what}", count)
    if arity > budget.max_ho_arity:
        raise BudgetExceeded(f"quantified symbol {name!r} has arity {arity} (limit {budget.max_ho_arity}); "
                             f"{what} to enumerate", count)
    if count > budget.max_ho_candidates:
        raise BudgetExceeded(f"{what} enumerated by quantifier over {name!r}", count, budget.max_ho_candidates)
    return count


def _enumerate_relations(domain, arity):
    cells = list(itertools.product(domain, repeat=arity))
    for mask in range(1 << len(cells)):
        yield frozenset(c for i, c in enumerate(cells) if mask >> i & 1)


def _enumerate_tables(domain, arity):
    cells = list(itertools.product(domain, repeat=arity))
    for values in itertools.product(domain, repeat=len(cells)):
        yield dict(zip(cells, values))


def _candidates(kind, name, domain, arity, budget):
    _check_ho_budget(kind, name, len(domain), arity, budget)
    if kind == "predicate":
        return _enumerate_relations(domain, arity)
    return _enumerate_tables(domain, arity)


# ---------------------------------------------------------------------------
# direct evaluation
# ---------------------------------------------------------------------------


def evaluate(f: Wff, interp: Interpretation, budget: QuantifierBudget = DEFAULT_BUDGET,
             assignment: Mapping[str, str] | None = None) -> bool:
    """Classical truth value of *f* under *interp* (free variables via *assignment*)."""
    env = ({} if assignment is None else dict(assignment), {}, {})
    return _eval(f, interp, budget, env)


def _term_value(t, interp, env):
    vars_, rels, funcs = env
    if isinstance(t, Var):
        if t.name not in vars_:
            raise FreeVariableError(f"free variable {t.name!r} has no value")
        return vars_[t.name]
    if isinstance(t, Const):
        try:
            return interp.constants[t.name]
        except KeyError:
            raise UnknownSymbolError(t.name) from None
    if isinstance(t, Elem):
        return t.name
    if isinstance(t, Func):
        args = tuple(_term_value(a, interp, env) for a in t.args)
        table = funcs.get(t.name)
        if table is None:
            table = interp.functions.get(t.name)
            if table is None:
                raise MissingTableError(f"no table for function {t.name!r}")
        return table[args]
    if isinstance(t, PredTerm):
        holds = _relation_holds(t.name, tuple(_term_value(a, interp, env) for a in t.args), interp, env)
        return _designated(interp, holds)
    raise TypeError(f"not a term: {t!r}")


def _designated(interp, holds):
    d = interp.designated_true if holds else interp.designated_false
    if d is None:
        raise MissingTableError("predicate used as a term but no designated true/false elements")
    return d


def _relation_holds(name, args, interp, env):
    rels = env[1]
    if name in rels:
        return args in rels[name]
    rows = interp.relations.get(name)
    if rows is None:
        raise MissingTableError(f"no table for predicate {name!r}")
    return args in rows


def _eval(f, interp, budget, env):
    if isinstance(f, Atom):
        return _relation_holds(f.pred, tuple(_term_value(a, interp, env) for a in f.args), interp, env)
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Not):
        return not _eval(f.body, interp, budget, env)
    if isinstance(f, Implies):
        return (not _eval(f.left, interp, budget, env)) or _eval(f.right, interp, budget, env)
    if isinstance(f, And):
        return _eval(f.left, interp, budget, env) and _eval(f.right, interp, budget, env)
    if isinstance(f, Or):
        return _eval(f.left, interp, budget, env) or _eval(f.right, interp, budget, env)
    if isinstance(f, Iff):
        return _eval(f.left, interp, budget, env) == _eval(f.right, interp, budget, env)
    if isinstance(f, QUANTIFIERS):
        universal = isinstance(f, ForAll)
        vars_, rels, funcs = env
        kind = binder_kind(f.var, interp.signature)
        if kind == "variable":
            values = interp.domain
            make = lambda v: ({**vars_, f.var: v}, rels, funcs)  # noqa: E731
        elif kind == "predicate":
            values = _candidates(kind, f.var, interp.domain, interp.signature.predicates[f.var], budget)
            make = lambda v: (vars_, {**rels, f.var: v}, funcs)  # noqa: E731
        else:
            values = _candidates(kind, f.var, interp.domain, interp.signature.functions[f.var], budget)
            make = lambda v: (vars_, rels, {**funcs, f.var: v})  # noqa: E731
        for v in values:
            if _eval(f.body, interp, budget, make(v)) != universal:
                return not universal
        return universal
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# grounding
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroundFormula:
    """Quantifier-free, variable-free formula plus the tables chosen for bound symbols.

    Higher-order binders are expanded by renaming each bound occurrence to a
    fresh symbol (``P@3``) whose concrete table is stored in ``relations`` or
    ``functions``.
    """

    formula: Wff
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    functions: Mapping[str, Mapping[tuple, str]] = field(default_factory=dict)

    def __str__(self):
        return format_formula(self.formula)

    def atoms(self):
        return {n for n, _ in iter_nodes(self.formula) if isinstance(n, Atom)}


def ground(f: Wff, interp: Interpretation, budget: QuantifierBudget = DEFAULT_BUDGET,
           assignment: Mapping[str, str] | None = None) -> GroundFormula:
    """Expand every quantifier of *f* over the domain of *interp*."""
    for node, _ in iter_nodes(f):
        if isinstance(node, Atom) and node.pred not in interp.signature.predicates:
            raise UnknownSymbolError(node.pred)
        if isinstance(node, Func) and node.name not in interp.signature.functions:
            raise UnknownSymbolError(node.name)
    g = _Grounder(interp.domain, interp.signature, budget)
    env = {k: Elem(v) for k, v in (assignment or {}).items()}
    formula = g.ground(f, env)
    return GroundFormula(formula, g.relations, g.functions)


class _Grounder:
    def __init__(self, domain, sig, budget):
        self.domain = tuple(domain)
        self.sig = sig
        self.budget = budget
        self.relations = {}
        self.functions = {}
        self.counter = 0

    def fresh(self, name):
        self.counter += 1
        return f"{name}@{self.counter}"

    def term(self, t, env):
        if isinstance(t, Var):
            v = env.get(t.name)
            if v is None:
                raise FreeVariableError(f"free variable {t.name!r} has no value")
            return v
        if isinstance(t, (Const, Elem)):
            return t
        if isinstance(t, Func):
            return Func(env.get(("sym", t.name), t.name), tuple(self.term(a, env) for a in t.args))
        if isinstance(t, PredTerm):
            return PredTerm(env.get(("sym", t.name), t.name), tuple(self.term(a, env) for a in t.args))
        raise TypeError(f"not a term: {t!r}")

    def ground(self, f, env):
        if isinstance(f, Atom):
            return Atom(env.get(("sym", f.pred), f.pred), tuple(self.term(a, env) for a in f.args))
        if isinstance(f, Truth):
            return f
        if isinstance(f, Not):
            return Not(self.ground(f.body, env))
        if isinstance(f, BINARY):
            return type(f)(self.ground(f.left, env), self.ground(f.right, env))
        if isinstance(f, QUANTIFIERS):
            join = And if isinstance(f, ForAll) else Or
            kind = binder_kind(f.var, self.sig)
            parts = []
            if kind == "variable":
                for d in self.domain:
                    parts.append(self.ground(f.body, {**env, f.var: Elem(d)}))
            else:
                arity = self.sig.arity(f.var)
                store = self.relations if kind == "predicate" else self.functions
                for table in _candidates(kind, f.var, self.domain, arity, self.budget):
                    name = self.fresh(f.var)
                    store[name] = table
                    parts.append(self.ground(f.body, {**env, ("sym", f.var): name}))
            out = parts[0]
            for p in parts[1:]:
                out = join(out, p)
            return out
        raise TypeError(f"not a formula: {f!r}")


def evaluate_ground(g: GroundFormula, interp: Interpretation) -> bool:
    """Truth value of a grounded formula under *interp*."""
    env = ({}, dict(g.relations), dict(g.functions))
    return _eval(g.formula, interp, DEFAULT_BUDGET, env)


# ---------------------------------------------------------------------------
# propositional translation
# ---------------------------------------------------------------------------

TOP, BOT = "_top", "_bot"


class _Translator:
    """Ground formulas to propositional formulas over relation atoms and function entries."""

    def __init__(self, domain, ground_tables):
        self.domain = tuple(domain)
        self.relations, self.functions = ground_tables
        self.fn_groups = {}

    def fn_entry(self, name, args):
        key = (name, args)
        if key not in self.fn_groups:
            self.fn_groups[key] = [("fn", name, args, d) for d in self.domain]
        return {d: sat.p_var(("fn", name, args, d)) for d in self.domain}

    def term(self, t):
        """A fixed element name, or a dict element -> propositional condition."""
        if isinstance(t, (Const, Elem)):
            return t.name
        args = [self.term(a) for a in t.args]
        if isinstance(t, Func):
            if all(isinstance(a, str) for a in args):
                args = tuple(args)
                if t.name in self.functions:
                    return self.functions[t.name][args]
                return self.fn_entry(t.name, args)
            out = {d: [] for d in self.domain}
            for combo, cond in self._combos(args):
                if t.name in self.functions:
                    out[self.functions[t.name][combo]].append(cond)
                else:
                    for d, c in self.fn_entry(t.name, combo).items():
                        out[d].append(sat.p_and(cond, c))
            return {d: sat.p_or(*cs) for d, cs in out.items()}
        if isinstance(t, PredTerm):
            holds = self.atom(t.name, args)
            return {TOP: holds, BOT: sat.p_not(holds)}
        raise TypeError(f"not a ground term: {t!r}")

    def _combos(self, args):
        options = []
        for a in args:
            if isinstance(a, str):
                options.append([(a, sat.TRUE)])
            else:
                options.append([(d, c) for d, c in a.items() if c != sat.FALSE])
        for combo in itertools.product(*options):
            yield tuple(d for d, _ in combo), sat.p_and(*(c for _, c in combo))

    def atom(self, name, args):
        if all(isinstance(a, str) for a in args):
            args = tuple(args)
            if name in self.relations:
                return sat.TRUE if args in self.relations[name] else sat.FALSE
            return sat.p_var(("rel", name, args))
        parts = []
        for combo, cond in self._combos(args):
            parts.append(sat.p_and(cond, self.atom(name, combo)))
        return sat.p_or(*parts)

    def formula(self, f):
        if isinstance(f, Atom):
            return self.atom(f.pred, [self.term(a) for a in f.args])
        if isinstance(f, Truth):
            return sat.TRUE if f.value else sat.FALSE
        if isinstance(f, Not):
            return sat.p_not(self.formula(f.body))
        if isinstance(f, Implies):
            return sat.p_implies(self.formula(f.left), self.formula(f.right))
        if isinstance(f, And):
            return sat.p_and(self.formula(f.left), self.formula(f.right))
        if isinstance(f, Or):
            return sat.p_or(self.formula(f.left), self.formula(f.right))
        if isinstance(f, Iff):
            return sat.p_iff(self.formula(f.left), self.formula(f.right))
        raise TypeError(f"not a ground formula: {f!r}")


def _atom_label(key):
    if key[0] == "rel":
        _, name, args = key
        return f"{name}({', '.join(args)})" if args else name
    _, name, args, d = key
    return f"{name}({', '.join(args)})={d}"


# ---------------------------------------------------------------------------
# satisfiability of formula sets
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=1 << 16)
def _function_terms(f):
    return frozenset(n for n, _ in iter_nodes(f) if isinstance(n, Func))


@functools.lru_cache(maxsize=1 << 16)
def _node_kinds(f):
    return frozenset(type(n) for n, _ in iter_nodes(f))


def _has_predterm(formulas):
    return any(PredTerm in _node_kinds(f) for f in formulas)


def _has_quantifier(formulas):
    return any(_node_kinds(f) & set(QUANTIFIERS) for f in formulas)


def default_domain_size(formulas: Iterable[Wff]) -> int:
    """Domain size large enough that quantifier-free sets behave as in any larger domain.

    Counts one element per constant, one per distinct closed function term,
    two designated elements when predicates occur as terms, and one spare
    element when quantifiers are present.
    """
    formulas = list(formulas)
    consts = set()
    terms = set()
    for f in formulas:
        consts |= symbols_of(f)["constants"]
        terms |= _function_terms(f)
    size = len(consts) + len(terms)
    if _has_predterm(formulas):
        size += 2
    if _has_quantifier(formulas):
        size += 1
    return max(size, 1)


def _components(formulas):
    """Group formulas that share predicate or function symbols (union-find)."""
    parent = list(range(len(formulas)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {}
    for i, f in enumerate(formulas):
        syms = symbols_of(f)
        for name in list(syms["functions"]) + list(syms["predicates"]):
            j = owner.setdefault(name, i)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
    groups = {}
    for i in range(len(formulas)):
        groups.setdefault(find(i), []).append(i)
    return [sorted(g) for g in sorted(groups.values())]


@dataclass
class _Problem:
    formulas: list
    sig: Signature
    domain_size: int
    budget: QuantifierBudget


def _component_domain(formulas, domain_size):
    consts = sorted(set().union(*(symbols_of(f)["constants"] for f in formulas)) if formulas else set())
    pt = _has_predterm(formulas)
    need = len(consts) + (2 if pt else 0)
    if _has_quantifier(formulas):
        size = domain_size
    else:
        herbrand = need + len(set().union(*(_function_terms(f) for f in formulas)))
        size = min(domain_size, max(herbrand, 1))
    size = max(size, need, 1)
    dom = list(consts)
    if pt:
        dom += [TOP, BOT]
    extra = 1
    while len(dom) < size:
        dom.append(f"_d{extra}")
        extra += 1
    return dom


def _solve_component(formulas, sig, domain_size, budget, want_model=False):
    domain = _component_domain(formulas, domain_size)
    gsig = sig
    grounder = _Grounder(domain, gsig, budget)
    tr = _Translator(domain, (grounder.relations, grounder.functions))
    props = []
    for f in formulas:
        gf = grounder.ground(f, {})
        props.append(tr.formula(gf))
    cnf = sat.CNF()
    for p in props:
        cnf.add_formula(p)
    for key, group in tr.fn_groups.items():
        ids = [cnf.var(k) for k in group]
        cnf.add_clause(ids)
        for a, b in itertools.combinations(ids, 2):
            cnf.add_clause([-a, -b])
    inputs = cnf.input_keys()
    if len(inputs) > budget.max_ground_atoms:
        raise BudgetExceeded("ground atoms after grounding", len(inputs), budget.max_ground_atoms)
    return sat.solve(cnf)


def _prepare(formulas, sig, domain_size):
    formulas = list(formulas)
    sig = infer_signature(formulas, sig)
    if domain_size is None:
        domain_size = default_domain_size(formulas)
    need = len(sig.constants & set().union(*(symbols_of(f)["constants"] for f in formulas))) if formulas else 0
    if _has_predterm(formulas):
        need += 2
    if domain_size < max(need, 1):
        raise ValueError(
            f"domain size {domain_size} cannot hold {need} distinct constant/designated elements")
    return formulas, sig, domain_size


def satisfiable(formulas: Sequence[Wff], sig: Signature | None = None, domain_size: int | None = None,
                budget: QuantifierBudget = DEFAULT_BUDGET):
    """A satisfying assignment (atom label -> bool) or ``None``."""
    formulas, sig, domain_size = _prepare(formulas, sig, domain_size)
    for f in formulas:
        fv = _free_vars(f)
        if fv:
            raise FreeVariableError(f"formula {format_formula(f)!r} has free variables {sorted(fv)}")
    model = {}
    for comp in _components(formulas):
        res = _solve_component([formulas[i] for i in comp], sig, domain_size, budget)
        if res is None:
            return None
        model.update({_atom_label(k): v for k, v in res.items()})
    return dict(sorted(model.items()))


def _free_vars(f):
    return free_variables(f)


def entails(premises: Iterable[Wff], goal: Wff, sig: Signature | None = None,
            domain_size: int | None = None, budget: QuantifierBudget = DEFAULT_BUDGET) -> bool:
    """True iff every interpretation of the domain size satisfying *premises* satisfies *goal*."""
    premises = list(premises)
    if domain_size is None:
        domain_size = default_domain_size(premises + [goal])
    return satisfiable(premises + [Not(goal)], sig, domain_size, budget) is None


@dataclass(frozen=True)
class ConsistencyVerdict:
    consistent: bool
    core: tuple = ()
    model: Mapping[str, bool] | None = None

    def __bool__(self):
        return self.consistent

    def to_json(self):
        out = {"consistent": self.consistent}
        if not self.consistent:
            out["core"] = [format_formula(f) for f in self.core]
        return out


def check_consistency(formulas: Iterable[Wff], sig: Signature | None = None,
                      domain_size: int | None = None,
                      budget: QuantifierBudget = DEFAULT_BUDGET) -> ConsistencyVerdict:
    """Satisfiability of the whole set, with a deletion-minimal unsatisfiable core on failure."""
    formulas = list(dict.fromkeys(formulas))
    if domain_size is None:
        domain_size = default_domain_size(formulas)
    model = satisfiable(formulas, sig, domain_size, budget)
    if model is not None:
        return ConsistencyVerdict(True, (), model)
    return ConsistencyVerdict(False, minimal_core(formulas, sig, domain_size, budget))


def minimal_core(formulas: Sequence[Wff], sig=None, domain_size=None, budget=DEFAULT_BUDGET,
                 fixed: Sequence[Wff] = ()) -> tuple:
    """Deletion-minimal subset of *formulas* that together with *fixed* is unsatisfiable."""
    core = list(formulas)
    fixed = list(fixed)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        if satisfiable(trial + fixed, sig, domain_size, budget) is None:
            core = trial
        else:
            i += 1
    return tuple(core)
