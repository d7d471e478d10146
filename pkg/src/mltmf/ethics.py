"""Constraint safety of output sets, violation hypergraphs and safe filtering.

A set of formulas is safe for a constraint when, for every grounded
instance of the constraint, the set does not entail the instance's
negation.  The largest safe subset of a candidate output set is a maximum
independent set of the hypergraph whose edges are the minimal violating
subsets; the enumeration of edges is capped, so every answer is
re-checked against the entailment definition and missing edges are added
lazily.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConstraintError, TooLargeForExact
from .info import StateSet
from .logic import (
    And,
    Atom,
    Const,
    Exists,
    ForAll,
    Implies,
    PredTerm,
    Signature,
    Var,
    Wff,
    format_formula,
    free_variables,
    infer_signature,
    parse_formula,
    substitute,
)
from .semantics import DEFAULT_BUDGET, QuantifierBudget, default_domain_size, minimal_core, satisfiable

MAX_EXACT = 25


# ---------------------------------------------------------------------------
# constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EthicalConstraint:
    """A formula with free variables plus the substitution used at each (object, time) point.

    ``grounding`` maps ``(x, t)`` pairs to value tuples (constant names), one
    per entry of ``variables``.  A closed template with an empty grounding has
    a single instance.
    """

    template: Wff
    variables: tuple = ()
    grounding: Mapping = field(default_factory=dict)
    objects: tuple = ()
    times: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "grounding", {tuple(k): tuple(v) for k, v in dict(self.grounding).items()})
        free = free_variables(self.template)
        if free != set(self.variables):
            raise ConstraintError(
                f"template free variables {sorted(free)} do not match declared variables {list(self.variables)}")
        if len(set(self.variables)) != len(self.variables):
            raise ConstraintError("duplicate constraint variables")
        for key, values in self.grounding.items():
            if len(values) != len(self.variables):
                raise ConstraintError(f"grounding at {key} has {len(values)} values, expected {len(self.variables)}")
        for x in self.objects:
            for t in self.times:
                if (x, t) not in self.grounding:
                    raise ConstraintError(f"grounding missing for ({x}, {t})")
        if self.variables and not self.grounding:
            raise ConstraintError("a constraint with free variables needs a grounding table")

    def instances(self) -> list:
        """``[(witness, formula)]`` in sorted witness order."""
        if not self.grounding:
            return [(None, self.template)]
        out = []
        for key in sorted(self.grounding):
            values = self.grounding[key]
            out.append((key, substitute(self.template, {v: Const(c) for v, c in zip(self.variables, values)})))
        return out

    def constants(self) -> set:
        return {c for values in self.grounding.values() for c in values}

    def to_json(self):
        return {"template": format_formula(self.template), "variables": list(self.variables),
                "grounding": {",".join(k): list(v) for k, v in sorted(self.grounding.items())}}


def constraint_from_json(data: Mapping, sig: Signature) -> EthicalConstraint:
    grounding = {tuple(k.split(",")): tuple(v) for k, v in data.get("grounding", {}).items()}
    consts = {c for v in grounding.values() for c in v}
    sig = sig.merge(Signature(frozenset(c for c in consts if sig.kind(c) is None)))
    template = parse_formula(data["template"], sig)
    return EthicalConstraint(template, tuple(data.get("variables", ())), grounding,
                             tuple(data.get("objects", ())), tuple(data.get("times", ())))


def load_constraint(path, sig: Signature) -> EthicalConstraint:
    return constraint_from_json(json.loads(Path(path).read_text()), sig)


# ---------------------------------------------------------------------------
# safety
# ---------------------------------------------------------------------------


class SafetyVerdict:
    """Outcome of a safety check.  The violating core is computed on first access."""

    def __init__(self, safe: bool, witness=None, core=(), instance=None, core_fn=None):
        self.safe = safe
        self.witness = witness
        self.instance = instance
        self._core = tuple(core) if core_fn is None else None
        self._core_fn = core_fn

    @property
    def core(self) -> tuple:
        if self._core is None:
            self._core = tuple(self._core_fn())
        return self._core

    def __bool__(self):
        return self.safe

    def __repr__(self):
        return f"SafetyVerdict(safe={self.safe}, witness={self.witness})"

    def to_json(self):
        out = {"safe": self.safe}
        if not self.safe:
            out["witness"] = list(self.witness) if self.witness else None
            out["instance"] = format_formula(self.instance)
            out["core"] = [format_formula(f) for f in self.core]
        return out


def _formulas(s) -> list:
    if isinstance(s, StateSet):
        return s.sorted()
    return sorted(s, key=format_formula)


class _Checker:
    """Safety tests for subsets of a fixed universe, sharing one domain size."""

    def __init__(self, universe: Sequence[Wff], ec: EthicalConstraint, budget, sig=None, domain_size=None):
        self.instances = ec.instances()
        self.budget = budget
        everything = list(universe) + [f for _, f in self.instances]
        self.sig = infer_signature(everything, sig)
        self.domain_size = domain_size or default_domain_size(everything)
        self._cache = {}

    def violates(self, formulas, inst) -> bool:
        key = (frozenset(formulas), inst)
        if key not in self._cache:
            self._cache[key] = satisfiable(list(formulas) + [inst], self.sig, self.domain_size,
                                           self.budget) is None
        return self._cache[key]

    def verdict(self, formulas) -> SafetyVerdict:
        formulas = sorted(formulas, key=format_formula)
        for witness, inst in self.instances:
            if self.violates(formulas, inst):
                def core(formulas=formulas, inst=inst):
                    return minimal_core(formulas, self.sig, self.domain_size, self.budget, fixed=[inst])
                return SafetyVerdict(False, witness, instance=inst, core_fn=core)
        return SafetyVerdict(True)


def check_ethical_safety(s, ec: EthicalConstraint, budget: QuantifierBudget = DEFAULT_BUDGET,
                         sig: Signature | None = None, domain_size: int | None = None) -> SafetyVerdict:
    """Safe iff no grounded instance of *ec* has its negation entailed by *s*.

    On failure the verdict names the first violated instance (sorted by
    witness) and a deletion-minimal subset of *s* entailing its negation.
    """
    formulas = _formulas(s)
    return _Checker(formulas, ec, budget, sig, domain_size).verdict(formulas)


# ---------------------------------------------------------------------------
# hypergraph
# ---------------------------------------------------------------------------


def name_vertices(formulas: Iterable[Wff], names: Mapping[str, Wff] | None = None) -> dict:
    """Vertex name -> formula; formatted text is the default name."""
    if names is not None:
        return dict(names)
    out = {}
    for f in formulas:
        out[format_formula(f)] = f
    return out


@dataclass
class ViolationHypergraph:
    vertices: dict                      # name -> formula
    hyperedges: list                    # list of frozensets of names
    witnesses: dict                     # hyperedge -> witness (x, t) or None
    k_max: int
    complete: bool                      # True when every subset size was enumerated
    checker: _Checker = field(repr=False, default=None)

    def names(self):
        return sorted(self.vertices)

    def add_edge(self, edge: frozenset, witness):
        if any(e <= edge for e in self.hyperedges):
            return False
        self.hyperedges = [e for e in self.hyperedges if not edge <= e] + [edge]
        self.witnesses[edge] = witness
        return True

    def independent(self, chosen) -> bool:
        chosen = set(chosen)
        return not any(e <= chosen for e in self.hyperedges)

    def formulas(self, names) -> list:
        return [self.vertices[n] for n in sorted(names)]

    def sorted_edges(self):
        return sorted(self.hyperedges, key=lambda e: (len(e), sorted(e)))

    def to_json(self):
        return {"vertices": self.names(),
                "hyperedges": [{"members": sorted(e), "witness": list(self.witnesses[e]) if self.witnesses[e] else None}
                               for e in self.sorted_edges()],
                "k_max": self.k_max, "complete": self.complete}


def build_violation_hypergraph(s_or, ec: EthicalConstraint, k_max: int = 3,
                               budget: QuantifierBudget = DEFAULT_BUDGET,
                               names: Mapping[str, Wff] | None = None,
                               sig: Signature | None = None) -> ViolationHypergraph:
    """Every minimal violating subset of size at most *k_max*.

    Subsets are enumerated by size and then name order.  A subset containing
    an edge already found is skipped, so each emitted edge has no violating
    proper subset.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    vertices = name_vertices(_formulas(s_or) if names is None else (), names)
    order = sorted(vertices)
    checker = _Checker(list(vertices.values()), ec, budget, sig)
    empty = checker.verdict([])
    if not empty.safe:
        raise ConstraintError(f"constraint instance {format_formula(empty.instance)} is unsatisfiable; "
                              "no output set can be safe")
    h = ViolationHypergraph(vertices, [], {}, k_max, k_max >= len(order), checker)
    # nothing can violate if the whole set is safe
    if checker.verdict(list(vertices.values())).safe:
        h.complete = True
        return h
    for size in range(1, min(k_max, len(order)) + 1):
        for combo in itertools.combinations(order, size):
            edge = frozenset(combo)
            if any(e <= edge for e in h.hyperedges):
                continue
            fs = h.formulas(edge)
            for witness, inst in checker.instances:
                if checker.violates(fs, inst):
                    h.add_edge(edge, witness)
                    break
    return h


# ---------------------------------------------------------------------------
# maximum safe subset
# ---------------------------------------------------------------------------


def _exact_mis(order, edges):
    """Largest independent set; include-first search in name order.

    The first maximum reached is the one whose sorted name sequence is
    lexicographically smallest.
    """
    n = len(order)
    idx = {v: i for i, v in enumerate(order)}
    by_last = [[] for _ in range(n)]
    for e in edges:
        members = sorted(idx[v] for v in e)
        by_last[members[-1]].append(set(members))
    best = [None]
    best_size = [-1]
    chosen = []

    def blocked(i):
        cur = set(chosen) | {i}
        return any(e <= cur for e in by_last[i])

    def search(i):
        if len(chosen) + (n - i) <= best_size[0]:
            return
        if i == n:
            best[0] = list(chosen)
            best_size[0] = len(chosen)
            return
        if not blocked(i):
            chosen.append(i)
            search(i + 1)
            chosen.pop()
        search(i + 1)

    search(0)
    return [order[i] for i in best[0]]


def _greedy_mis(order, edges):
    current = set(order)
    while True:
        live = [e for e in edges if e <= current]
        if not live:
            return sorted(current)
        counts = {v: 0 for v in current}
        for e in live:
            for v in e:
                counts[v] += 1
        drop = min(current, key=lambda v: (-counts[v], v))
        current.discard(drop)


def max_safe_subset(h: ViolationHypergraph, mode: str = "exact") -> list:
    """Names of a largest (exact) or greedily found safe subset.

    After each candidate the full safety check runs; a violation reveals an
    edge beyond the enumeration cap, which is added before searching again.
    """
    order = h.names()
    if mode == "exact" and len(order) > MAX_EXACT:
        raise TooLargeForExact(f"{len(order)} vertices exceed the exact limit of {MAX_EXACT}")
    if mode not in ("exact", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    checker = h.checker
    while True:
        pick = _exact_mis(order, h.hyperedges) if mode == "exact" else _greedy_mis(order, h.hyperedges)
        verdict = checker.verdict(h.formulas(pick))
        if verdict.safe:
            return pick
        core_keys = {format_formula(f) for f in verdict.core}
        edge = frozenset(n for n in pick if format_formula(h.vertices[n]) in core_keys)
        if not h.add_edge(edge, verdict.witness):
            raise RuntimeError("safety check found a violation already covered by an edge")


# ---------------------------------------------------------------------------
# safeguard
# ---------------------------------------------------------------------------


def fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    n = 1
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


@dataclass(frozen=True)
class SafeguardResult:
    safe_subset: tuple            # vertex names
    rejected: tuple               # vertex names
    safeguard_formula: Wff
    marker: Wff                   # the safety-prompt atom
    augmented_output: tuple       # formulas: safe subset plus the marker
    names: Mapping                # name -> formula
    symbols: Mapping              # role -> fresh symbol used
    hypergraph: ViolationHypergraph = field(repr=False, default=None)

    def route(self, name: str) -> Wff:
        """What the guarded model emits in place of output *name*."""
        if name in self.safe_subset:
            return self.names[name]
        if name in self.rejected:
            return self.marker
        raise KeyError(name)

    def to_json(self):
        return {
            "safe_subset": list(self.safe_subset),
            "rejected": list(self.rejected),
            "safeguard_formula": format_formula(self.safeguard_formula),
            "augmented_output": [format_formula(f) for f in self.augmented_output],
            "routes": {n: format_formula(self.route(n)) for n in sorted(self.names)},
            "symbols": dict(sorted(self.symbols.items())),
        }


def safeguard_formula(sym: Mapping[str, str]) -> Wff:
    """Every output is routed: safe ones to themselves, rejected ones to the prompt atom."""
    fo = lambda x, s: Atom(sym["IsFormulaOf"], (Var(x), Const(sym[s])))  # noqa: E731
    prompt = PredTerm(sym["IsSafeback"], (Const(sym["NEc"]),))
    body = And(And(fo("s", "Sos"), Implies(fo("r", "SorEc"), Atom(sym["Eq"], (Var("s"), Var("r"))))),
               Implies(fo("r", "SorNotEc"), Atom(sym["Eq"], (Var("s"), prompt))))
    return ForAll("r", Implies(fo("r", "Sor"), Exists("s", body)))


def inject_safeguard(s_or, ec: EthicalConstraint, sig: Signature | None = None, mode: str = "exact",
                     k_max: int = 3, budget: QuantifierBudget = DEFAULT_BUDGET,
                     names: Mapping[str, Wff] | None = None) -> SafeguardResult:
    """Filter *s_or* to a maximum safe subset and add the safety prompt."""
    vertices = name_vertices(_formulas(s_or) if names is None else (), names)
    h = build_violation_hypergraph(None, ec, k_max, budget, vertices, sig)
    keep = max_safe_subset(h, mode)
    rejected = [n for n in h.names() if n not in set(keep)]
    used = infer_signature(list(vertices.values()) + [f for _, f in ec.instances()], sig)
    taken = set(used.constants) | set(used.functions) | set(used.predicates) | ec.constants()
    sym = {}
    for role in ("NEc", "IsSafeback", "IsFormulaOf", "Eq", "Sor", "SorEc", "SorNotEc", "Sos"):
        sym[role] = fresh_name(role, taken)
        taken.add(sym[role])
    marker = Atom(sym["IsSafeback"], (Const(sym["NEc"]),))
    augmented = tuple(h.formulas(keep)) + (marker,)
    verdict = check_ethical_safety(list(augmented), ec, budget, sig)
    if not verdict.safe:
        raise RuntimeError("augmented output is not safe")
    return SafeguardResult(tuple(keep), tuple(rejected), safeguard_formula(sym), marker,
                           augmented, vertices, sym, h)


# ---------------------------------------------------------------------------
# brute force
# ---------------------------------------------------------------------------


def brute_force_max_safe(formulas: Sequence[Wff], ec: EthicalConstraint,
                         budget: QuantifierBudget = DEFAULT_BUDGET, sig=None) -> int:
    """Largest safe subset size, trying every subset from the largest down."""
    formulas = list(formulas)
    checker = _Checker(formulas, ec, budget, sig)
    for size in range(len(formulas), -1, -1):
        for combo in itertools.combinations(formulas, size):
            if checker.verdict(list(combo)).safe:
                return size
    return 0

