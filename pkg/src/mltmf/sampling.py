"""Random formulas for property runs."""

from __future__ import annotations

import random

from .logic import (
    BINARY,
    QUANTIFIERS,
    And,
    Atom,
    Const,
    Exists,
    ForAll,
    Func,
    Iff,
    Implies,
    Not,
    Or,
    PredTerm,
    Signature,
    Var,
)

DEFAULT_SIGNATURE = Signature(
    frozenset({"a", "b", "c"}),
    {"f": 1, "g": 2},
    {"P": 1, "R": 2, "Q": 0, "H": 1},
)

VARIABLES = ("x", "y", "z", "w")


def random_term(rng: random.Random, sig: Signature, bound=(), depth=2, outer=frozenset()):
    """A term that never nests a symbol inside its own arguments."""
    consts = sorted(sig.constants)
    funcs = [n for n in sorted(sig.functions) if n not in outer]
    preds = [n for n in sorted(sig.predicates) if n not in outer and sig.predicates[n] > 0]
    roll = rng.random()
    if depth > 0 and funcs and roll < 0.25:
        name = rng.choice(funcs)
        args = tuple(random_term(rng, sig, bound, depth - 1, outer | {name}) for _ in range(sig.functions[name]))
        return Func(name, args)
    if depth > 0 and preds and roll < 0.32:
        name = rng.choice(preds)
        args = tuple(random_term(rng, sig, bound, depth - 1, outer | {name}) for _ in range(sig.predicates[name]))
        return PredTerm(name, args)
    if bound and roll < 0.65:
        return Var(rng.choice(list(bound)))
    return Const(rng.choice(consts))


def random_atom(rng, sig, bound=(), depth=2):
    name = rng.choice(sorted(sig.predicates))
    args = tuple(random_term(rng, sig, bound, depth, frozenset({name})) for _ in range(sig.predicates[name]))
    return Atom(name, args)


def random_wff(rng: random.Random, sig: Signature = DEFAULT_SIGNATURE, depth: int = 4, bound=(),
               quantifiers: bool = True, higher_order: bool = True):
    """A random formula valid under *sig*.

    Binders are first-order variables from a small pool, and occasionally a
    declared predicate symbol (a higher-order binder).
    """
    if depth <= 0 or rng.random() < 0.2:
        return random_atom(rng, sig, bound)
    roll = rng.random()
    if roll < 0.15:
        return Not(random_wff(rng, sig, depth - 1, bound, quantifiers, higher_order))
    if quantifiers and roll < 0.35:
        q = rng.choice((ForAll, Exists))
        if higher_order and rng.random() < 0.15:
            var = rng.choice(sorted(sig.predicates))
            return q(var, random_wff(rng, sig, depth - 1, bound, quantifiers, higher_order))
        var = rng.choice(VARIABLES)
        return q(var, random_wff(rng, sig, depth - 1, tuple(sorted(set(bound) | {var})), quantifiers, higher_order))
    op = rng.choice((And, Or, Implies, Iff))
    return op(random_wff(rng, sig, depth - 1, bound, quantifiers, higher_order),
              random_wff(rng, sig, depth - 1, bound, quantifiers, higher_order))


def _rebuild(f, pick, counter):
    """Copy *f*, replacing the ``pick``-th candidate node by a self-applied one."""
    if isinstance(f, (Atom, Func, PredTerm)):
        name = f.pred if isinstance(f, Atom) else f.name
        args = tuple(_rebuild(a, pick, counter) for a in f.args)
        node = type(f)(name, args)
        if args:
            here = counter[0]
            counter[0] += 1
            if here == pick:
                inner = PredTerm(name, args) if isinstance(f, (Atom, PredTerm)) else Func(name, args)
                node = type(f)(name, (inner,) + args[1:])
        return node
    if isinstance(f, Not):
        return Not(_rebuild(f.body, pick, counter))
    if isinstance(f, BINARY):
        return type(f)(_rebuild(f.left, pick, counter), _rebuild(f.right, pick, counter))
    if isinstance(f, QUANTIFIERS):
        return type(f)(f.var, _rebuild(f.body, pick, counter))
    return f


def _count_candidates(f):
    counter = [0]
    _rebuild(f, -1, counter)
    return counter[0]


def self_application_mutant(rng: random.Random, f, sig: Signature = DEFAULT_SIGNATURE):
    """*f* with one application rewritten so a symbol appears in its own first argument."""
    n = _count_candidates(f)
    if n == 0:
        f = And(f, random_atom(rng, Signature(sig.constants, {}, {k: v for k, v in sig.predicates.items() if v})))
        n = _count_candidates(f)
    return _rebuild(f, rng.randrange(n), [0])


def random_ground_atoms(rng: random.Random, n: int, sig: Signature = DEFAULT_SIGNATURE) -> list:
    """*n* distinct quantifier-free ground atoms."""
    seen = {}
    while len(seen) < n:
        a = random_atom(rng, sig, depth=1)
        seen.setdefault(a, None)
    return list(seen)


def random_qf_formula(rng: random.Random, atoms, depth: int = 3):
    """A quantifier-free combination of the given atoms."""
    if depth <= 0 or rng.random() < 0.25:
        a = rng.choice(atoms)
        return Not(a) if rng.random() < 0.3 else a
    if rng.random() < 0.15:
        return Not(random_qf_formula(rng, atoms, depth - 1))
    op = rng.choice((And, Or, Implies, Iff))
    return op(random_qf_formula(rng, atoms, depth - 1), random_qf_formula(rng, atoms, depth - 1))
