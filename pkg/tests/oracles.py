"""Brute-force reference implementations used by the tests.

Nothing here calls the package's solver: truth tables are enumerated
directly over the ground atoms of quantifier-free formulas.
"""

import itertools
import json
import math
import random
from fractions import Fraction
from pathlib import Path

from mltmf.genbound import FiniteDistribution
from mltmf.info import (
    EnablingMapping,
    InformationSextuple,
    NoiseSpec,
    StateSet,
    canonical_realization,
    compose_noisy,
    noisy_sextuple,
    sextuple_from_json,
)
from mltmf.learning import PROCESS_RULES, ToyData, ToyModelState
from mltmf.logic import And, Atom, Const, Iff, Implies, Not, Or, Signature, format_formula, iter_nodes, parse_formula
from mltmf.sampling import random_qf_formula


def ground_atoms(formulas):
    seen = {}
    for f in formulas:
        for node, _ in iter_nodes(f):
            if isinstance(node, Atom):
                seen.setdefault(node, None)
    return sorted(seen, key=format_formula)


def tt_eval(f, row):
    if isinstance(f, Atom):
        return row[f]
    if isinstance(f, Not):
        return not tt_eval(f.body, row)
    if isinstance(f, And):
        return tt_eval(f.left, row) and tt_eval(f.right, row)
    if isinstance(f, Or):
        return tt_eval(f.left, row) or tt_eval(f.right, row)
    if isinstance(f, Implies):
        return (not tt_eval(f.left, row)) or tt_eval(f.right, row)
    if isinstance(f, Iff):
        return tt_eval(f.left, row) == tt_eval(f.right, row)
    raise TypeError(f)


def rows(atoms):
    for bits in itertools.product((False, True), repeat=len(atoms)):
        yield dict(zip(atoms, bits))


def tt_entails(premises, goal):
    atoms = ground_atoms(list(premises) + [goal])
    return all(tt_eval(goal, r) for r in rows(atoms) if all(tt_eval(p, r) for p in premises))


def tt_satisfiable(formulas):
    atoms = ground_atoms(formulas)
    return any(all(tt_eval(f, r) for f in formulas) for r in rows(atoms))


def model_mask(f, atoms):
    """Bit i set when assignment number i satisfies *f*."""
    mask = 0
    for i, r in enumerate(rows(atoms)):
        if tt_eval(f, r):
            mask |= 1 << i
    return mask


GROUND_SIG = Signature(frozenset({"a", "b", "c"}), {}, {"P": 1, "R": 2, "Q": 0})
GROUND_ATOMS = sorted(
    [Atom("Q")] + [Atom("P", (Const(x),)) for x in "abc"]
    + [Atom("R", (Const(x), Const(y))) for x in "abc" for y in "abc"],
    key=format_formula,
)


def random_entailment(rng, max_atoms=12):
    """Ground premises and a goal over at most *max_atoms* atoms."""
    atoms = rng.sample(GROUND_ATOMS, rng.randint(1, max_atoms))
    premises = [random_qf_formula(rng, atoms, depth=rng.randint(1, 3)) for _ in range(rng.randint(0, 4))]
    goal = random_qf_formula(rng, atoms, depth=rng.randint(1, 3))
    return premises, goal


# ---------------------------------------------------------------------------
# ethics
# ---------------------------------------------------------------------------

LETTERS = Signature(frozenset(), {}, {"A": 0, "B": 0, "C": 0, "D": 0, "E": 0})
PEOPLE = Signature(frozenset({"ann", "bo"}), {}, {"Harm": 1, "Act": 1, "Warn": 1})


def random_ethics_instance(rng: random.Random, n: int):
    """``(names, constraint_data, signature)`` with *n* named output formulas.

    Half the instances use a closed propositional constraint; the others a
    template with one free variable grounded over two people.
    """
    if rng.random() < 0.5:
        sig = LETTERS
        atoms = [Atom(p) for p in sorted(sig.predicates)]
        ec = random_qf_formula(rng, atoms[:rng.randint(1, 3)], depth=1)
        while not tt_satisfiable([ec]):
            ec = random_qf_formula(rng, atoms[:rng.randint(1, 3)], depth=1)
        data = {"template": format_formula(ec)}
    else:
        sig = PEOPLE
        atoms = [Atom(p, (Const(c),)) for p in sorted(sig.predicates) for c in sorted(sig.constants)]
        template = rng.choice(["~Harm(x)", "Act(x) -> Warn(x)", "~(Act(x) & Harm(x))", "Warn(x) | ~Act(x)"])
        data = {"template": template, "variables": ["x"],
                "grounding": {"ann,t1": ["ann"], "bo,t1": ["bo"]}}
    names = {}
    for i in range(n):
        names[f"p{i + 1:02d}"] = random_qf_formula(rng, atoms, depth=rng.randint(0, 2))
    return names, data, sig


def brute_force_safe_size(formulas, instances):
    """Largest subset whose conjunction is consistent with every constraint instance."""
    formulas = list(formulas)
    atoms = ground_atoms(formulas + list(instances))
    full = (1 << (1 << len(atoms))) - 1
    masks = [model_mask(f, atoms) for f in formulas]
    inst = [model_mask(f, atoms) for f in instances]
    best = 0
    for bits in range(1 << len(formulas)):
        size = bin(bits).count("1")
        if size <= best:
            continue
        m = full
        for i in range(len(formulas)):
            if bits >> i & 1:
                m &= masks[i]
        if all(m & k for k in inst):
            best = size
    return best


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------


def random_bound_instance(rng: random.Random, exact=False, max_n=10):
    """``(s_ou, p_q)`` with up to *max_n* query states, some with zero mass."""
    n = rng.randint(1, max_n)
    labels = [f"s{i}" for i in range(n)]
    weights = [0 if rng.random() < 0.15 else rng.randint(1, 20) for _ in labels]
    if not any(weights):
        weights[0] = 1
    total = sum(weights)
    if exact:
        mass = {x: Fraction(w, total) for x, w in zip(labels, weights)}
    else:
        mass = {x: w / total for x, w in zip(labels, weights)}
        # keep the float masses summing to 1 within the tolerance
        drift = 1 - math.fsum(mass.values())
        mass[labels[0]] += drift
        if mass[labels[0]] < 0:
            mass[labels[0]] = 0.0
    s_ou = {x for x in labels if rng.random() < 0.5} | {f"m{i}" for i in range(rng.randint(0, 3))}
    return frozenset(s_ou), FiniteDistribution(tuple(labels), mass, exact)


def tvd_direct(p, q):
    return sum(abs(Fraction(p[x]) - Fraction(q[x])) for x in p.support) / 2


# ---------------------------------------------------------------------------
# state sets, mappings and noise
# ---------------------------------------------------------------------------

EVENTS = Signature(frozenset({f"e{i}" for i in range(8)} | {f"k{i}" for i in range(8)}), {},
                   {"Ev": 1, "Code": 1})


def event(i):
    return Atom("Ev", (Const(f"e{i}"),))


def code(i):
    return Atom("Code", (Const(f"k{i}"),))


def atom_state(name, formulas):
    formulas = frozenset(formulas)
    return StateSet(name, formulas, (name,), ("t1",), canonical_realization(formulas, EVENTS), EVENTS)


def mapping_from_function(values, n_target):
    """Enabling mapping from events 0..len(values)-1 onto codes 0..n_target-1."""
    src = atom_state("So", [event(i) for i in range(len(values))])
    dst = atom_state("Sc", [code(j) for j in range(n_target)])
    return EnablingMapping(src, dst, {event(i): code(v) for i, v in enumerate(values)})


def surjections(n, k):
    for values in itertools.product(range(k), repeat=n):
        if len(set(values)) == k:
            yield values


def all_small_surjections(max_source=6):
    for n in range(1, max_source + 1):
        for k in range(1, n + 1):
            yield from surjections(n, k)


def injective_sextuple(name, formulas, times=("t1",), first_code=0):
    """Sextuple whose carrier gets one fresh code per formula."""
    src = atom_state(f"S_{name}", formulas)
    ordered = src.sorted()
    dst = atom_state(f"C_{name}", [code(first_code + i) for i in range(len(ordered))])
    m = EnablingMapping(src, dst, {f: code(first_code + i) for i, f in enumerate(ordered)})
    return InformationSextuple(name, times, src, f"c_{name}", ("m1",), dst, m)


def random_noisy_pair(rng: random.Random):
    """``(clean, noise, noisy)`` sextuples over event atoms."""
    present = rng.sample(range(8), rng.randint(1, 6))
    absent = [i for i in range(8) if i not in present]
    info = injective_sextuple("o", [event(i) for i in present])
    loss = {event(i) for i in present if rng.random() < 0.4}
    superposed = {event(i) for i in absent if rng.random() < 0.4}
    if len(loss) == len(present) and not superposed:
        loss.pop()
    noise = NoiseSpec(frozenset(loss), frozenset(superposed))
    noisy_state = compose_noisy(info.ontological_state, noise)
    ordered = noisy_state.sorted()
    carrier = atom_state("C_noisy", [code(i) for i in range(len(ordered))])
    noisy = noisy_sextuple(info, noise, carrier, {f: code(i) for i, f in enumerate(ordered)})
    return info, noise, noisy


def collapse_mapping(info: InformationSextuple) -> InformationSextuple:
    """Same sextuple with every formula sent to one carrier formula (not injective when |S_o| > 1)."""
    first = info.carrier_state.sorted()[0]
    carrier = info.carrier_state.replace(formulas=frozenset({first}),
                                         realization=canonical_realization([first], info.carrier_state.sig))
    m = EnablingMapping(info.ontological_state, carrier, {f: first for f in info.ontological_state.formulas})
    return InformationSextuple(info.ontology, info.occurrence_times, info.ontological_state, info.carrier,
                               info.reflection_times, carrier, m)


def load_interpret_bundle(path):
    data = json.loads(Path(path).read_text())
    sig = Signature.from_json(data["signature"])
    parts = [sextuple_from_json(data[k], sig, Path(path).parent) for k in ("model", "input", "output")]
    return parts, PROCESS_RULES[data.get("rule", "query")]()


# ---------------------------------------------------------------------------
# learning
# ---------------------------------------------------------------------------

FACTS = Signature(frozenset({"rex", "tom", "t1", "t2"}), {}, {"Dog": 2, "Cat": 2, "Barks": 2})


def random_fact_states(rng: random.Random):
    """Two literal sets drawn from one hidden assignment, so their union is consistent."""
    atoms = [Atom(p, (Const(x), Const(t))) for p in sorted(FACTS.predicates)
             for x in ("rex", "tom") for t in ("t1", "t2")]
    truth = {a: rng.random() < 0.5 for a in atoms}

    def literals(k):
        return frozenset(a if truth[a] else Not(a) for a in rng.sample(atoms, k))

    sx = StateSet("Kb", literals(rng.randint(1, 4)), ("rex",), ("t1",), None, FACTS)
    sy = StateSet("News", literals(rng.randint(1, 4)), ("tom",), ("t2",), None, FACTS)
    return sx, sy


def random_toy_case(rng: random.Random, exact=True):
    """A small linear model and labelled data of matching dimensions."""
    conv = (lambda n, d: Fraction(n, d)) if exact else (lambda n, d: n / d)
    d_in, d_out = rng.randint(1, 2), rng.randint(1, 2)
    value = lambda: conv(rng.randint(-9, 9), rng.randint(1, 4))  # noqa: E731
    weights = tuple(tuple(value() for _ in range(d_in)) for _ in range(d_out))
    # at most four parameters in total
    with_bias = d_in * d_out + d_out <= 4 and rng.random() < 0.5
    bias = tuple(value() for _ in range(d_out)) if with_bias else None
    n_params = d_in * d_out + (d_out if bias else 0)
    model = ToyModelState(weights, bias, conv(rng.randint(1, 5), 20), conv(rng.randint(0, 2), 4),
                          tuple(value() for _ in range(n_params)), exact=exact)
    samples = tuple((tuple(value() for _ in range(d_in)), tuple(value() for _ in range(d_out)))
                    for _ in range(rng.randint(1, 3)))
    return model, ToyData(samples, exact=exact)


def load_named_outputs(path):
    """``(names -> formula, signature)`` from an output-formula fixture."""
    data = json.loads(Path(path).read_text())
    sig = Signature.from_json(data["signature"])
    return {k: parse_formula(v, sig) for k, v in data["formulas"].items()}, sig
