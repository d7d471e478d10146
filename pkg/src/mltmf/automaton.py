"""Deterministic finite automata encoded as formula state sets.

Each step of a run contributes formulas asserting the current state, the
input read, the successor state and the output, plus two implications tying
the transition and output tables (function symbols ``delta`` and ``lam``) to
the successor state and output.  The realization is read off the simulated
trace, so verifying a trace amounts to evaluating every formula.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import MltmfError, UnknownAutomatonSymbol, WordTooLong
from .info import StateSet
from .logic import And, Atom, Const, Func, Implies, Signature, Wff, format_formula
from .semantics import DEFAULT_BUDGET, Interpretation, evaluate

MACHINE = "M"
OUTPUT_SET = "R"
PREDICATES = {"State": 3, "Input": 3, "Output": 3, "Eq": 2, "IsElementof": 2}
FUNCTIONS = {"delta": 2, "lam": 2}


def state_const(u):
    return f"u_{u}"


def input_const(q):
    return f"q_{q}"


def output_const(r):
    return f"r_{r}"


@dataclass(frozen=True)
class FiniteAutomaton:
    states: tuple
    inputs: tuple
    outputs: tuple
    next: Mapping          # (state, input) -> state
    out: Mapping           # (state, input) -> output
    times: tuple

    def __post_init__(self):
        for name in ("states", "inputs", "outputs", "times"):
            value = tuple(getattr(self, name))
            object.__setattr__(self, name, value)
            if not value:
                raise ValueError(f"automaton {name} must be non-empty")
            if len(set(value)) != len(value):
                raise ValueError(f"automaton {name} contain duplicates")
        nxt, out = dict(self.next), dict(self.out)
        for u, q in itertools.product(self.states, self.inputs):
            if nxt.get((u, q)) not in self.states:
                raise ValueError(f"transition table undefined or invalid at ({u}, {q})")
            if out.get((u, q)) not in self.outputs:
                raise ValueError(f"output table undefined or invalid at ({u}, {q})")
        object.__setattr__(self, "next", nxt)
        object.__setattr__(self, "out", out)

    def signature(self) -> Signature:
        consts = {MACHINE, OUTPUT_SET, *self.times}
        consts |= {state_const(u) for u in self.states}
        consts |= {input_const(q) for q in self.inputs}
        consts |= {output_const(r) for r in self.outputs}
        return Signature(frozenset(consts), FUNCTIONS, PREDICATES)

    def to_json(self):
        return {"states": list(self.states), "inputs": list(self.inputs), "outputs": list(self.outputs),
                "next": {f"{u},{q}": v for (u, q), v in sorted(self.next.items())},
                "out": {f"{u},{q}": v for (u, q), v in sorted(self.out.items())},
                "times": list(self.times)}

    @classmethod
    def from_json(cls, data):
        split = lambda table: {tuple(k.split(",")): v for k, v in table.items()}  # noqa: E731
        return cls(tuple(data["states"]), tuple(data["inputs"]), tuple(data["outputs"]),
                   split(data["next"]), split(data["out"]), tuple(data["times"]))


def load_automaton(path) -> FiniteAutomaton:
    return FiniteAutomaton.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Trace:
    states: tuple
    outputs: tuple


def _check_symbols(m, initial_state, word):
    if initial_state not in m.states:
        raise UnknownAutomatonSymbol(f"unknown state {initial_state!r}")
    for q in word:
        if q not in m.inputs:
            raise UnknownAutomatonSymbol(f"unknown input symbol {q!r}")


def simulate(m: FiniteAutomaton, initial_state, input_word: Sequence) -> Trace:
    _check_symbols(m, initial_state, input_word)
    states, outputs = [initial_state], []
    for q in input_word:
        u = states[-1]
        outputs.append(m.out[(u, q)])
        states.append(m.next[(u, q)])
    return Trace(tuple(states), tuple(outputs))


@dataclass(frozen=True, eq=False)
class EncodedAutomaton:
    automaton: FiniteAutomaton
    initial_state: str
    word: tuple
    trace: Trace
    state_set: StateSet

    @property
    def formulas(self):
        return self.state_set.formulas

    @property
    def realization(self) -> Interpretation:
        return self.state_set.realization

    def with_realization(self, interp) -> "EncodedAutomaton":
        return EncodedAutomaton(self.automaton, self.initial_state, self.word, self.trace,
                                self.state_set.replace(realization=interp))


def _c(name):
    return Const(name)


def state_formula(t, u) -> Wff:
    return Atom("State", (_c(MACHINE), _c(t), _c(state_const(u))))


def input_formula(t, q) -> Wff:
    return Atom("Input", (_c(MACHINE), _c(t), _c(input_const(q))))


def output_formula(t, r) -> Wff:
    return Atom("Output", (_c(MACHINE), _c(t), _c(output_const(r))))


def transition_formula(t, t_next, u, q, u_next) -> Wff:
    app = Func("delta", (_c(state_const(u)), _c(input_const(q))))
    return Implies(And(state_formula(t, u), input_formula(t, q)),
                   And(Atom("Eq", (_c(state_const(u_next)), app)), state_formula(t_next, u_next)))


def output_step_formula(t, t_next, u, q, r) -> Wff:
    app = Func("lam", (_c(state_const(u)), _c(input_const(q))))
    body = And(And(Atom("Eq", (_c(output_const(r)), app)),
                   Atom("IsElementof", (_c(output_const(r)), _c(OUTPUT_SET)))),
               output_formula(t_next, r))
    return Implies(And(state_formula(t, u), input_formula(t, q)), body)


def step_formulas(m: FiniteAutomaton, trace: Trace, word) -> list:
    """All formulas of the encoding in step order."""
    t = m.times
    out = [state_formula(t[0], trace.states[0])]
    for i, q in enumerate(word):
        u, u_next, r = trace.states[i], trace.states[i + 1], trace.outputs[i]
        out += [
            input_formula(t[i], q),
            transition_formula(t[i], t[i + 1], u, q, u_next),
            output_step_formula(t[i], t[i + 1], u, q, r),
            state_formula(t[i + 1], u_next),
            output_formula(t[i + 1], r),
        ]
    return out


def trace_realization(m: FiniteAutomaton, trace: Trace, word) -> Interpretation:
    """Interpretation read off a run: Eq is identity, delta/lam follow the tables."""
    sig = m.signature()
    domain = tuple(sorted(sig.constants))
    t = m.times
    ident = {c: c for c in domain}
    default = state_const(m.states[0])
    delta = {args: default for args in itertools.product(domain, repeat=2)}
    lam = {args: output_const(m.outputs[0]) for args in itertools.product(domain, repeat=2)}
    for (u, q), v in m.next.items():
        delta[(state_const(u), input_const(q))] = state_const(v)
    for (u, q), r in m.out.items():
        lam[(state_const(u), input_const(q))] = output_const(r)
    rels = {
        "State": {(MACHINE, t[i], state_const(u)) for i, u in enumerate(trace.states)},
        "Input": {(MACHINE, t[i], input_const(q)) for i, q in enumerate(word)},
        "Output": {(MACHINE, t[i + 1], output_const(r)) for i, r in enumerate(trace.outputs)},
        "Eq": {(d, d) for d in domain},
        "IsElementof": {(output_const(r), OUTPUT_SET) for r in m.outputs},
    }
    return Interpretation(sig, domain, ident, {"delta": delta, "lam": lam}, rels)


def encode_automaton(m: FiniteAutomaton, initial_state, input_word: Sequence) -> EncodedAutomaton:
    word = tuple(input_word)
    if len(word) > len(m.times) - 1:
        raise WordTooLong(f"word of length {len(word)} needs {len(word) + 1} time labels, "
                          f"only {len(m.times)} declared")
    trace = simulate(m, initial_state, word)
    formulas = step_formulas(m, trace, word)
    used_times = m.times[: len(word) + 1]
    state = StateSet(MACHINE, frozenset(formulas), (MACHINE,), used_times,
                     trace_realization(m, trace, word), m.signature())
    return EncodedAutomaton(m, initial_state, word, trace, state)


def verify_trace(e: EncodedAutomaton, budget=DEFAULT_BUDGET) -> bool:
    """Every encoded formula holds under the realization."""
    interp = e.realization
    if interp is None:
        return False
    try:
        return all(evaluate(f, interp, budget) for f in e.formulas)
    except MltmfError:
        return False


def failing_formulas(e: EncodedAutomaton, budget=DEFAULT_BUDGET) -> list:
    return [format_formula(f) for f in e.state_set.sorted() if not evaluate(f, e.realization, budget)]


# ---------------------------------------------------------------------------
# tampering
# ---------------------------------------------------------------------------

MUTATIONS = ("state", "input", "output", "delta", "lam")


def mutation_kinds(e: EncodedAutomaton) -> list:
    kinds = ["state"]
    if e.word:
        kinds += ["input", "output"]
        if len(e.automaton.states) > 1:
            kinds.append("delta")
        if len(e.automaton.outputs) > 1:
            kinds.append("lam")
    return kinds


def mutate(e: EncodedAutomaton, kind: str, rng: random.Random) -> EncodedAutomaton:
    """Copy of *e* whose realization has one trace fact or table entry altered."""
    m, interp, t = e.automaton, e.realization, e.automaton.times
    if kind in ("state", "input", "output"):
        pred = kind.capitalize()
        rows = sorted(interp.relations[pred])
        victim = rng.choice(rows)
        pool = {"state": [state_const(u) for u in m.states],
                "input": [input_const(q) for q in m.inputs],
                "output": [output_const(r) for r in m.outputs]}[kind]
        others = [v for v in pool if v != victim[2]]
        new_rows = set(rows) - {victim}
        if others and rng.random() < 0.5:
            new_rows.add((victim[0], victim[1], rng.choice(others)))
        return e.with_realization(interp.with_relation(pred, new_rows))
    if kind in ("delta", "lam"):
        i = rng.randrange(len(e.word))
        key = (state_const(e.trace.states[i]), input_const(e.word[i]))
        table = dict(interp.functions[kind])
        pool = ([state_const(u) for u in m.states] if kind == "delta"
                else [output_const(r) for r in m.outputs])
        table[key] = rng.choice([v for v in pool if v != table[key]])
        return e.with_realization(interp.with_function(kind, table))
    raise ValueError(f"unknown mutation {kind!r}")


def random_automaton(rng: random.Random, max_states=4, max_inputs=4, max_outputs=3, n_times=7) -> FiniteAutomaton:
    states = tuple(f"s{i}" for i in range(rng.randint(1, max_states)))
    inputs = tuple(str(i) for i in range(rng.randint(1, max_inputs)))
    outputs = tuple(f"o{i}" for i in range(rng.randint(1, max_outputs)))
    nxt = {(u, q): rng.choice(states) for u in states for q in inputs}
    out = {(u, q): rng.choice(outputs) for u in states for q in inputs}
    return FiniteAutomaton(states, inputs, outputs, nxt, out, tuple(f"t{i + 1}" for i in range(n_times)))


# ---------------------------------------------------------------------------
# recognition
# ---------------------------------------------------------------------------


def recognize_automaton(state: StateSet):
    """Recover ``(automaton, initial_state, word)`` from a state set that encodes a run.

    Tables are read from the realization's ``delta`` and ``lam`` entries and
    the run from the State and Input facts; the candidate is accepted only
    when re-encoding reproduces exactly the same formulas.  Returns ``None``
    otherwise.
    """
    interp = state.realization
    if interp is None or not set(FUNCTIONS) <= set(interp.functions):
        return None
    consts = interp.signature.constants
    strip = lambda prefix: sorted(c[len(prefix):] for c in consts if c.startswith(prefix))  # noqa: E731
    states, inputs, outputs = strip("u_"), strip("q_"), strip("r_")
    facts = {}
    for f in state.formulas:
        if isinstance(f, Atom) and f.pred in ("State", "Input") and len(f.args) == 3:
            facts.setdefault(f.pred, {})[f.args[1].name] = f.args[2].name
    times = list(state.times)
    if not states or not inputs or not outputs or not times or "State" not in facts:
        return None
    try:
        nxt = {(u, q): interp.functions["delta"][(state_const(u), input_const(q))][2:]
               for u in states for q in inputs}
        out = {(u, q): interp.functions["lam"][(state_const(u), input_const(q))][2:]
               for u in states for q in inputs}
        m = FiniteAutomaton(tuple(states), tuple(inputs), tuple(outputs), nxt, out,
                            tuple(sorted(interp.signature.constants & set(times), key=times.index)))
        initial = facts["State"][times[0]][2:]
        word = []
        for t in times[:-1]:
            if t not in facts.get("Input", {}):
                break
            word.append(facts["Input"][t][2:])
        again = encode_automaton(m, initial, word)
    except (KeyError, ValueError, MltmfError):
        return None
    if again.state_set != state:
        return None
    return m, initial, tuple(word)


def is_finite_automaton_state(state: StateSet) -> bool:
    return recognize_automaton(state) is not None


def is_information_system(info) -> bool:
    """Recoverable information whose ontological state encodes an automaton run."""
    return info.recoverable and is_finite_automaton_state(info.ontological_state)
