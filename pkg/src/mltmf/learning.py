"""Learn and process rules over state sets.

A rule pairs a gate (``learnable`` / ``processable``) with a function on
formula sets.  Applying a learn rule also records a quantifier-free instance
of the rule itself in the result, named after the result state, so the
result can learn again in the same way.

Two learn rules ship: :class:`FactUnionRule`, which merges consistent fact
sets, and :class:`ToyGradientRule`, one momentum gradient step of a small
linear model whose parameters, hyperparameters and data are written as
atoms over numeric constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import NotLearnable, NotProcessable, RealizationMismatch, ResultInconsistent
from .info import (
    INTERNAL_BUDGET,
    EnablingMapping,
    InformationSextuple,
    StateSet,
    _key,
    _sorted,
    canonical_realization,
)
from .logic import (
    And,
    Atom,
    Const,
    Func,
    Implies,
    Wff,
    format_formula,
)
from .semantics import check_consistency, entails

_NAME_RE = re.compile(r"[A-Za-z0-9_]+")


# ---------------------------------------------------------------------------
# rule formula
# ---------------------------------------------------------------------------


def rule_formula(state_name: str, rule_name: str, kind: str = "learn") -> Wff:
    """Ground instance of the learning (or processing) rule carried by a state.

    Subsets of the state and of its partner are named by constants so the
    formula stays first-order::

        IsSubsetOf(Phi_S, S) & IsSubsetOf(Psi_S, Data_S) & Learnable_r(Phi_S, Psi_S)
          -> IsFormulaOf(phi_S, Next_S) & Eq(phi_S, flearn_r(Phi_S, Psi_S))
    """
    if not _NAME_RE.fullmatch(state_name) or not _NAME_RE.fullmatch(rule_name):
        raise ValueError("state and rule names must be identifiers")
    gate = "Learnable" if kind == "learn" else "Processable"
    fn = "flearn" if kind == "learn" else "fprocess"
    c = lambda n: Const(f"{n}_{state_name}")  # noqa: E731
    phi, psi = c("Phi"), c("Psi")
    lhs = And(And(Atom("IsSubsetOf", (phi, Const(state_name))), Atom("IsSubsetOf", (psi, c("Data")))),
              Atom(f"{gate}_{rule_name}", (phi, psi)))
    rhs = And(Atom("IsFormulaOf", (c("phi"), c("Next"))),
              Atom("Eq", (c("phi"), Func(f"{fn}_{rule_name}", (phi, psi)))))
    return Implies(lhs, rhs)


def has_rule_formula(state: StateSet, rule_name: str, kind: str = "learn") -> bool:
    return rule_formula(state.name, rule_name, kind) in state


# ---------------------------------------------------------------------------
# rule interfaces
# ---------------------------------------------------------------------------


class LearnRule:
    name = "rule"

    def learnable(self, phi_x: frozenset, phi_y: frozenset) -> bool:
        raise NotImplementedError

    def learn(self, phi_x: frozenset, phi_y: frozenset) -> frozenset:
        raise NotImplementedError


class ProcessRule:
    name = "rule"

    def processable(self, phi_u: frozenset, phi_q: frozenset) -> bool:
        raise NotImplementedError

    def process(self, phi_u: frozenset, phi_q: frozenset) -> frozenset:
        raise NotImplementedError


def _fresh_state_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    m = re.fullmatch(r"(.*?)_(\d+)", base)
    stem, n = (m.group(1), int(m.group(2))) if m else (base, 0)
    while True:
        n += 1
        name = f"{stem}_{n}"
        if name not in taken:
            return name


def check_time_order(earlier: Sequence[str], later: Sequence[str], order: Sequence[str]) -> bool:
    """sup(earlier) <= inf(later) in the declared label order."""
    if not earlier or not later:
        return True
    pos = {t: i for i, t in enumerate(order)}
    missing = [t for t in list(earlier) + list(later) if t not in pos]
    if missing:
        raise ValueError(f"time label {missing[0]!r} missing from the declared order")
    return max(pos[t] for t in earlier) <= min(pos[t] for t in later)


def can_learn(rule: LearnRule, sx: StateSet, sy: StateSet) -> bool:
    return bool(rule.learnable(sx.formulas, sy.formulas))


def apply_learn(rule: LearnRule, sx: StateSet, sy: StateSet, name: str | None = None,
                times: Sequence[str] | None = None, time_order: Sequence[str] | None = None,
                budget=INTERNAL_BUDGET) -> StateSet:
    """Learn *sy* into *sx*; the result keeps an instance of the rule formula."""
    if not can_learn(rule, sx, sy):
        raise NotLearnable(f"{rule.name}: {sx.name!r} cannot learn from {sy.name!r}")
    name = name or _fresh_state_name(sx.name, {sx.name, sy.name})
    order = list(time_order) if time_order is not None else list(dict.fromkeys(sx.times + sy.times))
    if times is None:
        times = order[-1:] if order else ()
    if not check_time_order(sx.times + sy.times, times, order):
        raise ValueError("result times must not precede the learner and data times")
    learned = frozenset(rule.learn(sx.formulas, sy.formulas))
    formulas = learned | {rule_formula(name, rule.name)}
    verdict = check_consistency(_sorted(formulas), budget=budget)
    if not verdict.consistent:
        raise ResultInconsistent(f"{rule.name} produced an inconsistent state; core: "
                                 + "; ".join(format_formula(f) for f in verdict.core))
    objects = tuple(dict.fromkeys(sx.objects + sy.objects))
    try:
        real = canonical_realization(formulas)
    except RealizationMismatch:
        real = None
    return StateSet(name, formulas, objects, tuple(times), real)


def check_inheritance(before: StateSet, after: StateSet, rule: LearnRule) -> bool:
    """*after* carries the rule formula adapted to its own name."""
    return has_rule_formula(after, rule.name)


def can_process(rule: ProcessRule, su: StateSet, sq: StateSet) -> bool:
    return bool(rule.processable(su.formulas, sq.formulas))


def apply_process(rule: ProcessRule, su: StateSet, sq: StateSet, name: str = "Out",
                  budget=INTERNAL_BUDGET) -> StateSet:
    if not can_process(rule, su, sq):
        raise NotProcessable(f"{rule.name}: {su.name!r} cannot process {sq.name!r}")
    formulas = frozenset(rule.process(su.formulas, sq.formulas))
    verdict = check_consistency(_sorted(formulas), budget=budget)
    if not verdict.consistent:
        raise ResultInconsistent(f"{rule.name} produced an inconsistent output; core: "
                                 + "; ".join(format_formula(f) for f in verdict.core))
    try:
        real = canonical_realization(formulas)
    except RealizationMismatch:
        real = None
    return StateSet(name, formulas, tuple(dict.fromkeys(su.objects + sq.objects)), sq.times, real)


def learn_information(rule: LearnRule, io: InformationSextuple, it: InformationSextuple,
                      name: str | None = None) -> InformationSextuple:
    """Learn on both the ontological and the carrier side and pair the results.

    Result formulas are paired through the old enabling mappings when they
    were inherited, rule formulas with rule formulas, and remaining new
    formulas with themselves (the carrier then holds the same new formula).
    """
    so = apply_learn(rule, io.ontological_state, it.ontological_state, name)
    sc = apply_learn(rule, io.carrier_state, it.carrier_state, f"{so.name}_c")
    table = {}
    for f in so.formulas:
        k = _key(f)
        if k in io.enabling.table:
            table[f] = io.enabling.table[k]
        elif k in it.enabling.table:
            table[f] = it.enabling.table[k]
        elif f == rule_formula(so.name, rule.name):
            table[f] = rule_formula(sc.name, rule.name)
        else:
            table[f] = f
    m = EnablingMapping(so, sc, table, f"learned with {rule.name}")
    times = so.times or io.occurrence_times
    return InformationSextuple(io.ontology, times, so, io.carrier, sc.times or io.reflection_times, sc, m)


# ---------------------------------------------------------------------------
# fact union
# ---------------------------------------------------------------------------


class FactUnionRule(LearnRule):
    """Learn by taking the union of two fact sets when the union is consistent."""

    name = "union"

    def __init__(self, budget=INTERNAL_BUDGET):
        self.budget = budget

    def learnable(self, phi_x, phi_y):
        union = _sorted(frozenset(phi_x) | frozenset(phi_y))
        return check_consistency(union, budget=self.budget).consistent

    def learn(self, phi_x, phi_y):
        return frozenset(phi_x) | frozenset(phi_y)


class FactQueryRule(ProcessRule):
    """Answer each query formula by entailment; unanswerable ones become ``Unknown`` facts."""

    name = "query"

    def __init__(self, budget=INTERNAL_BUDGET):
        self.budget = budget

    def processable(self, phi_u, phi_q):
        return check_consistency(_sorted(phi_u), budget=self.budget).consistent

    def process(self, phi_u, phi_q):
        facts = _sorted(phi_u)
        out = set()
        for i, q in enumerate(_sorted(phi_q), 1):
            if entails(facts, q, budget=self.budget):
                out.add(q)
            else:
                out.add(unknown_formula(i))
        return frozenset(out)


def unknown_formula(i: int) -> Wff:
    return Atom("Unknown", (Const(f"query_{i}"),))


# ---------------------------------------------------------------------------
# numbers as constants
# ---------------------------------------------------------------------------


def encode_number(x) -> str:
    """Constant name for a number: ``num_7``, ``num_m1_2`` (-1/2), ``num_0p75`` (float 0.75)."""
    if isinstance(x, float):
        text = repr(x).replace("-", "m").replace(".", "p").replace("+", "")
        if "p" not in text and "e" not in text:
            text += "p0"
        return f"num_{text}"
    x = Fraction(x)
    sign = "m" if x < 0 else ""
    x = abs(x)
    if x.denominator == 1:
        return f"num_{sign}{x.numerator}"
    return f"num_{sign}{x.numerator}_{x.denominator}"


def decode_number(name: str):
    if not name.startswith("num_"):
        raise ValueError(f"{name!r} is not a numeric constant")
    body = name[4:]
    if "p" in body or "e" in body or body in ("inf", "minf", "nan"):
        return float(body.replace("m", "-").replace("p", "."))
    neg = body.startswith("m")
    body = body[1:] if neg else body
    parts = body.split("_")
    value = Fraction(int(parts[0]), int(parts[1])) if len(parts) == 2 else Fraction(int(parts[0]))
    return -value if neg else value


def _num(x):
    return Const(encode_number(x))


# ---------------------------------------------------------------------------
# toy gradient model
# ---------------------------------------------------------------------------

ACTIVATION_DOMAINS = {
    "identity": lambda v: True,
    "relu": lambda v: True,
    "tanh": lambda v: True,
    "sigmoid": lambda v: True,
    "sqrt": lambda v: v >= 0,
    "log": lambda v: v > 0,
}
MAX_DIM = 4


@dataclass(frozen=True)
class ToyModelState:
    """Linear model ``y = W x + b`` with momentum SGD state.

    ``weights`` is ``d_out`` rows of ``d_in`` entries; ``bias`` is ``None``
    for a model without bias.  ``velocity`` is flat in parameter order
    (weights row-major, then bias).
    """

    weights: tuple
    bias: tuple | None
    lr: object
    momentum: object = 0
    velocity: tuple | None = None
    activations: tuple = ("identity",)
    exact: bool = True

    def __post_init__(self):
        conv = (lambda v: Fraction(v)) if self.exact else float
        w = tuple(tuple(conv(v) for v in row) for row in self.weights)
        if not w or not w[0] or any(len(r) != len(w[0]) for r in w):
            raise ValueError("weights must be a non-empty rectangular matrix")
        object.__setattr__(self, "weights", w)
        if self.bias is not None:
            b = tuple(conv(v) for v in self.bias)
            if len(b) != len(w):
                raise ValueError("bias length must equal the output dimension")
            object.__setattr__(self, "bias", b)
        object.__setattr__(self, "lr", conv(self.lr))
        object.__setattr__(self, "momentum", conv(self.momentum))
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.momentum < 0:
            raise ValueError("momentum must be non-negative")
        n = len(self.params)
        vel = self.velocity if self.velocity is not None else (0,) * n
        vel = tuple(conv(v) for v in vel)
        if len(vel) != n:
            raise ValueError("velocity length must equal the parameter count")
        object.__setattr__(self, "velocity", vel)
        object.__setattr__(self, "activations", tuple(self.activations))
        for a in self.activations:
            if a not in ACTIVATION_DOMAINS:
                raise ValueError(f"unknown activation {a!r}")

    @property
    def d_in(self):
        return len(self.weights[0])

    @property
    def d_out(self):
        return len(self.weights)

    @property
    def architecture(self):
        return (self.d_in, self.d_out)

    @property
    def params(self) -> tuple:
        flat = tuple(v for row in self.weights for v in row)
        return flat + (self.bias or ())

    def param_names(self) -> list:
        names = [f"w_{o + 1}_{i + 1}" for o in range(self.d_out) for i in range(self.d_in)]
        if self.bias is not None:
            names += [f"b_{o + 1}" for o in range(self.d_out)]
        return names

    def with_params(self, flat, velocity) -> "ToyModelState":
        k = self.d_in * self.d_out
        w = tuple(tuple(flat[o * self.d_in:(o + 1) * self.d_in]) for o in range(self.d_out))
        b = tuple(flat[k:]) if self.bias is not None else None
        return ToyModelState(w, b, self.lr, self.momentum, tuple(velocity), self.activations, self.exact)

    def predict(self, x) -> tuple:
        b = self.bias or (0,) * self.d_out
        return tuple(sum(wi * xi for wi, xi in zip(row, x)) + bo for row, bo in zip(self.weights, b))

    def to_formulas(self) -> frozenset:
        out = set()
        for name, v, vel in zip(self.param_names(), self.params, self.velocity):
            out.add(Atom("Param", (Const(name), _num(v))))
            out.add(Atom("Velocity", (Const(name), _num(vel))))
        out.add(Atom("LearningRate", (_num(self.lr),)))
        out.add(Atom("Momentum", (_num(self.momentum),)))
        out.add(Atom("Layer", (Const("L1"), _num(self.d_in))))
        out.add(Atom("Layer", (Const("L2"), _num(self.d_out))))
        for a in self.activations:
            out.add(Atom("Activation", (Const(a),)))
        return frozenset(out)

    @classmethod
    def from_formulas(cls, formulas) -> "ToyModelState | None":
        """Read the model back from its atoms; ``None`` if the atoms do not describe one."""
        facts = _facts(formulas)
        try:
            layers = {k: decode_number(v) for k, v in facts.get("Layer", [])}
            d_in, d_out = int(layers["L1"]), int(layers["L2"])
            if len(layers) != 2 or d_in < 1 or d_out < 1:
                return None
            params = dict(facts["Param"])
            vel = dict(facts.get("Velocity", []))
            (lr,), = facts["LearningRate"]
            mom = facts.get("Momentum", [("num_0",)])[0][0]
            acts = tuple(sorted(a for (a,) in facts.get("Activation", []))) or ("identity",)
            values = {k: decode_number(v) for k, v in params.items()}
            exact = not any(isinstance(v, float) for v in values.values())
            w = tuple(tuple(values[f"w_{o + 1}_{i + 1}"] for i in range(d_in)) for o in range(d_out))
            has_bias = any(k.startswith("b_") for k in values)
            b = tuple(values[f"b_{o + 1}"] for o in range(d_out)) if has_bias else None
            if len(values) != d_in * d_out + (d_out if has_bias else 0):
                return None
            model = cls(w, b, decode_number(lr), decode_number(mom), None, acts, exact)
            velocity = tuple(decode_number(vel[n]) if n in vel else 0 for n in model.param_names())
            return model.with_params(model.params, velocity)
        except (KeyError, ValueError, TypeError):
            return None


@dataclass(frozen=True)
class ToyData:
    """Samples ``(x, y)`` for the linear model, with squared-error loss."""

    samples: tuple
    differentiable: bool = True
    exact: bool = True

    def __post_init__(self):
        conv = (lambda v: Fraction(v)) if self.exact else float
        object.__setattr__(self, "samples", tuple(
            (tuple(conv(v) for v in x), tuple(conv(v) for v in y)) for x, y in self.samples))

    def to_formulas(self, with_labels=True) -> frozenset:
        out = set()
        for n, (x, y) in enumerate(self.samples, 1):
            for i, v in enumerate(x, 1):
                out.add(Atom("Feature", (Const(f"s{n}"), Const(f"x{i}"), _num(v))))
            if with_labels:
                for o, v in enumerate(y, 1):
                    out.add(Atom("Label", (Const(f"s{n}"), Const(f"y{o}"), _num(v))))
        if self.differentiable and with_labels:
            out.add(Atom("Differentiable", (Const("mse"),)))
        return frozenset(out)

    @classmethod
    def from_formulas(cls, formulas) -> "ToyData | None":
        facts = _facts(formulas)
        feats, labels = {}, {}
        try:
            for s, i, v in facts.get("Feature", []):
                feats.setdefault(s, {})[int(i[1:])] = decode_number(v)
            for s, o, v in facts.get("Label", []):
                labels.setdefault(s, {})[int(o[1:])] = decode_number(v)
        except (ValueError, TypeError):
            return None
        samples = []
        for s in sorted(set(feats) | set(labels), key=lambda s: (len(s), s)):
            x = feats.get(s, {})
            y = labels.get(s, {})
            if sorted(x) != list(range(1, len(x) + 1)) or sorted(y) != list(range(1, len(y) + 1)):
                return None
            samples.append((tuple(x[i] for i in sorted(x)), tuple(y[o] for o in sorted(y))))
        values = [v for x, y in samples for v in x + y]
        exact = not any(isinstance(v, float) for v in values)
        return cls(tuple(samples), ("mse",) in facts.get("Differentiable", []), exact)


def _facts(formulas):
    """Predicate -> list of constant-name tuples, for ground atoms only."""
    out = {}
    for f in formulas:
        if isinstance(f, Atom) and all(isinstance(a, Const) for a in f.args):
            out.setdefault(f.pred, []).append(tuple(a.name for a in f.args))
    for v in out.values():
        v.sort()
    return out


def mse_loss(model: ToyModelState, data: ToyData, params=None):
    m = model if params is None else model.with_params(params, model.velocity)
    total = 0
    for x, y in data.samples:
        total += sum((p - t) ** 2 for p, t in zip(m.predict(x), y))
    return total / len(data.samples)


def mse_gradient(model: ToyModelState, data: ToyData) -> tuple:
    """Gradient of the mean squared error in parameter order."""
    n = len(data.samples)
    gw = [[0] * model.d_in for _ in range(model.d_out)]
    gb = [0] * model.d_out
    for x, y in data.samples:
        pred = model.predict(x)
        for o in range(model.d_out):
            r = 2 * (pred[o] - y[o]) / n
            gb[o] += r
            for i in range(model.d_in):
                gw[o][i] += r * x[i]
    flat = [v for row in gw for v in row]
    if model.bias is not None:
        flat += gb
    return tuple(flat)


def momentum_step(theta, grad, lr, momentum, v_prev):
    """``theta - lr * (grad + momentum * v_prev)``, returned with the new velocity."""
    v_new = tuple(g + momentum * v for g, v in zip(grad, v_prev))
    return tuple(t - lr * v for t, v in zip(theta, v_new)), v_new


def toy_learnable(model: ToyModelState | None, data: ToyData | None) -> dict:
    """The three gate conditions for one gradient step."""
    if model is None or data is None or not data.samples:
        return {"dimensionality": False, "activation_feasible": False, "gradient_exists": False}
    dims = (model.d_in <= MAX_DIM and model.d_out <= MAX_DIM
            and all(len(x) == model.d_in and len(y) == model.d_out for x, y in data.samples))
    feasible = all(ACTIVATION_DOMAINS[a](v) for a in model.activations
                   for x, _ in data.samples for v in x)
    return {"dimensionality": dims, "activation_feasible": feasible, "gradient_exists": data.differentiable}


class ToyGradientRule(LearnRule, ProcessRule):
    """One momentum gradient step on a linear model (learn) and prediction (process).

    The model's activations are declared metadata: they gate which inputs
    are admissible, while the predictor itself stays linear.
    """

    name = "gradient"

    def learnable(self, phi_x, phi_y):
        return all(toy_learnable(ToyModelState.from_formulas(phi_x), ToyData.from_formulas(phi_y)).values())

    def step(self, model: ToyModelState, data: ToyData) -> ToyModelState:
        grad = mse_gradient(model, data)
        theta, vel = momentum_step(model.params, grad, model.lr, model.momentum, model.velocity)
        return model.with_params(theta, vel)

    def learn(self, phi_x, phi_y):
        model = ToyModelState.from_formulas(phi_x)
        data = ToyData.from_formulas(phi_y)
        new = self.step(model, data)
        keep = {f for f in phi_x if not (isinstance(f, Atom) and f.pred in _MODEL_PREDICATES)}
        return frozenset(keep) | new.to_formulas()

    def process_gate(self, phi_u, phi_q) -> dict:
        model = ToyModelState.from_formulas(phi_u)
        data = ToyData.from_formulas(phi_q)
        if model is None or data is None or not data.samples:
            return {"input_match": False, "activation_feasible": False, "output_defined": model is not None}
        return {
            "input_match": model.d_in <= MAX_DIM and all(len(x) == model.d_in for x, _ in data.samples),
            "activation_feasible": all(ACTIVATION_DOMAINS[a](v) for a in model.activations
                                       for x, _ in data.samples for v in x),
            "output_defined": 1 <= model.d_out <= MAX_DIM,
        }

    def processable(self, phi_u, phi_q):
        return all(self.process_gate(phi_u, phi_q).values())

    def process(self, phi_u, phi_q):
        model = ToyModelState.from_formulas(phi_u)
        data = ToyData.from_formulas(phi_q)
        out = set()
        for n, (x, _) in enumerate(data.samples, 1):
            for o, v in enumerate(model.predict(x), 1):
                out.add(Atom("Prediction", (Const(f"s{n}"), Const(f"y{o}"), _num(v))))
        return frozenset(out)


_MODEL_PREDICATES = {"Param", "Velocity", "LearningRate", "Momentum", "Layer", "Activation"}

RULES = {"union": FactUnionRule, "gradient": ToyGradientRule}
PROCESS_RULES = {"query": FactQueryRule, "gradient": ToyGradientRule}


def finite_difference_gradient(model: ToyModelState, data: ToyData, h=Fraction(1, 1000)) -> tuple:
    """Central differences of the loss; exact for a quadratic loss in rational mode."""
    if not model.exact:
        h = float(h)
    base = list(model.params)
    out = []
    for k in range(len(base)):
        up, down = list(base), list(base)
        up[k] += h
        down[k] -= h
        out.append((mse_loss(model, data, up) - mse_loss(model, data, down)) / (2 * h))
    return tuple(out)


def state_from_model(name: str, model: ToyModelState, times=("t1",)) -> StateSet:
    formulas = model.to_formulas()
    return StateSet(name, formulas, (name,), times, canonical_realization(formulas))


def state_from_data(name: str, data: ToyData, times=("t1",), with_labels=True) -> StateSet:
    formulas = data.to_formulas(with_labels)
    return StateSet(name, formulas, (name,), times, canonical_realization(formulas))



def _exact_value(v):
    return Fraction(str(v)) if not isinstance(v, Fraction) else v


def model_from_json(data: Mapping) -> ToyModelState:
    """``{"weights": [[...]], "bias": [...] | null, "lr": "1/10", "momentum": 0, "velocity": [...]}``.

    Numbers may be JSON numbers or strings such as ``"1/10"``; they are read
    exactly unless ``"exact": false``.
    """
    exact = data.get("exact", True)
    conv = _exact_value if exact else float
    vel = data.get("velocity")
    return ToyModelState(
        tuple(tuple(conv(v) for v in row) for row in data["weights"]),
        None if data.get("bias") is None else tuple(conv(v) for v in data["bias"]),
        conv(data["lr"]), conv(data.get("momentum", 0)),
        None if vel is None else tuple(conv(v) for v in vel),
        tuple(data.get("activations", ("identity",))), exact)


def data_from_json(data: Mapping) -> ToyData:
    """``{"samples": [{"x": [...], "y": [...]}, ...]}``; samples without ``y`` are queries."""
    exact = data.get("exact", True)
    conv = _exact_value if exact else float
    samples = tuple((tuple(conv(v) for v in s["x"]), tuple(conv(v) for v in s.get("y", ())))
                    for s in data["samples"])
    return ToyData(samples, data.get("differentiable", True), exact)
