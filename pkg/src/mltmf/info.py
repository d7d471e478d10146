"""State sets, enabling mappings and information sextuples.

A state set is a finite set of formulas, optionally paired with a finite
interpretation that satisfies it.  An enabling mapping is an explicit table
from the formulas of one state set onto the formulas of another.  Formula
identity throughout is structural equality after desugaring.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    ComponentMismatch,
    LossNotSubset,
    MappingError,
    MltmfError,
    MultivaluedMapping,
    NotSurjective,
    NotTotal,
    RealizationMismatch,
    ResultInconsistent,
    SignatureError,
    SignatureMismatch,
    SuperposedOverlaps,
)
from .logic import (
    And,
    Atom,
    Const,
    Signature,
    Wff,
    desugar,
    format_formula,
    infer_signature,
    parse_formula,
)
from .semantics import (
    DEFAULT_BUDGET,
    Interpretation,
    QuantifierBudget,
    check_consistency,
    evaluate,
)

# internal consistency checks may involve many more atoms than user queries
INTERNAL_BUDGET = QuantifierBudget(max_ground_atoms=4096)


def _key(f):
    return desugar(f)


def _sorted(formulas):
    return sorted(formulas, key=format_formula)


# ---------------------------------------------------------------------------
# state sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateSet:
    name: str
    formulas: frozenset
    objects: tuple = ()
    times: tuple = ()
    realization: Interpretation | None = None
    signature: Signature | None = None

    def __post_init__(self):
        object.__setattr__(self, "formulas", frozenset(self.formulas))
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "times", tuple(self.times))

    @property
    def sig(self) -> Signature:
        base = self.signature
        if self.realization is not None:
            base = self.realization.signature if base is None else base.merge(self.realization.signature)
        return infer_signature(self.formulas, base)

    @property
    def keys(self) -> frozenset:
        return frozenset(_key(f) for f in self.formulas)

    def __eq__(self, other):
        if not isinstance(other, StateSet):
            return NotImplemented
        return self.keys == other.keys

    def __hash__(self):
        return hash(self.keys)

    def __contains__(self, f):
        return _key(f) in self.keys

    def __len__(self):
        return len(self.formulas)

    def sorted(self):
        return _sorted(self.formulas)

    def texts(self):
        return [format_formula(f) for f in self.sorted()]

    def replace(self, **changes) -> "StateSet":
        data = dict(name=self.name, formulas=self.formulas, objects=self.objects, times=self.times,
                    realization=self.realization, signature=self.signature)
        data.update(changes)
        return StateSet(**data)

    def unsatisfied(self, interp: Interpretation | None = None, budget=DEFAULT_BUDGET):
        """Formulas that are false under *interp* (default: the state's own realization)."""
        interp = interp or self.realization
        if interp is None:
            return []
        return [f for f in self.sorted() if not evaluate(f, interp, budget)]

    def is_realized(self, budget=DEFAULT_BUDGET) -> bool:
        return self.realization is not None and not self.unsatisfied(budget=budget)

    def consistency(self, budget=INTERNAL_BUDGET):
        return check_consistency(self.sorted(), self.sig, budget=budget)

    def to_json(self) -> dict:
        out = {"name": self.name, "formulas": self.texts(),
               "objects": list(self.objects), "times": list(self.times)}
        if self.realization is not None:
            out["realization"] = self.realization.to_json()
        return out


def canonical_realization(formulas: Iterable[Wff], sig: Signature | None = None,
                          budget=DEFAULT_BUDGET) -> Interpretation:
    """Term model for a set of formulas: constants denote themselves, positive ground atoms hold.

    Function tables send every argument tuple to the first domain element.
    Raises RealizationMismatch if the resulting interpretation does not
    satisfy every formula.
    """
    formulas = list(formulas)
    sig = infer_signature(formulas, sig)
    domain = sorted(sig.constants) or ["_d1"]
    rels = {p: set() for p in sig.predicates}
    for f in formulas:
        _collect_atoms(f, rels)
    funcs = {fn: {args: domain[0] for args in itertools.product(domain, repeat=ar)}
             for fn, ar in sig.functions.items()}
    interp = Interpretation(sig, tuple(domain), {c: c for c in sig.constants}, funcs, rels)
    bad = [f for f in formulas if not evaluate(f, interp, budget)]
    if bad:
        raise RealizationMismatch(
            f"term model does not satisfy {format_formula(bad[0])!r}; supply a realization")
    return interp


def _collect_atoms(f, rels):
    if isinstance(f, Atom):
        if all(isinstance(a, Const) for a in f.args):
            rels[f.pred].add(tuple(a.name for a in f.args))
        return
    if isinstance(f, And):
        _collect_atoms(f.left, rels)
        _collect_atoms(f.right, rels)


def make_state(name: str, texts: Iterable[str], sig: Signature, objects=(), times=(),
               realization: Interpretation | None | str = "canonical") -> StateSet:
    """Parse formula texts into a state set; ``realization='canonical'`` builds the term model."""
    formulas = frozenset(parse_formula(t, sig) for t in texts)
    if realization == "canonical":
        realization = canonical_realization(formulas, sig)
    return StateSet(name, formulas, objects, times, realization, sig)


# ---------------------------------------------------------------------------
# enabling mappings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnablingMapping:
    """Explicit single-valued table from source formulas to target formulas.

    Lookups go through desugared keys; the original formulas are kept for display.
    """

    source: StateSet
    target: StateSet
    table: Mapping[Wff, Wff]
    note: str = ""

    def __post_init__(self):
        table, shown = {}, {}
        for k, v in dict(self.table).items():
            kk = _key(k)
            if kk in table and _key(table[kk]) != _key(v):
                raise MultivaluedMapping(f"{format_formula(k)!r} is mapped to two different formulas")
            table[kk] = v
            shown[kk] = k
        tkeys = self.target.keys
        for v in table.values():
            if _key(v) not in tkeys:
                raise MappingError(f"image {format_formula(v)!r} is not a formula of the target state")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_shown", shown)

    @classmethod
    def from_pairs(cls, source, target, pairs, note=""):
        table = {}
        for k, v in pairs:
            if k in table and _key(table[k]) != _key(v):
                raise MultivaluedMapping(f"{format_formula(k)!r} is mapped to two different formulas")
            table[k] = v
        return cls(source, target, table, note)

    def __call__(self, f):
        return self.table[_key(f)]

    def shown(self, key):
        return self._shown.get(key, key)

    def items(self):
        pairs = [(self.shown(k), v) for k, v in self.table.items()]
        return sorted(pairs, key=lambda kv: format_formula(kv[0]))

    def to_json(self):
        return [[format_formula(k), format_formula(v)] for k, v in self.items()]


@dataclass(frozen=True)
class MappingReport:
    surjective: bool
    injective: bool
    recoverable: bool
    collisions: tuple = ()   # (target text, (source texts...))
    unhit: tuple = ()        # target texts without a preimage

    def to_json(self):
        return {"surjective": self.surjective, "injective": self.injective,
                "recoverable": self.recoverable,
                "collisions": [{"target": t, "sources": list(s)} for t, s in self.collisions],
                "unhit": list(self.unhit)}


def _require_total(m: EnablingMapping):
    missing = [f for f in m.source.sorted() if _key(f) not in m.table]
    if missing:
        raise NotTotal(f"mapping undefined on {format_formula(missing[0])!r}"
                       + (f" and {len(missing) - 1} more" if len(missing) > 1 else ""))
    skeys = m.source.keys
    extra = [k for k in m.table if k not in skeys]
    if extra:
        raise MappingError(f"mapping defined on {format_formula(m.shown(extra[0]))!r}, "
                           "which is not a source formula")


def _preimages(m):
    """Target key -> list of source formulas (as displayed) mapping onto it."""
    pre = {}
    for f in m.source.formulas:
        pre.setdefault(_key(m(f)), []).append(f)
    return pre


def check_enabling_map(m: EnablingMapping) -> MappingReport:
    """Surjectivity, injectivity and recoverability (bijectivity) of a total mapping."""
    _require_total(m)
    pre = _preimages(m)
    shown_target = {_key(f): f for f in m.target.formulas}
    collisions = tuple(sorted(
        (format_formula(shown_target[t]), tuple(sorted(format_formula(s) for s in srcs)))
        for t, srcs in pre.items() if len(srcs) > 1))
    unhit = tuple(sorted(format_formula(f) for k, f in shown_target.items() if k not in pre))
    surj, inj = not unhit, not collisions
    return MappingReport(surj, inj, surj and inj, collisions, unhit)


@dataclass(frozen=True)
class QuotientMapping:
    """Same-image classes of the source and the induced map from classes to targets."""

    classes: tuple          # tuple of frozensets of source formulas
    table: Mapping           # class -> target formula
    target: StateSet

    def is_bijective(self) -> bool:
        images = [_key(v) for v in self.table.values()]
        return len(set(images)) == len(images) and set(images) == set(self.target.keys)

    def matches(self, m: EnablingMapping) -> bool:
        """True when every class is a singleton and the induced map agrees with *m*."""
        return all(len(c) == 1 for c in self.classes) and all(
            _key(m(next(iter(c)))) == _key(self.table[c]) for c in self.classes)

    def to_json(self):
        return [{"class": sorted(format_formula(f) for f in c), "target": format_formula(self.table[c])}
                for c in self.classes]


def recoverable_reduction(m: EnablingMapping) -> QuotientMapping:
    """Quotient the source by equal images; the induced mapping is a bijection."""
    report = check_enabling_map(m)
    if not report.surjective:
        raise NotSurjective(f"targets without preimage: {', '.join(report.unhit)}")
    classes = {}
    for f in m.source.formulas:
        classes.setdefault(_key(m(f)), set()).add(f)
    table = {frozenset(srcs): next(v for v in m.target.formulas if _key(v) == t)
             for t, srcs in classes.items()}
    order = sorted(table, key=lambda c: sorted(format_formula(f) for f in c))
    return QuotientMapping(tuple(order), {c: table[c] for c in order}, m.target)


# ---------------------------------------------------------------------------
# sextuples
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InformationSextuple:
    ontology: str
    occurrence_times: tuple
    ontological_state: StateSet
    carrier: str
    reflection_times: tuple
    carrier_state: StateSet
    enabling: EnablingMapping

    def __post_init__(self):
        object.__setattr__(self, "occurrence_times", tuple(self.occurrence_times))
        object.__setattr__(self, "reflection_times", tuple(self.reflection_times))
        for label, value in (("ontology", self.ontology), ("occurrence times", self.occurrence_times),
                             ("ontological state", self.ontological_state.formulas),
                             ("carrier", self.carrier), ("reflection times", self.reflection_times),
                             ("carrier state", self.carrier_state.formulas)):
            if not value:
                raise ValueError(f"information {label} must be non-empty")
        if self.enabling.source != self.ontological_state or self.enabling.target != self.carrier_state:
            raise MappingError("enabling mapping must run from the ontological to the carrier state")

    def report(self) -> MappingReport:
        return check_enabling_map(self.enabling)

    @property
    def recoverable(self) -> bool:
        return self.report().recoverable

    def to_json(self):
        return {"ontology": self.ontology, "occurrence_times": list(self.occurrence_times),
                "ontological_state": self.ontological_state.to_json(),
                "carrier": self.carrier, "reflection_times": list(self.reflection_times),
                "carrier_state": self.carrier_state.to_json(),
                "mapping": self.enabling.to_json(), "note": self.enabling.note}


def intrinsic_sextuple(state: StateSet, name: str | None = None) -> InformationSextuple:
    """A state used as its own carrier, with the identity as enabling mapping."""
    name = name or state.name
    times = state.times or (f"{name}_t",)
    ident = EnablingMapping(state, state, {f: f for f in state.formulas}, "identity")
    return InformationSextuple(name, times, state, name, times, state, ident)


# ---------------------------------------------------------------------------
# noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    loss: frozenset = frozenset()
    superposed: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "loss", frozenset(self.loss))
        object.__setattr__(self, "superposed", frozenset(self.superposed))

    def inverse(self) -> "NoiseSpec":
        return NoiseSpec(self.superposed, self.loss)

    def to_json(self):
        return {"loss": [format_formula(f) for f in _sorted(self.loss)],
                "superposed": [format_formula(f) for f in _sorted(self.superposed)]}


def noise_witness(clean: StateSet, noisy: StateSet) -> NoiseSpec:
    """The noise turning *clean* into *noisy*: loss = clean minus noisy, superposed = the reverse."""
    ck, nk = clean.keys, noisy.keys
    return NoiseSpec(frozenset(f for f in clean.formulas if _key(f) not in nk),
                     frozenset(f for f in noisy.formulas if _key(f) not in ck))


def compose_noisy(s: StateSet, n: NoiseSpec, realization: Interpretation | None = None,
                  budget: QuantifierBudget = INTERNAL_BUDGET, name: str | None = None,
                  check: bool = True) -> StateSet:
    """Drop the loss formulas and add the superposed ones, then re-verify the result.

    An explicitly supplied *realization* must satisfy the result.  Otherwise
    the input's realization is kept when it still satisfies the result and
    dropped when it does not.
    """
    keys = s.keys
    loss_keys = {_key(f) for f in n.loss}
    stray = [f for f in _sorted(n.loss) if _key(f) not in keys]
    if stray:
        raise LossNotSubset(f"loss formula {format_formula(stray[0])!r} is not in the state")
    overlap = [f for f in _sorted(n.superposed) if _key(f) in keys]
    if overlap:
        raise SuperposedOverlaps(f"superposed formula {format_formula(overlap[0])!r} is already in the state")
    formulas = frozenset(f for f in s.formulas if _key(f) not in loss_keys) | n.superposed
    out = s.replace(name=name or s.name, formulas=formulas, realization=None)
    if check:
        verdict = out.consistency(budget)
        if not verdict.consistent:
            raise ResultInconsistent(
                "noisy state is inconsistent; core: " + "; ".join(format_formula(f) for f in verdict.core))
    if realization is not None:
        bad = out.unsatisfied(realization)
        if bad:
            raise RealizationMismatch(f"realization falsifies {format_formula(bad[0])!r}")
        return out.replace(realization=realization)
    if s.realization is not None:
        try:
            ok = not out.unsatisfied(s.realization)
        except MltmfError:
            ok = False
        if ok:
            return out.replace(realization=s.realization)
    return out


def _same_components(a: InformationSextuple, b: InformationSextuple):
    for label in ("ontology", "occurrence_times", "carrier", "reflection_times"):
        if getattr(a, label) != getattr(b, label):
            raise ComponentMismatch(
                f"{label.replace('_', ' ')} differ: {getattr(a, label)!r} vs {getattr(b, label)!r}")


def check_noisy_symmetry(info: InformationSextuple, noisy: InformationSextuple,
                         budget: QuantifierBudget = INTERNAL_BUDGET) -> bool:
    """Whether each sextuple is a noisy version of the other.

    The witness for each direction is built constructively from set
    differences, applied with :func:`compose_noisy` and compared.
    """
    _same_components(info, noisy)
    for a, b in ((info, noisy), (noisy, info)):
        n = noise_witness(a.ontological_state, b.ontological_state)
        try:
            got = compose_noisy(a.ontological_state, n, budget=budget)
        except (LossNotSubset, SuperposedOverlaps, ResultInconsistent):
            return False
        if got != b.ontological_state:
            return False
        # loss formulas must not be enabled in the other sextuple; superposed ones must be
        if any(_key(f) in b.enabling.table for f in n.loss):
            return False
        if any(_key(f) not in b.enabling.table for f in n.superposed):
            return False
    return True


def noisy_sextuple(info: InformationSextuple, n: NoiseSpec, carrier_state: StateSet,
                   table: Mapping, realization: Interpretation | None = None) -> InformationSextuple:
    """Noisy version of *info*: same components, noisy ontological state, new carrier state and map."""
    s = compose_noisy(info.ontological_state, n, realization)
    m = EnablingMapping(s, carrier_state, table, info.enabling.note)
    return InformationSextuple(info.ontology, info.occurrence_times, s, info.carrier,
                               info.reflection_times, carrier_state, m)


# ---------------------------------------------------------------------------
# interpretability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterpretabilityVerdict:
    interpretable: bool
    reasons: tuple = ()
    explanation: tuple = ()   # three sorted lists of formula texts
    output: tuple = ()

    def __bool__(self):
        return self.interpretable

    def to_json(self):
        out = {"interpretable": self.interpretable, "reasons": list(self.reasons)}
        if self.interpretable:
            out["explanation"] = {"model": list(self.explanation[0]), "input": list(self.explanation[1]),
                                  "output": list(self.explanation[2])}
        else:
            out["output"] = list(self.output)
        return out


def common_signature(*states: StateSet) -> Signature:
    sig = None
    for s in states:
        try:
            sig = s.sig if sig is None else sig.merge(s.sig)
        except SignatureError as exc:
            raise SignatureMismatch(f"state {s.name!r} disagrees with the others: {exc}") from None
    return sig


def check_interpretability(iu: InformationSextuple, iq: InformationSextuple, ir: InformationSextuple,
                           rule, budget: QuantifierBudget = DEFAULT_BUDGET) -> InterpretabilityVerdict:
    """Model state *iu* explains output *ir* on input *iq* when all three maps are
    bijective and *rule* processes the model and input states into the output state."""
    common_signature(iu.ontological_state, iq.ontological_state, ir.ontological_state)
    reasons = []
    for tag, info in (("IU", iu), ("IQ", iq), ("IR", ir)):
        if not info.recoverable:
            reasons.append(f"{tag}_NOT_RECOVERABLE")
        for label, s in (("STATE", info.ontological_state), ("CARRIER", info.carrier_state)):
            if s.realization is not None and s.unsatisfied(budget=budget):
                reasons.append(f"{tag}_{label}_NOT_REALIZED")
    su, sq = iu.ontological_state.formulas, iq.ontological_state.formulas
    output = ()
    if not rule.processable(su, sq):
        reasons.append("NOT_PROCESSABLE")
    else:
        produced = frozenset(rule.process(su, sq))
        output = tuple(format_formula(f) for f in _sorted(produced))
        if frozenset(_key(f) for f in produced) != ir.ontological_state.keys:
            reasons.append("OUTPUT_MISMATCH")
    if reasons:
        return InterpretabilityVerdict(False, tuple(reasons), (), output)
    triple = tuple(tuple(i.ontological_state.texts()) for i in (iu, iq, ir))
    return InterpretabilityVerdict(True, (), triple, output)


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def _load_realization(value, base: Path, sig):
    if value is None:
        return None
    if value == "canonical":
        return "canonical"
    if isinstance(value, str):
        value = json.loads((base / value).read_text())
    return Interpretation.from_json(value)


def state_from_json(data: Mapping, sig: Signature, base: Path = Path(".")) -> StateSet:
    real = _load_realization(data.get("realization"), base, sig)
    texts = data.get("formulas", [])
    s = make_state(data["name"], texts, sig, data.get("objects", ()), data.get("times", ()),
                   real if real is not None else None)
    return s


def _pairs(raw, sig):
    if isinstance(raw, Mapping):
        raw = list(raw.items())
    return [(parse_formula(a, sig), parse_formula(b, sig)) for a, b in raw]


def sextuple_from_json(data: Mapping, sig: Signature | None = None, base: Path = Path(".")) -> InformationSextuple:
    if sig is None:
        sig = Signature.from_json(data["signature"])
    so = state_from_json(data["ontological_state"], sig, base)
    sc = state_from_json(data["carrier_state"], sig, base)
    m = EnablingMapping.from_pairs(so, sc, _pairs(data["mapping"], sig), data.get("note", ""))
    return InformationSextuple(data["ontology"], data["occurrence_times"], so, data["carrier"],
                               data["reflection_times"], sc, m)


def load_sextuple(path) -> InformationSextuple:
    path = Path(path)
    return sextuple_from_json(json.loads(path.read_text()), base=path.parent)


@dataclass(frozen=True)
class NoisyBundle:
    clean: InformationSextuple
    noise: NoiseSpec
    noisy: InformationSextuple
    signature: Signature = field(default=None)


def load_noisy_bundle(path) -> NoisyBundle:
    """A clean sextuple, a noise description and the documented noisy sextuple."""
    path = Path(path)
    data = json.loads(path.read_text())
    sig = Signature.from_json(data["signature"])
    clean = sextuple_from_json(data["clean"], sig, path.parent)
    noise = NoiseSpec(frozenset(parse_formula(t, sig) for t in data["noise"]["loss"]),
                      frozenset(parse_formula(t, sig) for t in data["noise"]["superposed"]))
    noisy = sextuple_from_json(data["noisy"], sig, path.parent)
    return NoisyBundle(clean, noise, noisy, sig)
