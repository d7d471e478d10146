"""Generalization-error bound from overlap between model and query state sets.

The query distribution ``p_q`` lives on the query states.  The model is
assumed to reproduce ``p_q`` on states it already carries and to spread the
remaining mass uniformly elsewhere; the bound is Pinsker's inequality
applied to the KL divergence between the two.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .errors import InfiniteDivergence, SupportMismatch

SUM_TOL = 1e-12
RADICAND_TOL = 1e-12


def _log(x, base):
    return math.log(x) if base is None else math.log(x, base)


def _resolve_base(log_base):
    if log_base in (None, "e", math.e):
        return None
    if log_base in (2, "2"):
        return 2
    raise ValueError(f"unsupported log base {log_base!r}")


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability masses over a finite set of labels.

    Labels in ``support`` without an entry in ``mass`` carry zero mass.  With
    ``exact`` every mass is a Fraction and must sum to exactly 1.
    """

    support: tuple
    mass: Mapping = field(default_factory=dict)
    exact: bool = False

    def __post_init__(self):
        support = tuple(sorted(set(self.support)))
        object.__setattr__(self, "support", support)
        extra = set(self.mass) - set(support)
        if extra:
            raise SupportMismatch(f"mass given for labels outside the support: {sorted(extra)}")
        conv = Fraction if self.exact else float
        mass = {}
        for x in support:
            v = self.mass.get(x, 0)
            if self.exact and isinstance(v, float):
                v = Fraction(str(v))
            v = conv(v)
            if v < 0:
                raise ValueError(f"negative mass {v} on {x!r}")
            mass[x] = v
        object.__setattr__(self, "mass", mass)
        total = sum(mass.values()) if self.exact else math.fsum(mass.values())
        if self.exact and total != 1:
            raise ValueError(f"masses sum to {total}, not 1")
        if not self.exact and abs(total - 1) > SUM_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")

    def __getitem__(self, x):
        return self.mass[x]

    def total(self, labels: Iterable) -> float | Fraction:
        vals = [self.mass[x] for x in labels]
        return sum(vals, Fraction(0)) if self.exact else math.fsum(vals)

    def to_json(self):
        return {"support": list(self.support),
                "mass": {x: (str(v) if self.exact else v) for x, v in self.mass.items()}}

    @classmethod
    def from_json(cls, data: Mapping, exact: bool = False):
        mass = dict(data.get("mass", {}))
        if exact:
            mass = {k: Fraction(str(v)) for k, v in mass.items()}
        support = data.get("support", list(mass))
        return cls(tuple(support), mass, exact)


def load_distribution(path, exact: bool = False) -> FiniteDistribution:
    text = Path(path).read_text()
    # read numbers as text so decimal literals become exact fractions
    data = json.loads(text, parse_float=Fraction if exact else float)
    return FiniteDistribution.from_json(data, exact)


def load_label_set(path) -> frozenset:
    """A JSON list of labels, or an object with a ``support`` list."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, list):
        return frozenset(data)
    return frozenset(data["support"])


def _plogp_sum(pairs, base):
    """-sum p*log(p) over the given masses, with 0*log 0 = 0."""
    return -math.fsum(float(p) * _log(p, base) for p in pairs if p > 0)


@dataclass(frozen=True)
class OverlapStats:
    n_q: int
    n_overlap: int
    p_overlap: float | Fraction
    h_nonoverlap: float
    overlap: tuple
    nonoverlap: tuple

    def to_json(self):
        return {"n_q": self.n_q, "n_overlap": self.n_overlap, "p_overlap": _num(self.p_overlap),
                "h_nonoverlap": self.h_nonoverlap, "overlap": list(self.overlap),
                "nonoverlap": list(self.nonoverlap)}


def _num(v):
    return str(v) if isinstance(v, Fraction) else v


def _check_support(s_oq, p_q):
    s_oq = frozenset(p_q.support) if s_oq is None else frozenset(s_oq)
    if s_oq != frozenset(p_q.support):
        raise SupportMismatch(f"query set {sorted(s_oq)} differs from distribution support {list(p_q.support)}")
    return s_oq


def overlap_stats(s_ou, s_oq, p_q: FiniteDistribution, log_base=None) -> OverlapStats:
    """Sizes, overlap mass and non-overlap entropy of *p_q* against the model states *s_ou*."""
    base = _resolve_base(log_base)
    s_oq = _check_support(s_oq, p_q)
    overlap = tuple(sorted(s_oq & frozenset(s_ou)))
    nonoverlap = tuple(sorted(s_oq - frozenset(s_ou)))
    p_overlap = p_q.total(overlap)
    if not p_q.exact:
        p_overlap = min(1.0, p_overlap)
    h = _plogp_sum((p_q[x] for x in nonoverlap), base)
    return OverlapStats(len(s_oq), len(overlap), p_overlap, h if h > 0 else 0.0,
                        overlap, nonoverlap)


def build_model_distribution(s_ou, s_oq, p_q: FiniteDistribution,
                             overlap_mass: Mapping | None = None) -> FiniteDistribution:
    """The conservative model distribution: *p_q* on the overlap, uniform elsewhere.

    *overlap_mass* replaces *p_q* on the overlap with masses supplied by the
    caller; the rest is spread uniformly over the non-overlap states.
    """
    stats = overlap_stats(s_ou, s_oq, p_q)
    if not stats.nonoverlap and overlap_mass is None:
        return p_q
    zero = Fraction(0) if p_q.exact else 0.0
    if overlap_mass is None:
        mass = {x: p_q[x] for x in stats.overlap}
    else:
        missing = set(stats.overlap) - set(overlap_mass)
        if missing:
            raise SupportMismatch(f"model mass missing for overlap states {sorted(missing)}")
        conv = (lambda v: Fraction(str(v))) if p_q.exact else float
        mass = {x: conv(overlap_mass[x]) for x in stats.overlap}
    covered = sum(mass.values(), zero) if p_q.exact else math.fsum(mass.values())
    rest = 1 - covered
    if stats.nonoverlap:
        if not p_q.exact:
            rest = max(rest, 0.0)
        share = rest / len(stats.nonoverlap)
        for x in stats.nonoverlap:
            mass[x] = share
    return FiniteDistribution(p_q.support, mass, p_q.exact)


def _same_support(p, q):
    if p.support != q.support:
        raise SupportMismatch(f"supports differ: {list(p.support)} vs {list(q.support)}")


def kl_terms(p: FiniteDistribution, q: FiniteDistribution, labels, log_base=None) -> float:
    base = _resolve_base(log_base)
    terms = []
    for x in labels:
        px, qx = p[x], q[x]
        if px == 0:
            continue
        if qx == 0:
            raise InfiniteDivergence(f"q has zero mass on {x!r} where p has {px}")
        terms.append(float(px) * _log(Fraction(px) / Fraction(qx) if p.exact and q.exact else px / qx, base))
    return math.fsum(terms)


def kl_divergence(p: FiniteDistribution, q: FiniteDistribution, log_base=None) -> float:
    """D(p || q) with 0-mass terms of p contributing nothing."""
    _same_support(p, q)
    return kl_terms(p, q, p.support, log_base)


def tvd_oracle(p: FiniteDistribution, q: FiniteDistribution):
    """Total variation distance, exact when both sides are exact."""
    _same_support(p, q)
    if p.exact and q.exact:
        return sum((abs(p[x] - q[x]) for x in p.support), Fraction(0)) / 2
    return math.fsum(abs(float(p[x]) - float(q[x])) for x in p.support) / 2


def closed_form_nonoverlap_kl(stats: OverlapStats, log_base=None) -> float:
    """KL over the non-overlap states for the uniform model: (1-P) log(k/(1-P)) - H."""
    base = _resolve_base(log_base)
    rest = 1 - stats.p_overlap
    k = stats.n_q - stats.n_overlap
    if k == 0 or rest <= 0:
        return 0.0
    return float(rest) * _log(Fraction(k) / rest if isinstance(rest, Fraction) else k / rest, base) \
        - stats.h_nonoverlap


@dataclass(frozen=True)
class BoundReport:
    bound: float
    branch: str                 # "subset" or "pinsker"
    components: Mapping

    def to_json(self):
        return {"bound": self.bound, "branch": self.branch, "components": dict(self.components)}


def generalization_bound(s_ou, s_oq, p_q: FiniteDistribution, log_base=None,
                         strict: bool = False, overlap_mass: Mapping | None = None) -> BoundReport:
    """Upper bound on the total variation between the query and model distributions.

    Zero when every query state is a model state.  Otherwise the square root
    of half the non-overlap KL term.  With *strict* the caller's overlap
    masses define the model and the overlap KL term is included.
    """
    base = _resolve_base(log_base)
    stats = overlap_stats(s_ou, s_oq, p_q, log_base)
    comps = {"n_q": stats.n_q, "n_overlap": stats.n_overlap, "p_overlap": _num(stats.p_overlap),
             "h_nonoverlap": stats.h_nonoverlap, "log_base": "e" if base is None else 2,
             "strict": strict}
    if not stats.nonoverlap and not strict:
        comps.update({"kl_overlap": 0.0, "kl_nonoverlap": 0.0, "radicand": 0.0, "tvd": _num(p_q.total(()))})
        return BoundReport(0.0, "subset", comps)
    if strict:
        if overlap_mass is None:
            raise ValueError("strict mode needs model masses on the overlap")
        p_m = build_model_distribution(s_ou, s_oq, p_q, overlap_mass)
        kl_over = kl_terms(p_q, p_m, stats.overlap, log_base)
        kl_non = kl_terms(p_q, p_m, stats.nonoverlap, log_base)
    else:
        p_m = build_model_distribution(s_ou, s_oq, p_q)
        kl_over = 0.0
        kl_non = closed_form_nonoverlap_kl(stats, log_base)
    radicand = kl_over + kl_non
    if radicand < -RADICAND_TOL:
        raise ArithmeticError(f"negative radicand {radicand!r}")
    bound = math.sqrt(max(radicand, 0.0) / 2)
    comps.update({"kl_overlap": kl_over, "kl_nonoverlap": kl_non, "radicand": radicand,
                  "kl_direct": kl_divergence(p_q, p_m, log_base), "tvd": _num(tvd_oracle(p_q, p_m)),
                  "model": p_m.to_json()["mass"]})
    return BoundReport(bound, "pinsker", comps)
