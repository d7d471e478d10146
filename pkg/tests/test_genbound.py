import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_bound_instance, tvd_direct
from mltmf.errors import InfiniteDivergence, SupportMismatch
from mltmf.genbound import (
    FiniteDistribution,
    build_model_distribution,
    closed_form_nonoverlap_kl,
    generalization_bound,
    kl_divergence,
    load_distribution,
    load_label_set,
    overlap_stats,
    tvd_oracle,
)

OVERLAP = {"s1", "s2"}


@pytest.fixture
def query(fixtures):
    return load_distribution(fixtures / "genbound_query.json", exact=True)


@pytest.fixture
def float_query(fixtures):
    return load_distribution(fixtures / "genbound_query.json")


def test_subset_stats(query):
    stats = overlap_stats({"s1", "s2", "s3", "s4", "s5"}, None, query)
    assert stats.p_overlap == 1 and stats.h_nonoverlap == 0


def test_fixture_stats(query):
    stats = overlap_stats(OVERLAP, None, query)
    assert stats.p_overlap == Fraction(4, 5)
    assert stats.h_nonoverlap == pytest.approx(0.434355, abs=1e-6)
    assert (stats.n_q, stats.n_overlap, stats.nonoverlap) == (4, 2, ("s3", "s4"))


def test_uniform_stats(fixtures):
    p = load_distribution(fixtures / "genbound_uniform_query.json")
    stats = overlap_stats(OVERLAP, None, p)
    assert stats.p_overlap == 0.5
    assert stats.h_nonoverlap == pytest.approx(0.693147, abs=1e-6)


def test_support_mismatch(query):
    with pytest.raises(SupportMismatch):
        overlap_stats(OVERLAP, {"s1", "s2"}, query)


def test_model_distribution(query):
    p_m = build_model_distribution(OVERLAP, None, query)
    assert [p_m[x] for x in p_m.support] == [Fraction(2, 5), Fraction(2, 5), Fraction(1, 10), Fraction(1, 10)]
    assert build_model_distribution({"s1", "s2", "s3", "s4"}, None, query) == query


def test_model_with_all_mass_on_overlap():
    p = FiniteDistribution(("a", "b", "c"), {"a": Fraction(1, 2), "b": Fraction(1, 2)}, exact=True)
    p_m = build_model_distribution({"a", "b"}, None, p)
    assert p_m["c"] == 0
    report = generalization_bound({"a", "b"}, None, p)
    assert report.bound == 0 and report.branch == "pinsker"


def test_kl_examples(query):
    assert kl_divergence(query, query) == 0
    p_m = build_model_distribution(OVERLAP, None, query)
    assert kl_divergence(query, p_m) == pytest.approx(0.026162, abs=1e-6)
    assert kl_divergence(query, p_m) == pytest.approx(0.2 * math.log(10) - 0.4343546114105817, abs=1e-12)


def test_infinite_divergence():
    p = FiniteDistribution(("a", "b"), {"a": 0.5, "b": 0.5})
    q = FiniteDistribution(("a", "b"), {"a": 1.0})
    with pytest.raises(InfiniteDivergence):
        kl_divergence(p, q)
    assert kl_divergence(q, p) == pytest.approx(math.log(2))


def test_bound_on_fixture(query, float_query):
    for p in (query, float_query):
        report = generalization_bound(OVERLAP, None, p)
        assert report.branch == "pinsker"
        assert report.bound == pytest.approx(0.114373, abs=1e-6)
        assert report.bound == pytest.approx(math.sqrt(kl_divergence(p, build_model_distribution(OVERLAP, None, p)) / 2),
                                             abs=1e-12)
    assert tvd_oracle(query, build_model_distribution(OVERLAP, None, query)) == Fraction(1, 20)
    assert generalization_bound(OVERLAP, None, query).components["tvd"] == "1/20"


def test_subset_fixture_gives_zero(fixtures, query):
    s_ou = load_label_set(fixtures / "genbound_subset_model.json")
    report = generalization_bound(s_ou, None, query)
    assert report.bound == 0 and report.branch == "subset"


def test_uniform_gives_zero(fixtures):
    p = load_distribution(fixtures / "genbound_uniform_query.json")
    assert generalization_bound(OVERLAP, None, p).bound == pytest.approx(0, abs=1e-7)
    assert generalization_bound(OVERLAP, None, p).components["radicand"] == pytest.approx(0, abs=1e-15)


def test_base_two(query):
    nats = generalization_bound(OVERLAP, None, query)
    bits = generalization_bound(OVERLAP, None, query, log_base=2)
    assert bits.components["radicand"] == pytest.approx(nats.components["radicand"] / math.log(2))


def test_strict_mode_adds_overlap_term(query):
    report = generalization_bound(OVERLAP, None, query, strict=True, overlap_mass={"s1": 0.5, "s2": 0.3})
    assert report.components["kl_overlap"] > 0
    loose = generalization_bound(OVERLAP, None, query, strict=True, overlap_mass={"s1": 0.4, "s2": 0.4})
    assert loose.bound == pytest.approx(generalization_bound(OVERLAP, None, query).bound, abs=1e-12)
    assert report.bound > loose.bound


def test_tvd_examples():
    p = FiniteDistribution(("a", "b"), {"a": Fraction(1)}, exact=True)
    q = FiniteDistribution(("a", "b"), {"b": Fraction(1)}, exact=True)
    assert tvd_oracle(p, p) == 0
    assert tvd_oracle(p, q) == 1


def test_distribution_validation():
    with pytest.raises(ValueError):
        FiniteDistribution(("a",), {"a": 0.5})
    with pytest.raises(ValueError):
        FiniteDistribution(("a", "b"), {"a": 1.5, "b": -0.5})
    with pytest.raises(SupportMismatch):
        FiniteDistribution(("a",), {"a": 1.0, "z": 0.0})


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_pinsker_dominance(rng):
    s_ou, p = random_bound_instance(rng)
    report = generalization_bound(s_ou, None, p)
    p_m = build_model_distribution(s_ou, None, p)
    assert tvd_oracle(p, p_m) <= report.bound + 1e-12
    assert report.components["radicand"] >= -1e-12


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_exact_mode_tvd_matches_direct_sum(rng):
    s_ou, p = random_bound_instance(rng, exact=True)
    p_m = build_model_distribution(s_ou, None, p)
    assert tvd_oracle(p, p_m) == tvd_direct(p, p_m)
    assert float(tvd_oracle(p, p_m)) <= generalization_bound(s_ou, None, p).bound + 1e-12


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_decomposition(rng):
    s_ou, p = random_bound_instance(rng)
    stats = overlap_stats(s_ou, None, p)
    p_m = build_model_distribution(s_ou, None, p)
    assert kl_divergence(p, p_m) == pytest.approx(closed_form_nonoverlap_kl(stats), abs=1e-12)
    assert kl_divergence(p, p_m, log_base=None) >= -1e-12


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_more_coverage_never_raises_the_bound(rng):
    s_ou, p = random_bound_instance(rng)
    larger = s_ou | {x for x in p.support if rng.random() < 0.5}
    small = generalization_bound(s_ou, None, p).components["radicand"]
    big = generalization_bound(larger, None, p).components["radicand"]
    # compared on the radicand: the square root magnifies rounding noise near zero
    assert big <= small + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_subset_branch_is_zero(rng):
    _, p = random_bound_instance(rng)
    extra = {f"m{i}" for i in range(rng.randint(0, 3))}
    report = generalization_bound(set(p.support) | extra, None, p)
    assert report.bound == 0.0 and report.branch == "subset"


def test_seeded_instances_repeat():
    assert random_bound_instance(random.Random(2)) == random_bound_instance(random.Random(2))
