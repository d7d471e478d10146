import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_safe_size, load_named_outputs, random_ethics_instance
from mltmf.errors import ConstraintError, TooLargeForExact
from mltmf.ethics import (
    EthicalConstraint,
    brute_force_max_safe,
    build_violation_hypergraph,
    check_ethical_safety,
    constraint_from_json,
    inject_safeguard,
    load_constraint,
    max_safe_subset,
)
from mltmf.logic import Atom, Implies, Not, Signature, format_formula, parse_formula

A, E = Atom("A"), Atom("E")
LETTERS = Signature(frozenset(), {}, {"A": 0, "B": 0, "C": 0, "E": 0})


def _safeguard_signature():
    return Signature(frozenset({"Sor", "Sos", "SorEc", "SorNotEc", "NEc"}), {},
                     {"IsFormulaOf": 2, "Eq": 2, "IsSafeback": 1})


@pytest.fixture
def five(fixtures):
    names, sig = load_named_outputs(fixtures / "ethics_outputs.json")
    return names, load_constraint(fixtures / "ethics_constraint.json", sig), sig


@pytest.fixture
def grounded(fixtures):
    names, sig = load_named_outputs(fixtures / "ethics_grounded_outputs.json")
    return names, load_constraint(fixtures / "ethics_grounded_constraint.json", sig), sig


def test_entailed_constraint_is_safe():
    assert check_ethical_safety([A], EthicalConstraint(A))


def test_direct_violation():
    verdict = check_ethical_safety([Not(A)], EthicalConstraint(A))
    assert not verdict
    assert verdict.core == (Not(A),)


def test_violation_through_closure():
    rule = Implies(A, Not(E))
    verdict = check_ethical_safety([rule, A], EthicalConstraint(E))
    assert not verdict
    assert set(verdict.core) == {rule, A}


def test_grounded_witness(grounded):
    names, ec, sig = grounded
    verdict = check_ethical_safety(list(names.values()), ec, sig=sig)
    assert not verdict
    assert verdict.witness == ("bob", "t1")
    assert format_formula(verdict.instance) == "~Harm(bob, t1)"
    assert {format_formula(f) for f in verdict.core} == {"Advise(bob, t1)", "Risky(bob)",
                                                        "forall x. Advise(x, t1) & Risky(x) -> Harm(x, t1)"}


def test_constraint_validation():
    x = parse_formula("~Harm(x)", Signature(frozenset({"ann"}), {}, {"Harm": 1}))
    with pytest.raises(ConstraintError):
        EthicalConstraint(x)
    with pytest.raises(ConstraintError):
        EthicalConstraint(x, ("x",), {("ann", "t1"): ("ann", "extra")})
    with pytest.raises(ConstraintError):
        EthicalConstraint(x, ("x",), {("ann", "t1"): ("ann",)}, objects=("ann", "bo"), times=("t1",))


def test_hypergraph_of_fixture(five):
    names, ec, sig = five
    h = build_violation_hypergraph(None, ec, names=names, sig=sig)
    assert [sorted(e) for e in h.sorted_edges()] == [["p2"], ["p3", "p4"]]
    assert frozenset({"p1", "p2"}) not in h.hyperedges


def test_no_conflicts_gives_no_edges():
    names = {"p1": A, "p2": Atom("B")}
    h = build_violation_hypergraph(None, EthicalConstraint(E), names=names, sig=LETTERS)
    assert h.hyperedges == [] and h.complete
    assert max_safe_subset(h) == ["p1", "p2"]


def test_unsatisfiable_constraint_rejected():
    with pytest.raises(ConstraintError):
        build_violation_hypergraph([A], EthicalConstraint(parse_formula("E & ~E", LETTERS)), sig=LETTERS)


def test_exact_and_greedy_on_fixture(five):
    names, ec, sig = five
    h = build_violation_hypergraph(None, ec, names=names, sig=sig)
    assert max_safe_subset(h, "exact") == ["p1", "p3", "p5"]
    greedy = max_safe_subset(h, "greedy")
    assert len(greedy) == 3 and h.independent(greedy)


def test_safeguard_on_fixture(five):
    names, ec, sig = five
    result = inject_safeguard(None, ec, sig, names=names)
    assert result.safe_subset == ("p1", "p3", "p5")
    assert result.rejected == ("p2", "p4")
    assert [format_formula(f) for f in result.augmented_output] == ["A", "B", "C", "IsSafeback(NEc)"]
    assert check_ethical_safety(list(result.augmented_output), ec, sig=sig)
    assert format_formula(result.route("p2")) == "IsSafeback(NEc)"
    assert result.route("p3") == names["p3"]
    text = format_formula(result.safeguard_formula)
    assert text == (
        "forall r. IsFormulaOf(r, Sor) -> exists s. IsFormulaOf(s, Sos) & (IsFormulaOf(r, SorEc) -> Eq(s, r))"
        " & (IsFormulaOf(r, SorNotEc) -> Eq(s, IsSafeback(NEc)))")
    assert parse_formula(text, _safeguard_signature()) == result.safeguard_formula


def test_all_safe_input_keeps_everything():
    names = {"p1": A, "p2": Atom("B")}
    result = inject_safeguard(None, EthicalConstraint(E), LETTERS, names=names)
    assert result.rejected == ()
    assert [format_formula(f) for f in result.augmented_output] == ["A", "B", "IsSafeback(NEc)"]


def test_fresh_names_on_collision(five):
    names, ec, sig = five
    clash = Signature(frozenset({"NEc"}), {}, dict(sig.predicates))
    result = inject_safeguard(None, ec, clash, names=names)
    assert result.symbols["NEc"] == "NEc_1"
    assert format_formula(result.marker) == "IsSafeback(NEc_1)"
    assert result.safe_subset == ("p1", "p3", "p5")


def test_grounded_safeguard(grounded):
    names, ec, sig = grounded
    result = inject_safeguard(None, ec, sig, names=names)
    assert len(result.safe_subset) == 4
    assert check_ethical_safety(list(result.augmented_output), ec, sig=sig)


def test_too_large_for_exact():
    sig = Signature(frozenset(), {}, {f"A{i}": 0 for i in range(26)} | {"E": 0})
    names = {f"p{i:02d}": Atom(f"A{i}") for i in range(26)}
    h = build_violation_hypergraph(None, EthicalConstraint(E), names=names, sig=sig)
    with pytest.raises(TooLargeForExact):
        max_safe_subset(h, "exact")
    assert len(max_safe_subset(h, "greedy")) == 26


def test_edges_beyond_cap_are_found_lazily():
    sig = Signature(frozenset(), {}, {"A": 0, "B": 0, "C": 0, "E": 0})
    p = lambda t: parse_formula(t, sig)  # noqa: E731
    names = {"p1": p("A"), "p2": p("B"), "p3": p("C"), "p4": p("A & B & C -> ~E")}
    h = build_violation_hypergraph(None, EthicalConstraint(p("E")), k_max=2, names=names, sig=sig)
    assert h.hyperedges == [] and not h.complete
    pick = max_safe_subset(h)
    assert len(pick) == 3
    assert frozenset(names) in h.hyperedges


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False))
def test_exact_matches_brute_force(rng):
    names, data, sig = random_ethics_instance(rng, rng.randint(1, 7))
    ec = constraint_from_json(data, sig)
    h = build_violation_hypergraph(None, ec, names=names, sig=sig)
    exact = max_safe_subset(h, "exact")
    greedy = max_safe_subset(h, "greedy")
    formulas = list(names.values())
    instances = [f for _, f in ec.instances()]
    best = brute_force_safe_size(formulas, instances)
    assert len(exact) == best == brute_force_max_safe(formulas, ec, sig=sig)
    assert len(greedy) <= len(exact)
    assert h.independent(exact) and h.independent(greedy)
    assert check_ethical_safety(h.formulas(exact), ec, sig=sig)
    assert check_ethical_safety(h.formulas(greedy), ec, sig=sig)


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_subsets_of_safe_sets_are_safe(rng):
    names, data, sig = random_ethics_instance(rng, rng.randint(2, 6))
    ec = constraint_from_json(data, sig)
    h = build_violation_hypergraph(None, ec, names=names, sig=sig)
    exact = max_safe_subset(h)
    for _ in range(5):
        sub = [n for n in exact if rng.random() < 0.5]
        assert check_ethical_safety(h.formulas(sub), ec, sig=sig)


def test_seeded_instances_repeat():
    a = random_ethics_instance(random.Random(1), 5)
    b = random_ethics_instance(random.Random(1), 5)
    assert a[0] == b[0] and a[1] == b[1]
