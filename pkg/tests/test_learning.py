import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import event, injective_sextuple, random_fact_states, random_toy_case
from mltmf.errors import NotLearnable, NotProcessable
from mltmf.info import check_enabling_map, make_state
from mltmf.learning import (
    FactQueryRule,
    FactUnionRule,
    ToyData,
    ToyGradientRule,
    ToyModelState,
    apply_learn,
    apply_process,
    can_learn,
    can_process,
    check_inheritance,
    check_time_order,
    data_from_json,
    decode_number,
    encode_number,
    finite_difference_gradient,
    learn_information,
    model_from_json,
    mse_gradient,
    rule_formula,
    state_from_data,
    state_from_model,
)
from mltmf.logic import Atom, Const, Signature, format_formula

LETTERS = Signature(frozenset(), {}, {"A": 0, "B": 0})


def letters(name, *texts):
    return make_state(name, texts, LETTERS, realization=None)


def load(fixtures, name):
    return json.loads((fixtures / name).read_text())


def test_union_learns_consistent_sets():
    sx, sy = letters("Kb", "A"), letters("News", "B")
    assert can_learn(FactUnionRule(), sx, sy)
    out = apply_learn(FactUnionRule(), sx, sy)
    assert out.name == "Kb_1"
    assert out.formulas == {Atom("A"), Atom("B"), rule_formula("Kb_1", "union")}
    assert check_inheritance(sx, out, FactUnionRule())


def test_union_refuses_contradiction():
    sx, sy = letters("Kb", "A"), letters("News", "~A")
    assert not can_learn(FactUnionRule(), sx, sy)
    with pytest.raises(NotLearnable):
        apply_learn(FactUnionRule(), sx, sy)


def test_deleting_rule_formula_breaks_inheritance():
    sx, sy = letters("Kb", "A"), letters("News", "B")
    out = apply_learn(FactUnionRule(), sx, sy)
    mutant = out.replace(formulas=out.formulas - {rule_formula(out.name, "union")})
    assert not check_inheritance(out, mutant, FactUnionRule())


def test_chained_learning_keeps_inheriting():
    rule = FactUnionRule()
    first = apply_learn(rule, letters("Kb", "A"), letters("News", "B"))
    second = apply_learn(rule, first, letters("More", "A | B"))
    assert second.name == "Kb_2"
    assert check_inheritance(first, second, rule)
    assert first.formulas <= second.formulas


def test_rule_formula_text():
    text = format_formula(rule_formula("Kb", "union"))
    assert text == ("IsSubsetOf(Phi_Kb, Kb) & IsSubsetOf(Psi_Kb, Data_Kb) & Learnable_union(Phi_Kb, Psi_Kb)"
                    " -> IsFormulaOf(phi_Kb, Next_Kb) & Eq(phi_Kb, flearn_union(Phi_Kb, Psi_Kb))")


def test_time_order():
    order = ["t1", "t2", "t3"]
    assert check_time_order(["t1", "t2"], ["t2"], order)
    assert not check_time_order(["t3"], ["t2"], order)
    with pytest.raises(ValueError):
        apply_learn(FactUnionRule(), letters("Kb", "A").replace(times=("t3",)),
                    letters("News", "B").replace(times=("t1",)), times=("t1",), time_order=order)


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_union_preserves_consistency_and_inherits(rng):
    sx, sy = random_fact_states(rng)
    rule = FactUnionRule()
    assert can_learn(rule, sx, sy)
    out = apply_learn(rule, sx, sy)
    assert out.consistency()
    assert check_inheritance(sx, out, rule)
    assert sx.formulas <= out.formulas


def test_learning_on_both_sides():
    a = injective_sextuple("o", [event(0)])
    b = injective_sextuple("n", [event(1)], first_code=1)
    learned = learn_information(FactUnionRule(), a, b)
    assert check_enabling_map(learned.enabling).recoverable
    assert check_inheritance(a.carrier_state, learned.carrier_state, FactUnionRule())


def test_gradient_step(fixtures):
    model = model_from_json(load(fixtures, "toy_model.json"))
    data = data_from_json(load(fixtures, "toy_data.json"))
    rule = ToyGradientRule()
    assert mse_gradient(model, data) == (2,)
    assert rule.step(model, data).params == (Fraction(4, 5),)
    out = apply_learn(rule, state_from_model("Mo", model), state_from_data("Train", data))
    assert Atom("Param", (Const("w_1_1"), Const("num_4_5"))) in out
    assert check_inheritance(None, out, rule)


def test_gradient_step_with_momentum(fixtures):
    model = model_from_json(load(fixtures, "toy_momentum_model.json"))
    data = data_from_json(load(fixtures, "toy_data.json"))
    assert ToyGradientRule().step(model, data).params == (Fraction(3, 4),)


def test_dimension_mismatch_blocks_learning():
    model = ToyModelState(((1, 2),), None, Fraction(1, 10))
    data = ToyData((((1,), (0,)),))
    sx, sy = state_from_model("Mo", model), state_from_data("Train", data)
    assert not can_learn(ToyGradientRule(), sx, sy)
    assert can_learn(ToyGradientRule(), sx, state_from_data("Train", ToyData((((1, 1), (0,)),))))


def test_activation_domain_gates_learning():
    model = ToyModelState(((1,),), None, Fraction(1, 10), activations=("log",))
    sx = state_from_model("Mo", model)
    assert not can_learn(ToyGradientRule(), sx, state_from_data("D", ToyData((((-1,), (0,)),))))
    assert can_learn(ToyGradientRule(), sx, state_from_data("D", ToyData((((2,), (0,)),))))


@pytest.mark.parametrize("exact, tol", [(True, 1e-9), (False, 1e-6)])
def test_gradient_matches_finite_differences(exact, tol):
    rng = random.Random(4)
    for _ in range(50):
        model, data = random_toy_case(rng, exact)
        assert len(model.params) <= 4
        fd = finite_difference_gradient(model, data)
        for g, d in zip(mse_gradient(model, data), fd):
            assert abs(float(g) - float(d)) <= tol
        new = ToyGradientRule().step(model, data)
        grad = mse_gradient(model, data)
        for t_new, t, g, v in zip(new.params, model.params, grad, model.velocity):
            assert abs(float(t_new - (t - model.lr * (g + model.momentum * v)))) <= tol


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_gradient_learning_inherits(rng):
    model, data = random_toy_case(rng)
    rule = ToyGradientRule()
    out = apply_learn(rule, state_from_model("Mo", model), state_from_data("Train", data))
    assert check_inheritance(None, out, rule)
    again = ToyModelState.from_formulas(out.formulas)
    assert again.params == rule.step(model, data).params


def test_number_encoding_round_trip():
    for x in (7, -3, Fraction(4, 5), Fraction(-1, 2), 0.75, -2.5, 3.0):
        assert decode_number(encode_number(x)) == x
    assert encode_number(Fraction(4, 5)) == "num_4_5"
    assert encode_number(0.75) == "num_0p75"


def test_linear_prediction(fixtures):
    model = model_from_json(load(fixtures, "toy_predictor.json"))
    query = data_from_json(load(fixtures, "toy_query.json"))
    su, sq = state_from_model("Mo", model), state_from_data("Q", query, with_labels=False)
    assert can_process(ToyGradientRule(), su, sq)
    out = apply_process(ToyGradientRule(), su, sq)
    assert out.texts() == ["Prediction(s1, y1, num_7)"]


def test_process_gates():
    rule = ToyGradientRule()
    model = ToyModelState(((2,),), (1,), Fraction(1, 10))
    su = state_from_model("Mo", model)
    wide = state_from_data("Q", ToyData((((1, 2), ()),)), with_labels=False)
    assert not rule.process_gate(su.formulas, wide.formulas)["input_match"]
    headless = su.replace(formulas=frozenset(f for f in su.formulas if "L2" not in format_formula(f)))
    q = state_from_data("Q", ToyData((((3,), ()),)), with_labels=False)
    assert rule.process_gate(headless.formulas, q.formulas)["output_defined"] is False
    with pytest.raises(NotProcessable):
        apply_process(rule, headless, q)


def test_query_rule_answers_and_falls_back():
    sig = Signature(frozenset({"rex"}), {}, {"Dog": 1, "Cat": 1, "Unknown": 1})
    su = make_state("Kb", ["Dog(rex)"], sig)
    assert apply_process(FactQueryRule(), su, make_state("Q", ["Dog(rex)"], sig)).texts() == ["Dog(rex)"]
    out = apply_process(FactQueryRule(), su, make_state("Q", ["Cat(rex)", "Dog(rex)"], sig))
    assert out.texts() == ["Dog(rex)", "Unknown(query_1)"]
