"""Encode a parity automaton run as formulas, verify it, then tamper with it."""

import random

from mltmf import FiniteAutomaton, encode_automaton, simulate, verify_trace
from mltmf.automaton import failing_formulas, mutate

m = FiniteAutomaton(
    ("even", "odd"), ("0", "1"), ("accept", "reject"),
    {("even", "0"): "even", ("even", "1"): "odd", ("odd", "0"): "odd", ("odd", "1"): "even"},
    {("even", "0"): "accept", ("even", "1"): "reject", ("odd", "0"): "reject", ("odd", "1"): "accept"},
    ("t1", "t2", "t3", "t4", "t5"),
)
word = "1101"
run = simulate(m, "even", word)
print("states:", " ".join(run.states))
print("outputs:", " ".join(run.outputs))

enc = encode_automaton(m, "even", word)
for text in enc.state_set.texts():
    print("  ", text)
print("trace verifies:", verify_trace(enc))

bad = mutate(enc, "output", random.Random(0))
print("after tampering with one output:", verify_trace(bad))
for text in failing_formulas(bad):
    print("  fails:", text)
