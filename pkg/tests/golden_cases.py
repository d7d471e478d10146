"""Golden report cases: one CLI invocation per shipped fixture.

Run this file directly to rewrite the stored reports after an intended
change in output:  python3 tests/golden_cases.py
"""

import io
import sys
from pathlib import Path

from mltmf.cli import run

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "mltmf" / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

CASES = {
    "check_self_application": (2, ["check", "--sig", "signature.json", "P(P(x))"]),
    "check_random": (0, ["check", "--random", "50"]),
    "entail_socrates": (0, ["entail", "--problem", "entail_problem.json"]),
    "consistency_core": (1, ["consistency", "--problem", "inconsistent_facts.json"]),
    "sextuple_noiseless": (0, ["sextuple", "shannon_noiseless.json"]),
    "sextuple_reduce": (0, ["sextuple", "shannon_noiseless.json", "--reduce"]),
    "noise_shannon": (0, ["noise", "shannon_noisy.json"]),
    "automaton_parity": (0, ["automaton", "parity_automaton.json", "--initial", "even", "--word", "1,0,1"]),
    "automaton_mutated": (1, ["automaton", "parity_automaton.json", "--initial", "even", "--word", "1,0,1",
                              "--mutate", "random"]),
    "learn_union": (0, ["learn", "--learner", "union_learner.json", "--data", "union_data.json"]),
    "learn_gradient": (0, ["learn", "--rule", "gradient", "--learner", "toy_model.json", "--data", "toy_data.json"]),
    "learn_momentum": (0, ["learn", "--rule", "gradient", "--learner", "toy_momentum_model.json",
                           "--data", "toy_data.json"]),
    "process_predict": (0, ["process", "--rule", "gradient", "--model", "toy_predictor.json",
                            "--query", "toy_query.json"]),
    "process_query": (0, ["process", "--model", "union_learner.json", "--query", "query_input.json"]),
    "ethics_safeguard": (0, ["ethics", "--formulas", "ethics_outputs.json", "--constraint", "ethics_constraint.json",
                             "--mode", "exact"]),
    "ethics_filter_greedy": (0, ["ethics", "--formulas", "ethics_outputs.json", "--constraint",
                                 "ethics_constraint.json", "--mode", "greedy", "--action", "filter"]),
    "ethics_grounded_safety": (1, ["ethics", "--formulas", "ethics_grounded_outputs.json", "--constraint",
                                   "ethics_grounded_constraint.json", "--action", "safety"]),
    "genbound_exact": (0, ["genbound", "--model", "genbound_model.json", "--query", "genbound_query.json",
                           "--exact"]),
    "genbound_bits": (0, ["genbound", "--model", "genbound_model.json", "--query", "genbound_query.json",
                          "--log-base", "2"]),
    "genbound_subset": (0, ["genbound", "--model", "genbound_subset_model.json", "--query", "genbound_query.json"]),
    "genbound_uniform": (0, ["genbound", "--model", "genbound_model.json", "--query",
                             "genbound_uniform_query.json"]),
    "interpret_bundle": (0, ["interpret", "interpret_bundle.json"]),
}

_PATH_FLAGS = {"--sig", "--problem", "--learner", "--data", "--model", "--query", "--formulas", "--constraint"}


def argv_for(name):
    """Arguments with fixture file names resolved, plus JSON output."""
    argv = list(CASES[name][1])
    out = []
    for i, a in enumerate(argv):
        prev = argv[i - 1] if i else None
        if a.endswith(".json") and (prev in _PATH_FLAGS or i == 1):
            a = str(FIXTURES / a)
        out.append(a)
    return out + ["--format", "json"]


def render(name):
    buf = io.StringIO()
    code = run(argv_for(name), buf)
    return code, buf.getvalue()


def update():
    GOLDEN.mkdir(exist_ok=True)
    for name in CASES:
        code, text = render(name)
        (GOLDEN / f"{name}.json").write_text(text)
        print(f"{name}: exit {code}")


if __name__ == "__main__":
    sys.exit(update())
