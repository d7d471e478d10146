"""Command line front end.

Every subcommand reads JSON or formula text, runs one operation and prints
a report.  Exit codes: 0 success, 1 negative verdict, 2 usage or input
error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import replace
from pathlib import Path

from . import automaton as am
from . import ethics as eth
from . import genbound as gb
from . import info
from . import learning as lrn
from .errors import BudgetExceeded, MltmfError, SelfApplicationError, TooLargeForExact
from .logic import Signature, format_formula, load_signature, parse_formula, parse_unchecked, validate_wff
from .sampling import DEFAULT_SIGNATURE, random_wff, self_application_mutant
from .semantics import DEFAULT_BUDGET, check_consistency, entails

SCHEMA = "mltmf.report/1"
DEFAULT_SEED = 0

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    """Bad file contents or arguments detected by the front end."""


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _signature(args, data=None) -> Signature:
    if getattr(args, "sig", None):
        return load_signature(args.sig)
    if data is not None and "signature" in data:
        return Signature.from_json(data["signature"])
    raise InputError("a signature is required (--sig or a 'signature' key)")


def _budget(args):
    b = DEFAULT_BUDGET
    if args.budget_ho_domain is not None:
        b = replace(b, max_domain_for_ho=args.budget_ho_domain)
    if args.budget_atoms is not None:
        b = replace(b, max_ground_atoms=args.budget_atoms)
    return b


def _texts(fs):
    return [format_formula(f) for f in sorted(fs, key=format_formula)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check(args):
    if args.random:
        rng = random.Random(args.seed)
        failures = []
        for i in range(args.random):
            f = random_wff(rng)
            text = format_formula(f)
            if parse_formula(text, DEFAULT_SIGNATURE) != f:
                failures.append(text)
        rejected = 0
        for i in range(args.random):
            m = format_formula(self_application_mutant(rng, random_wff(rng)))
            try:
                parse_formula(m, DEFAULT_SIGNATURE)
                failures.append(m)
            except SelfApplicationError:
                rejected += 1
        result = {"round_trips": args.random, "mutants_rejected": rejected, "failures": failures}
        if failures:
            result["reasons"] = ["ROUND_TRIP_FAILED"]
        return (EXIT_NEGATIVE if failures else EXIT_OK), result
    if not args.formulas:
        raise InputError("give formulas to check or --random N")
    sig = _signature(args)
    checked = []
    code = EXIT_OK
    for text in args.formulas:
        f = parse_unchecked(text, sig)
        report = validate_wff(f, sig)
        entry = {"input": text, "formula": format_formula(f), "valid": report.ok,
                 "findings": [x.to_json() for x in report.findings]}
        if not report.ok:
            code = EXIT_INPUT
            entry["reasons"] = sorted({_finding_reason(x.kind) for x in report.findings})
        checked.append(entry)
    return code, {"formulas": checked}


def _finding_reason(kind):
    return {"self_application": "SELF_APPLICATION", "arity": "ARITY",
            "unknown_symbol": "UNKNOWN_SYMBOL"}.get(kind, "INVALID_FORMULA")


def _problem(args):
    data = _read_json(args.problem) if args.problem else {}
    sig = _signature(args, data)
    return data, sig


def cmd_entail(args):
    data, sig = _problem(args)
    premises = list(data.get("premises", [])) + list(args.premise or [])
    goal = args.goal or data.get("goal")
    if goal is None:
        raise InputError("no goal given")
    ps = [parse_formula(t, sig) for t in premises]
    g = parse_formula(goal, sig)
    ok = entails(ps, g, sig, budget=_budget(args))
    result = {"premises": _texts(ps), "goal": format_formula(g), "entailed": ok}
    if not ok:
        result["reasons"] = ["NOT_ENTAILED"]
    return (EXIT_OK if ok else EXIT_NEGATIVE), result


def cmd_consistency(args):
    data, sig = _problem(args)
    texts = list(data.get("formulas", [])) + list(args.formula or [])
    fs = [parse_formula(t, sig) for t in texts]
    verdict = check_consistency(fs, sig, budget=_budget(args))
    result = verdict.to_json()
    if not verdict.consistent:
        result["reasons"] = ["INCONSISTENT"]
    return (EXIT_OK if verdict.consistent else EXIT_NEGATIVE), result


def cmd_sextuple(args):
    sx = info.load_sextuple(args.file)
    report = info.check_enabling_map(sx.enabling)
    result = {"sextuple": sx.to_json(), "report": report.to_json()}
    if args.reduce:
        q = info.recoverable_reduction(sx.enabling)
        result["reduction"] = q.to_json()
    if not report.recoverable:
        result["reasons"] = ["NOT_RECOVERABLE"]
    return (EXIT_OK if report.recoverable else EXIT_NEGATIVE), result


def cmd_noise(args):
    bundle = info.load_noisy_bundle(args.file)
    composed = info.compose_noisy(bundle.clean.ontological_state, bundle.noise)
    matches = composed == bundle.noisy.ontological_state
    symmetric = info.check_noisy_symmetry(bundle.clean, bundle.noisy)
    reasons = []
    if not matches:
        reasons.append("NOISY_STATE_MISMATCH")
    if not symmetric:
        reasons.append("NOT_SYMMETRIC")
    result = {"noise": bundle.noise.to_json(), "composed": composed.texts(), "matches_documented": matches,
              "symmetric": symmetric, "clean_report": bundle.clean.report().to_json(),
              "noisy_report": bundle.noisy.report().to_json()}
    if reasons:
        result["reasons"] = reasons
    return (EXIT_NEGATIVE if reasons else EXIT_OK), result


def cmd_automaton(args):
    data = _read_json(args.file)
    m = am.FiniteAutomaton.from_json(data)
    initial = args.initial or data.get("initial")
    word = args.word.split(",") if args.word is not None else data.get("word")
    if initial is None or word is None:
        raise InputError("an initial state and an input word are required")
    if word == [""]:
        word = []
    e = am.encode_automaton(m, initial, word)
    if args.mutate:
        kinds = am.mutation_kinds(e)
        kind = args.mutate if args.mutate != "random" else random.Random(args.seed).choice(kinds)
        if kind not in kinds:
            raise InputError(f"mutation {kind!r} not applicable; choose from {kinds}")
        e = am.mutate(e, kind, random.Random(args.seed))
    budget = _budget(args)
    ok = am.verify_trace(e, budget)
    result = {"initial": initial, "word": list(word), "states": list(e.trace.states),
              "outputs": list(e.trace.outputs), "formulas": _texts(e.formulas), "verified": ok,
              "recognized": am.recognize_automaton(e.state_set) is not None}
    if args.mutate:
        result["mutation"] = kind
    if not ok:
        result["failing"] = list(am.failing_formulas(e, budget))
        result["reasons"] = ["TRACE_NOT_VERIFIED"]
    return (EXIT_OK if ok else EXIT_NEGATIVE), result


def _load_state(path):
    data = _read_json(path)
    name = data.get("name", Path(path).stem)
    if "weights" in data:
        return lrn.state_from_model(name, lrn.model_from_json(data), tuple(data.get("times", ("t1",))))
    if "samples" in data:
        samples_have_labels = all("y" in s for s in data["samples"])
        return lrn.state_from_data(name, lrn.data_from_json(data), tuple(data.get("times", ("t1",))),
                                   with_labels=samples_have_labels)
    sig = _signature(argparse.Namespace(sig=None), data)
    return info.state_from_json(data, sig, Path(path).parent)


def _state_json(s):
    out = {"name": s.name, "formulas": s.texts(), "times": list(s.times), "objects": list(s.objects)}
    return out


def cmd_learn(args):
    rule = lrn.RULES[args.rule]()
    sx, sy = _load_state(args.learner), _load_state(args.data)
    if not lrn.can_learn(rule, sx, sy):
        return EXIT_NEGATIVE, {"learnable": False, "reasons": ["NOT_LEARNABLE"]}
    out = lrn.apply_learn(rule, sx, sy, args.name)
    inherits = lrn.check_inheritance(sx, out, rule)
    result = {"learnable": True, "result": _state_json(out), "inherits_rule": inherits}
    if not inherits:
        result["reasons"] = ["RULE_NOT_INHERITED"]
    return (EXIT_OK if inherits else EXIT_NEGATIVE), result


def cmd_process(args):
    rule = lrn.PROCESS_RULES[args.rule]()
    su, sq = _load_state(args.model), _load_state(args.query)
    if not lrn.can_process(rule, su, sq):
        return EXIT_NEGATIVE, {"processable": False, "reasons": ["NOT_PROCESSABLE"]}
    out = lrn.apply_process(rule, su, sq, args.name)
    return EXIT_OK, {"processable": True, "result": _state_json(out)}


def _output_formulas(data, sig):
    raw = data.get("formulas", [])
    if isinstance(raw, dict):
        return {k: parse_formula(v, sig) for k, v in raw.items()}
    return eth.name_vertices([parse_formula(t, sig) for t in raw])


def cmd_ethics(args):
    data = _read_json(args.formulas)
    sig = _signature(args, data)
    names = _output_formulas(data, sig)
    ec = eth.constraint_from_json(_read_json(args.constraint), sig)
    budget = _budget(args)
    verdict = eth.check_ethical_safety(list(names.values()), ec, budget, sig)
    vj = verdict.to_json()
    if not verdict.safe:
        by_text = {format_formula(f): n for n, f in names.items()}
        vj["core_names"] = sorted(by_text[format_formula(f)] for f in verdict.core)
    result = {"input_safety": vj}
    if args.action == "safety":
        if not verdict.safe:
            result["reasons"] = ["UNSAFE"]
        return (EXIT_OK if verdict.safe else EXIT_NEGATIVE), result
    sg = eth.inject_safeguard(None, ec, sig, args.mode, args.kmax, budget, names)
    result["hypergraph"] = sg.hypergraph.to_json()
    result["mode"] = args.mode
    result["safe_subset"] = list(sg.safe_subset)
    result["rejected"] = list(sg.rejected)
    if args.action == "safeguard":
        result["safeguard"] = sg.to_json()
    return EXIT_OK, result


def cmd_genbound(args):
    exact = args.exact
    query = gb.load_distribution(args.query, exact)
    model_data = _read_json(args.model)
    s_ou = frozenset(model_data) if isinstance(model_data, list) else frozenset(
        model_data.get("support", model_data.get("mass", {})))
    overlap_mass = None
    if args.strict:
        if isinstance(model_data, list) or "mass" not in model_data:
            raise InputError("strict mode needs model masses")
        overlap_mass = model_data["mass"]
    base = 2 if args.log_base == "2" else None
    report = gb.generalization_bound(s_ou, None, query, base, args.strict, overlap_mass)
    return EXIT_OK, {"exact": exact, **report.to_json()}


def _rule_for(name):
    if name in lrn.PROCESS_RULES:
        return lrn.PROCESS_RULES[name]()
    raise InputError(f"unknown process rule {name!r}")


def cmd_interpret(args):
    path = Path(args.file)
    data = _read_json(path)
    sig = Signature.from_json(data["signature"]) if "signature" in data else None
    parts = [info.sextuple_from_json(data[k], sig, path.parent) for k in ("model", "input", "output")]
    rule = _rule_for(args.rule or data.get("rule", "query"))
    verdict = info.check_interpretability(*parts, rule, _budget(args))
    return (EXIT_OK if verdict.interpretable else EXIT_NEGATIVE), verdict.to_json()


# ---------------------------------------------------------------------------
# parser and output
# ---------------------------------------------------------------------------


def _positive(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--budget-ho-domain", type=_positive, default=None,
                        help="largest domain for higher-order quantifiers")
    common.add_argument("--budget-atoms", type=_positive, default=None,
                        help="largest number of ground atoms per satisfiability check")

    p = argparse.ArgumentParser(prog="mltmf", description="Formula, information and safety checks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="parse and validate formulas")
    s.add_argument("formulas", nargs="*")
    s.add_argument("--sig")
    s.add_argument("--random", type=_positive, help="round-trip N random formulas instead")
    s.set_defaults(func=cmd_check)

    for name, func, extra in (("entail", cmd_entail, "premise"), ("consistency", cmd_consistency, "formula")):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--problem", help="JSON file with signature and formulas")
        s.add_argument("--sig")
        s.add_argument(f"--{extra}", action="append")
        if name == "entail":
            s.add_argument("--goal")
        s.set_defaults(func=func)

    s = sub.add_parser("sextuple", parents=[common], help="enabling mapping report")
    s.add_argument("file")
    s.add_argument("--reduce", action="store_true")
    s.set_defaults(func=cmd_sextuple)

    s = sub.add_parser("noise", parents=[common], help="compose noise and check symmetry")
    s.add_argument("file")
    s.set_defaults(func=cmd_noise)

    s = sub.add_parser("automaton", parents=[common], help="encode, simulate and verify a run")
    s.add_argument("file")
    s.add_argument("--initial")
    s.add_argument("--word", help="comma separated input symbols")
    s.add_argument("--mutate", help=f"one of {', '.join(am.MUTATIONS)} or 'random'")
    s.set_defaults(func=cmd_automaton)

    s = sub.add_parser("learn", parents=[common])
    s.add_argument("--rule", choices=sorted(lrn.RULES), default="union")
    s.add_argument("--learner", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--name")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("process", parents=[common])
    s.add_argument("--rule", choices=sorted(lrn.PROCESS_RULES), default="query")
    s.add_argument("--model", required=True)
    s.add_argument("--query", required=True)
    s.add_argument("--name", default="Out")
    s.set_defaults(func=cmd_process)

    s = sub.add_parser("ethics", parents=[common], help="constraint safety and filtering")
    s.add_argument("--formulas", required=True)
    s.add_argument("--constraint", required=True)
    s.add_argument("--sig")
    s.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    s.add_argument("--kmax", type=_positive, default=3)
    s.add_argument("--action", choices=("safety", "filter", "safeguard"), default="safeguard")
    s.set_defaults(func=cmd_ethics)

    s = sub.add_parser("genbound", parents=[common], help="generalization bound")
    s.add_argument("--model", required=True)
    s.add_argument("--query", required=True)
    s.add_argument("--log-base", choices=("e", "2"), default="e")
    s.add_argument("--exact", action="store_true", help="rational arithmetic for masses")
    s.add_argument("--strict", action="store_true", help="use model masses on the overlap")
    s.set_defaults(func=cmd_genbound)

    s = sub.add_parser("interpret", parents=[common], help="interpretability of a model/input/output triple")
    s.add_argument("file")
    s.add_argument("--rule")
    s.set_defaults(func=cmd_interpret)
    return p


def _use_color(stream):
    return not os.environ.get("MLTMF_NO_COLOR") and hasattr(stream, "isatty") and stream.isatty()


def _paint(text, code, on):
    return f"\033[{code}m{text}\033[0m" if on else text


def _render_text(value, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k in sorted(value):
            v = value[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v) if not isinstance(v, str) else v}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_render_text(item, indent + 1))
            else:
                lines.append(f"{pad}- {item}")
    else:
        lines.append(f"{pad}{value}")
    return lines


_STATUS = {EXIT_OK: ("ok", "32"), EXIT_NEGATIVE: ("negative", "33"),
           EXIT_INPUT: ("input error", "31"), EXIT_BUDGET: ("budget exceeded", "35")}


def emit(command, code, result, fmt, stream):
    if fmt == "json":
        doc = {"schema": SCHEMA, "command": command, "exit_code": code, "result": result}
        stream.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return
    label, color = _STATUS[code]
    stream.write(f"{command}: {_paint(label, color, _use_color(stream))}\n")
    for line in _render_text(result):
        stream.write(line + "\n")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, result = args.func(args)
    except (BudgetExceeded, TooLargeForExact) as exc:
        code, result = EXIT_BUDGET, {"error": str(exc), "reasons": [exc.reason_code]}
    except MltmfError as exc:
        code, result = EXIT_INPUT, {"error": str(exc), "reasons": [exc.reason_code]}
    except (InputError, ValueError, KeyError, TypeError, OSError) as exc:
        msg = str(exc) if not isinstance(exc, KeyError) else f"missing key {exc}"
        code, result = EXIT_INPUT, {"error": msg, "reasons": ["INPUT"]}
    emit(args.command, code, result, args.format, stdout)
    return code


def main(argv=None):
    sys.exit(run(argv))
