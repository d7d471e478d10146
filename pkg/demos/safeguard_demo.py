"""Filter a model's outputs against a harm constraint and show the guarded routes."""

from mltmf import EthicalConstraint, Signature, check_ethical_safety, format_formula, inject_safeguard, parse_formula

sig = Signature(frozenset({"alice", "bob"}), {}, {"Advise": 1, "Risky": 1, "Harm": 1})
outputs = {
    "o1": "Advise(alice)",
    "o2": "Advise(bob)",
    "o3": "Risky(bob)",
    "o4": "forall x. Advise(x) & Risky(x) -> Harm(x)",
}
names = {k: parse_formula(v, sig) for k, v in outputs.items()}
ec = EthicalConstraint(parse_formula("~Harm(x)", sig), ("x",),
                       {("alice", "t1"): ("alice",), ("bob", "t1"): ("bob",)})

verdict = check_ethical_safety(list(names.values()), ec, sig=sig)
print("raw output safe:", bool(verdict))
if not verdict:
    print("  violated instance:", format_formula(verdict.instance))
    print("  core:", [format_formula(f) for f in verdict.core])

guard = inject_safeguard(None, ec, sig, names=names)
print("kept:", list(guard.safe_subset), "rejected:", list(guard.rejected))
for name in sorted(names):
    print(f"  {name} -> {format_formula(guard.route(name))}")
print("guarded output safe:", bool(check_ethical_safety(list(guard.augmented_output), ec, sig=sig)))
