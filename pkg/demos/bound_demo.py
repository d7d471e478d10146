"""How the generalization bound shrinks as the model covers more query states."""

from fractions import Fraction

from mltmf import FiniteDistribution, build_model_distribution, generalization_bound, tvd_oracle

labels = ("s1", "s2", "s3", "s4", "s5")
weights = (8, 6, 3, 2, 1)
q = FiniteDistribution(labels, {x: Fraction(w, 20) for x, w in zip(labels, weights)}, exact=True)

print(f"{'covered':<20}{'P(overlap)':>12}{'TVD':>10}{'bound':>10}  branch")
for k in range(1, len(labels) + 1):
    covered = set(labels[:k])
    report = generalization_bound(covered, None, q)
    tvd = tvd_oracle(q, build_model_distribution(covered, None, q))
    p = report.components["p_overlap"]
    print(f"{','.join(sorted(covered)):<20}{float(Fraction(p)):>12.3f}{float(tvd):>10.4f}"
          f"{report.bound:>10.4f}  {report.branch}")
