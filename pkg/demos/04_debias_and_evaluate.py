"""Estimate the true population from a biased platform sample.

Fits the five regression specs on a (state x age x gender) design table
and scores them by leave-one-state-out cross-validation. Models that see
the joint demographic counts undo the inclusion bias; the total-count
baseline cannot.
"""

import math

from samplab import census, debias, evaluate, inference, worldgen
from samplab.rng import substream

table = census.synthetic_table(50, 1_000_000, seed=3,
                               age_alpha=(1.5,) * 4, male_range=(0.3, 0.7))
states = table.geo_units()

# Log-linear inclusion with 4x age spread, 2x gender spread, and a little
# per-state penetration noise.
rng = substream(3, "demo-state-effects")
delta = rng.normal(0, 0.08, size=len(states))
pi = {
    f"{a}|{g}|{s}": 0.02 * (1, 2, 3, 4)[ai] * (1.0, 2.0)[gi] * math.exp(d)
    for ai, a in enumerate(census.AGE_BRACKETS)
    for gi, g in enumerate(census.GENDERS)
    for s, d in zip(states, delta)
}
world = worldgen.build_world(
    table, worldgen.InclusionDesign(kind="arbitrary_table", table=pi), seed=3)
labeled = [inference.LabeledUser(user=u, age=u.true_age, gender=u.true_gender,
                                 org=u.is_org, state=u.true_state) for u in world]
design = debias.build_design(labeled, table)
print(f"{len(world):,} users -> design table with {len(design.rows)} rows "
      f"({design.dropped_rows} zero rows dropped)\n")

print("estimated inclusion probabilities by cell:")
for est in debias.inclusion_probabilities(design):
    print(f"  {est.age:>6} {est.gender}: {est.pi_hat:.4f} "
          f"[{est.ci[0]:.4f}, {est.ci[1]:.4f}]")

print(f"\n{'model':>14} {'LOSO MAPE':>10} {'se':>6}")
for spec in debias.MODEL_SPECS:
    report = evaluate.loso_cv(design, spec)
    print(f"{spec:>14} {report.mape:>9.2f}% {report.se:>6.2f}")
