"""Build a synthetic platform over a small census and look at its texture.

Walks through the two generator stages: drawing the user universe under an
inclusion design, then simulating a month of tweets.
"""

import numpy as np

from samplab import census, worldgen

# A 12-state census of one million persons with varied demographics.
table = census.synthetic_table(12, 1_000_000, seed=7)
print(f"census: {len(table.geo_units())} states, {table.total():,} persons")

# Older and male persons join the platform at different rates here, so the
# platform population is a biased draw from the census.
design = worldgen.InclusionDesign(
    kind="loglinear_age_gender",
    base_rate=0.03,
    age_effects=(1.0, 2.5, 2.0, 0.8),
    gender_effects=(1.0, 0.7),
)
world = worldgen.build_world(table, design, seed=7)
print(f"platform: {len(world):,} users "
      f"({100 * len(world) / table.total():.2f}% of the census)")

by_age = {}
for u in world:
    by_age[u.true_age] = by_age.get(u.true_age, 0) + 1
print("users by age bracket:", by_age)

activity = np.array([u.activity_rate for u in world])
print(f"activity rate: median {np.median(activity):.2f}/day, "
      f"p99 {np.percentile(activity, 99):.1f}/day (heavy tail)")

friends = np.array([u.friends for u in world])
print(f"users at the 5000-friend cap: {(friends == 5000).sum():,}")

stream = worldgen.simulate_month(world, ("2022-09-07", "2022-10-08"), seed=7)
print(f"\none month of activity: {len(stream):,} tweets")
placed = (stream.place == "US").mean()
coords = (~np.isnan(stream.lat)).mean()
print(f"place-tagged: {100 * placed:.1f}%, with coordinates: {100 * coords:.1f}%")
print(f"likes on early vs late tweets (batch read at window end): "
      f"{stream.likes[:len(stream)//3].mean():.2f} vs "
      f"{stream.likes[-len(stream)//3:].mean():.2f}")
