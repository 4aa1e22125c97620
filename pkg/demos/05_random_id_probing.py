"""Probe for accounts by generating candidate ids at random.

Batches mix 5 never-reused legacy 32-bit ids with 995 time-sortable ids
restricted to past timestamps. Against a desk-scale world the hit rate is
essentially zero (the 64-bit id space is sparse); a denser synthetic
oracle shows the estimator converging on the designed rate.
"""

from samplab import census, snowflake, worldgen
from samplab.io import to_ms

table = census.synthetic_table(10, 300_000, seed=5)
world = worldgen.build_world(table, worldgen.InclusionDesign(base_rate=0.3), seed=5)
print(f"world: {len(world):,} accounts")

sampler = snowflake.RandomIdSampler()
window = (to_ms("2011-01-01"), to_ms("2022-09-01"))
batches = [sampler.candidate_batch(seed, window) for seed in range(100)]
est = snowflake.estimate_hit_rate(batches, snowflake.world_oracle(world))
print(f"probing the world: {est.n_valid} hits in {est.n_generated:,} candidates "
      f"(rate {est.hit_rate:.2e}) - random ids rarely land on real accounts")


# A designed oracle where 1 in 1024 (machine, sequence) slots is taken:
def dense_oracle(raw):
    if raw < 2**32:
        return snowflake.INVALID
    _, machine, seq = snowflake.decompose(raw)
    if (machine * snowflake.MAX_SEQUENCE + seq) % 1024 == 0:
        return snowflake.VALID_IN_COUNTRY
    return snowflake.INVALID


sampler2 = snowflake.RandomIdSampler(epoch_ms=0)
batches2 = [sampler2.candidate_batch(seed, (2**32, 2**35)) for seed in range(100)]
est2 = snowflake.estimate_hit_rate(batches2, dense_oracle)
print(f"designed 1/1024 density: rate {est2.hit_rate:.5f} "
      f"(CI {est2.hit_rate_ci[0]:.5f}..{est2.hit_rate_ci[1]:.5f}, "
      f"target {(995 / 1000) / 1024:.5f})")
