"""Collect the same month of tweets with the four sampling mechanisms and
compare what each one sees.

The realtime 1% stream catches an author only when one of their tweets
lands in the sampled millisecond window, so active users are
over-represented; the query methods capture every matching tweet.
"""

import numpy as np

from samplab import census, geo, metrics, samplers, tiler, worldgen
from samplab.io import to_ms

WINDOW = ("2022-09-07", "2022-10-08")

table = census.synthetic_table(20, 400_000, seed=11)
world = worldgen.build_world(table, worldgen.InclusionDesign(base_rate=0.3), seed=11)
stream = worldgen.simulate_month(world, WINDOW, seed=11)
tiles = tiler.tile_polygon(geo.continental_outline(), 0.3)
print(f"world: {len(world):,} users, stream: {len(stream):,} tweets\n")

samples = {
    "stream1pct": samplers.sample_stream(stream),
    "loc": samplers.sample_location_query(stream),
    "lang": samplers.sample_language_query(stream),
    "bb": samplers.sample_bounding_box(stream, tiles),
}
by_id = {u.user_id: u for u in world}
as_of = to_ms(WINDOW[1])

print(f"{'method':>10} {'tweets':>9} {'authors':>8} {'tweets/day':>11} {'likes':>6}")
for name, sample in samples.items():
    n = min(5000, sample.n_authors)
    draw = samplers.draw_users(sample, n, seed=1)
    users = [by_id[uid] for uid in draw.users]
    tpd = np.mean([metrics.tweets_per_day(u, as_of) for u in users])
    likes = metrics.last_tweet_likes(sample, [u.user_id for u in users])
    print(f"{name:>10} {len(sample):>9,} {sample.n_authors:>8,} "
          f"{tpd:>11.2f} {np.mean(list(likes.values())):>6.2f}")

print("\nstream inclusion by tweet count (analytic):")
for k in (1, 10, 100, 1000):
    print(f"  {k:>5} tweets -> {samplers.analytic_stream_inclusion(k, 0.01):.3f}")
