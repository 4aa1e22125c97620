import statistics

import numpy as np
import pytest
from scipy import stats as sps

from samplab import metrics, samplers
from samplab.errors import DegenerateSampleError
from samplab.io import MS_PER_DAY, to_ms
from conftest import WINDOW, make_user
from test_samplers import make_stream


def sample_from(stream, method="loc"):
    sub = stream
    return samplers.SampleSet(
        method=method, tweets=sub.ids.copy(), authors=np.unique(sub.author),
        collection_window=stream.window, captured=sub,
    )


def test_tweets_per_day_basic():
    as_of = to_ms(WINDOW[1])
    u = make_user(created_ms=as_of - 30 * MS_PER_DAY, lifetime_tweets=30)
    assert metrics.tweets_per_day(u, as_of) == pytest.approx(1.0)
    # age floors at one day
    young = make_user(created_ms=as_of, lifetime_tweets=10)
    assert metrics.tweets_per_day(young, as_of) == 10.0


def test_summarize_fields():
    as_of = to_ms(WINDOW[1])
    users = [
        make_user(user_id=1, created_ms=as_of - 30 * MS_PER_DAY, lifetime_tweets=30),
        make_user(user_id=2, created_ms=as_of - 60 * MS_PER_DAY, lifetime_tweets=120),
    ]
    stream = make_stream([100, 200, 300], [1, 2, 1], lang="en")
    table = metrics.summarize(sample_from(stream), users, as_of=as_of)
    assert table.tweet_count == 3
    assert table.unique_accounts == 2
    assert table.avg_tweets_per_account == pytest.approx(1.5)
    assert table.english_ratio == 1.0
    assert table.user_stats["tweets_per_day"]["mean"] == pytest.approx((1.0 + 2.0) / 2)
    assert table.gender_shares["m"] == 1.0
    assert table.state_counts["OH"] == 2
    assert sum(table.gender_shares.values()) == pytest.approx(1.0)
    assert sum(table.age_shares.values()) == pytest.approx(1.0)


def test_summarize_empty_users():
    stream = make_stream([100], [1])
    table = metrics.summarize(sample_from(stream), [], as_of=1000)
    assert table.empty


def test_summarize_matches_independent_recomputation(small_world, small_stream):
    _, world = small_world
    sample = samplers.sample_location_query(small_stream, "US")
    draw = samplers.draw_users(sample, 500, seed=4)
    by_id = {u.user_id: u for u in world}
    users = [by_id[uid] for uid in draw.users]
    as_of = to_ms(WINDOW[1])
    table = metrics.summarize(sample, users, as_of=as_of)
    # independent recomputation with the statistics module
    followers = [u.followers for u in users]
    assert table.user_stats["followers"]["mean"] == pytest.approx(
        statistics.fmean(followers))
    assert table.user_stats["followers"]["std"] == pytest.approx(
        statistics.stdev(followers))
    tpd = [u.lifetime_tweets / max((as_of - u.created_ms) / MS_PER_DAY, 1.0)
           for u in users]
    assert table.user_stats["tweets_per_day"]["mean"] == pytest.approx(
        statistics.fmean(tpd))
    english = sum(l == "en" for l in sample.captured.lang) / len(sample.captured.lang)
    assert table.english_ratio == pytest.approx(english)


def test_stream_sample_likes_are_realtime_zero(small_stream):
    sample = samplers.sample_stream(small_stream)
    authors = sample.authors[:50]
    likes = metrics.last_tweet_likes(sample, authors)
    assert all(v == 0.0 for v in likes.values())
    # the same tweets read as a batch query would show accrued likes
    loc = samplers.sample_location_query(small_stream, "US")
    likes_loc = metrics.last_tweet_likes(loc, loc.authors[:2000])
    assert any(v > 0 for v in likes_loc.values())


def test_welch_identical_samples():
    t, p, df = metrics.welch_t([1, 2, 3, 4], [1, 2, 3, 4])
    assert t == 0.0 and p == pytest.approx(1.0)


def test_welch_reference_fixture():
    a = [1, 2, 3, 4, 5]
    b = [2, 3, 4, 5, 6]
    t, p, df = metrics.welch_t(a, b)
    assert t == pytest.approx(-1.0, abs=1e-12)
    assert df == pytest.approx(8.0, abs=1e-12)
    assert p == pytest.approx(0.3466, abs=1e-4)
    # oracle: the reference implementation
    ref = sps.ttest_ind(a, b, equal_var=False)
    assert t == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, abs=1e-12)


def test_welch_matches_scipy_on_random_samples():
    rng = np.random.default_rng(5)
    for _ in range(25):
        a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), size=rng.integers(5, 80))
        b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), size=rng.integers(5, 80))
        t, p, df = metrics.welch_t(a, b)
        ref = sps.ttest_ind(a, b, equal_var=False)
        assert t == pytest.approx(ref.statistic, rel=1e-10)
        assert p == pytest.approx(ref.pvalue, rel=1e-10)
        tp, pp, _ = metrics.welch_t(a, b, pooled=True)
        refp = sps.ttest_ind(a, b, equal_var=True)
        assert tp == pytest.approx(refp.statistic, rel=1e-10)
        assert pp == pytest.approx(refp.pvalue, rel=1e-10)


def test_welch_invariances():
    rng = np.random.default_rng(6)
    a = rng.normal(0, 1, 40)
    b = rng.normal(0.5, 2, 60)
    t_ab, p_ab, _ = metrics.welch_t(a, b)
    t_ba, p_ba, _ = metrics.welch_t(b, a)
    assert t_ab == pytest.approx(-t_ba)
    assert p_ab == pytest.approx(p_ba)
    t_shift, p_shift, _ = metrics.welch_t(a + 100, b + 100)
    assert t_shift == pytest.approx(t_ab)
    assert p_shift == pytest.approx(p_ab)


def test_welch_degenerate_inputs():
    with pytest.raises(DegenerateSampleError):
        metrics.welch_t([1], [1, 2, 3])
    with pytest.raises(DegenerateSampleError):
        metrics.welch_t([2, 2, 2], [3, 3, 3])


def test_pairwise_matrix_properties(small_world):
    _, world = small_world
    groups = {
        "stream1pct": world[0:400],
        "loc": world[400:800],
        "lang": world[800:1200],
        "bb": world[1200:1600],
    }
    methods, mat = metrics.pairwise_pvalues(groups, "followers")
    assert mat.shape == (4, 4)
    assert np.allclose(np.diag(mat), 1.0)
    assert np.allclose(mat, mat.T)
    same = {m: world[:300] for m in ("a", "b", "c", "d")}
    _, ones = metrics.pairwise_pvalues(same, "followers")
    assert np.allclose(ones, 1.0)


def test_state_counts_bruteforce(small_world):
    _, world = small_world
    users = world[:2000]
    counts = metrics.state_counts(users)
    assert sum(counts.values()) == 2000
    brute = {}
    for u in users:
        brute[u.true_state] = brute.get(u.true_state, 0) + 1
    for s, c in brute.items():
        assert counts[s] == c
    only_ca = [make_user(user_id=i, true_state="CA") for i in range(7)]
    counts = metrics.state_counts(only_ca)
    assert counts["CA"] == 7 and sum(counts.values()) == 7


def test_log_histogram_mass():
    rng = np.random.default_rng(7)
    values = np.concatenate([np.zeros(10), rng.lognormal(3, 2, 5000)])
    rows = metrics.log_histogram(values)
    assert sum(c for _, _, c in rows) == len(values)
    assert rows[0][:2] == (0.0, 1.0)


def test_metric_csv_writes(tmp_path, small_world, small_stream):
    _, world = small_world
    sample = samplers.sample_location_query(small_stream, "US")
    table = metrics.summarize(sample, world[:100], as_of=to_ms(WINDOW[1]))
    path = tmp_path / "metrics.csv"
    metrics.write_metric_csv(path, table)
    text = path.read_text()
    assert "tweet_count" in text and "share_age_le18" in text
    metrics.combined_json(tmp_path / "combined.json", {"loc": table})
    metrics.write_pvalue_csv(tmp_path / "p.csv", ["a", "b"], np.ones((2, 2)))
    assert (tmp_path / "p.csv").read_text().startswith("method,a,b")
