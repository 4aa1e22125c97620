import numpy as np
import pytest

from samplab import preprocess
from samplab.errors import DataError, InsufficientUsersError
from samplab.io import to_ms
from conftest import AS_OF, make_user


def test_clean_users_all_retained():
    users = [make_user(user_id=i) for i in range(50)]
    cfg = preprocess.FilterConfig(require_language="en", require_country="US",
                                  bot_score_sd=0.0)
    retained, report = preprocess.apply_filters(users, cfg, as_of=AS_OF)
    assert retained == users
    assert report.output_size == 50
    assert all(count == 0 for _, count in report.removed)


def test_activity_threshold_is_fewer_than():
    cfg = preprocess.FilterConfig()
    low = make_user(user_id=1, lifetime_tweets=99)
    boundary = make_user(user_id=2, lifetime_tweets=100)
    retained, report = preprocess.apply_filters([low, boundary], cfg, as_of=AS_OF)
    assert retained == [boundary]
    assert report.as_dict()["activity"] == 1


def test_tenure_filter():
    cfg = preprocess.FilterConfig()
    young = make_user(user_id=1, created_ms=to_ms("2022-05-01"))  # ~4 months old
    old = make_user(user_id=2, created_ms=to_ms("2021-05-01"))
    retained, report = preprocess.apply_filters([young, old], cfg, as_of=AS_OF)
    assert retained == [old]
    assert report.as_dict()["tenure"] == 1


def test_first_filter_gets_attribution():
    # verified AND low-activity: counted under verified (first in order)
    u = make_user(user_id=1, is_verified=True, lifetime_tweets=5)
    _, report = preprocess.apply_filters([u], preprocess.FilterConfig(), as_of=AS_OF)
    assert report.as_dict()["verified"] == 1
    assert report.as_dict()["activity"] == 0


@pytest.mark.parametrize("bio,expected", [
    ("Proud senator of nothing", True),
    ("I love news-free mornings", True),   # hyphen is a word boundary
    ("remember the titans", False),        # "member" must match whole words
    ("official page of someone", True),    # two-word phrase
    ("Startup!", True),                    # case-insensitive, punctuation boundary
    ("", False),
    ("ventured beyond", False),
])
def test_bio_keyword_whole_word(bio, expected):
    assert preprocess.bio_keyword_match(bio) is expected


def test_bio_substring_mode():
    assert preprocess.bio_keyword_match("remember", whole_word=False)
    assert not preprocess.bio_keyword_match("remember")


def test_language_and_flags():
    cfg = preprocess.FilterConfig(require_language="en", require_country="US")
    users = [
        make_user(user_id=1, primary_language="es"),
        make_user(user_id=2, is_protected=True),
        make_user(user_id=3, is_suspended=True),
        make_user(user_id=4, is_org=True),
        make_user(user_id=5, is_bot=True),
        make_user(user_id=6),
    ]
    retained, report = preprocess.apply_filters(users, cfg, as_of=AS_OF, seed=1)
    counts = report.as_dict()
    assert counts["language"] == 1
    assert counts["protected"] == 1
    assert counts["suspended"] == 1
    assert counts["org"] == 1
    # the bot score channel is noisy but a flagged bot scores ~0.8 >> 0.5
    assert counts["bot"] == 1
    assert [u.user_id for u in retained] == [6]


def test_conservation_and_bruteforce_attribution(small_world):
    _, world = small_world
    users = preprocess.subsample(world, min(30_000, len(world)), seed=21)
    cfg = preprocess.FilterConfig(require_language="en", require_country="US")
    retained, report = preprocess.apply_filters(users, cfg, as_of=AS_OF, seed=9)
    assert report.input_size - report.removed_total() == report.output_size
    assert report.output_size == len(retained)

    # Independent route: recompute attribution with plain loops.
    scores = preprocess.noisy_bot_scores(users, seed=9)
    cutoff = to_ms(AS_OF) - int(9 * preprocess.DAYS_PER_MONTH * 86_400_000)
    expected = {name: 0 for name in preprocess.FILTER_ORDER}
    survivors = 0
    for u, score in zip(users, scores):
        if u.is_verified:
            expected["verified"] += 1
        elif u.lifetime_tweets < 100:
            expected["activity"] += 1
        elif u.created_ms > cutoff:
            expected["tenure"] += 1
        elif preprocess.bio_keyword_match(u.bio):
            expected["bio"] += 1
        elif u.primary_language != "en":
            expected["language"] += 1
        elif u.is_protected:
            expected["protected"] += 1
        elif u.is_suspended:
            expected["suspended"] += 1
        elif score > 0.5:
            expected["bot"] += 1
        elif u.is_org:
            expected["org"] += 1
        else:
            survivors += 1
    assert report.as_dict() == expected
    assert report.output_size == survivors

    # First filter sees the raw sample: exact binomial check on verified.
    n = len(users)
    p = 0.026
    assert abs(expected["verified"] - n * p) < 3 * np.sqrt(n * p * (1 - p))


def test_order_permutation_keeps_retained_set(small_world):
    _, world = small_world
    users = preprocess.subsample(world, 5000, seed=22)
    cfg = preprocess.FilterConfig(require_language="en")
    permuted = preprocess.with_overrides(
        cfg, order=tuple(reversed(preprocess.FILTER_ORDER)))
    kept_a, rep_a = preprocess.apply_filters(users, cfg, as_of=AS_OF, seed=2)
    kept_b, rep_b = preprocess.apply_filters(users, permuted, as_of=AS_OF, seed=2)
    assert kept_a == kept_b
    assert rep_a.as_dict() != rep_b.as_dict()  # attribution moves around


def test_threshold_variants_shrink_monotonically(small_world):
    _, world = small_world
    users = preprocess.subsample(world, 10_000, seed=23)
    cfg = preprocess.FilterConfig(require_language="en")
    base, _ = preprocess.apply_filters(users, cfg, as_of=AS_OF, seed=0)
    harder, _ = preprocess.apply_filters(
        users, preprocess.with_overrides(cfg, min_tweets=200), as_of=AS_OF, seed=0)
    longer, _ = preprocess.apply_filters(
        users, preprocess.with_overrides(cfg, min_tenure_months=12), as_of=AS_OF, seed=0)
    assert set(u.user_id for u in harder) <= set(u.user_id for u in base)
    assert set(u.user_id for u in longer) <= set(u.user_id for u in base)
    assert len(harder) < len(base)
    assert len(longer) < len(base)


def test_subsample_contract():
    users = [make_user(user_id=i) for i in range(30)]
    full = preprocess.subsample(users, 30, seed=4)
    assert sorted(u.user_id for u in full) == list(range(30))
    assert preprocess.subsample(users, 10, seed=4) == preprocess.subsample(users, 10, seed=4)
    with pytest.raises(InsufficientUsersError) as err:
        preprocess.subsample(users, 31, seed=4)
    assert err.value.available == 30


def test_subsample_frequency_uniform():
    users = [make_user(user_id=i) for i in range(20)]
    hits = {i: 0 for i in range(20)}
    for s in range(2000):
        for u in preprocess.subsample(users, 5, seed=s):
            hits[u.user_id] += 1
    expected = 2000 * 5 / 20
    sd = np.sqrt(2000 * 0.25 * 0.75)
    assert all(abs(h - expected) < 4 * sd for h in hits.values())


def test_removal_table_layout(tmp_path):
    users = [make_user(user_id=i, is_verified=(i % 2 == 0)) for i in range(10)]
    cfg = preprocess.FilterConfig()
    _, rep_a = preprocess.apply_filters(users, cfg, as_of=AS_OF)
    _, rep_b = preprocess.apply_filters(users[:4], cfg, as_of=AS_OF)
    path = tmp_path / "removals.csv"
    preprocess.write_removal_csv(path, {"loc": rep_a, "bb": rep_b})
    lines = path.read_text().splitlines()
    assert lines[0] == "filter,loc,bb"
    assert lines[1] == "input,10,4"
    assert lines[2].startswith("verified,5,2")
    assert lines[-1] == f"retained,{rep_a.output_size},{rep_b.output_size}"


def test_invalid_config():
    with pytest.raises(DataError):
        preprocess.FilterConfig(min_tweets=-1)
    with pytest.raises(DataError):
        preprocess.FilterConfig(order=("verified", "sparkle"))
