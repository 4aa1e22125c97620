"""Tweet- and user-level descriptive statistics and pairwise significance
tests across sampling methods.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import geo
from .census import AGE_BRACKETS, GENDERS
from .errors import DataError, DegenerateSampleError
from .io import MS_PER_DAY, fmt_float
from .samplers import METHOD_STREAM, SampleSet

MIN_ACCOUNT_AGE_DAYS = 1.0


def _age_days(user, as_of_ms: int) -> float:
    return max((as_of_ms - user.created_ms) / MS_PER_DAY, MIN_ACCOUNT_AGE_DAYS)


def tweets_per_day(user, as_of_ms: int) -> float:
    return user.lifetime_tweets / _age_days(user, as_of_ms)


@dataclass
class MetricTable:
    method: str
    tweet_count: int
    unique_accounts: int
    avg_tweets_per_account: float
    english_ratio: float
    user_stats: dict            # name -> {"mean": .., "std": ..}
    gender_shares: dict
    age_shares: dict
    state_counts: dict
    empty: bool = False


def _mean_std(values) -> dict:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return {"mean": float("nan"), "std": float("nan")}
    return {"mean": float(arr.mean()), "std": float(arr.std(ddof=1) if arr.size > 1 else 0.0)}


def _user_of(entry):
    return entry.user if hasattr(entry, "user") else entry


def _label_of(entry, attr, fallback):
    if hasattr(entry, attr) and getattr(entry, attr) is not None:
        return getattr(entry, attr)
    return fallback(_user_of(entry))


def last_tweet_likes(sample: SampleSet, user_ids) -> dict:
    """Likes of each user's newest captured tweet, as the collector saw it.

    A realtime 1% stream reads a tweet the moment it is posted, before any
    engagement accrues, so its view of likes is zero; query methods read
    engagement accrued by the end of the window.
    """
    cap = sample.captured
    wanted = set(int(u) for u in user_ids)
    out = {}
    if cap is None or not len(cap):
        return {u: 0.0 for u in wanted}
    order = np.argsort(cap.ts, kind="stable")
    for i in order:
        uid = int(cap.author[i])
        if uid in wanted:
            out[uid] = 0.0 if sample.method == METHOD_STREAM else float(cap.likes[i])
    for uid in wanted - set(out):
        out[uid] = 0.0
    return out


def summarize(sample: SampleSet, users, as_of=None) -> MetricTable:
    """Populate the per-method metric table from one sample's captured
    tweets and its drawn user records (latent or labeled)."""
    from .io import to_ms

    if as_of is None:
        as_of_ms = sample.collection_window[1]
    else:
        as_of_ms = to_ms(as_of)
    if not users:
        return MetricTable(
            method=sample.method, tweet_count=int(len(sample.tweets)),
            unique_accounts=int(len(sample.authors)),
            avg_tweets_per_account=float("nan"), english_ratio=float("nan"),
            user_stats={}, gender_shares={}, age_shares={}, state_counts={},
            empty=True,
        )
    cap = sample.captured
    n_tweets = int(len(sample.tweets))
    n_accounts = int(len(sample.authors))
    english = float((cap.lang == "en").mean()) if cap is not None and len(cap) else float("nan")

    sim_users = [_user_of(u) for u in users]
    likes_by_user = last_tweet_likes(sample, [u.user_id for u in sim_users])
    user_stats = {
        "lifetime_tweets": _mean_std(u.lifetime_tweets for u in sim_users),
        "tweets_per_day": _mean_std(tweets_per_day(u, as_of_ms) for u in sim_users),
        "likes_last_tweet": _mean_std(likes_by_user[u.user_id] for u in sim_users),
        "followers": _mean_std(u.followers for u in sim_users),
        "friends": _mean_std(u.friends for u in sim_users),
    }

    genders = [_label_of(u, "gender", lambda s: s.true_gender) for u in users]
    ages = [_label_of(u, "age", lambda s: s.true_age) for u in users]
    states = [_label_of(u, "state", lambda s: s.true_state) for u in users]
    n = len(users)
    gender_shares = {g: genders.count(g) / n for g in GENDERS}
    age_shares = {a: ages.count(a) / n for a in AGE_BRACKETS}
    state_counts = {s: 0 for s in geo.STATES}
    for s in states:
        if s in state_counts:
            state_counts[s] += 1

    return MetricTable(
        method=sample.method,
        tweet_count=n_tweets,
        unique_accounts=n_accounts,
        avg_tweets_per_account=n_tweets / n_accounts if n_accounts else float("nan"),
        english_ratio=english,
        user_stats=user_stats,
        gender_shares=gender_shares,
        age_shares=age_shares,
        state_counts=state_counts,
    )


def welch_t(a, b, pooled: bool = False):
    """Two-sided unequal-variance t-test: (t, p, df).

    Welch-Satterthwaite degrees of freedom by default; `pooled` switches to
    the equal-variance statistic.
    """
    x = np.asarray(list(a), dtype=float)
    y = np.asarray(list(b), dtype=float)
    if len(x) < 2 or len(y) < 2:
        raise DegenerateSampleError("both samples need at least 2 observations")
    vx, vy = x.var(ddof=1), y.var(ddof=1)
    if vx == 0 and vy == 0:
        raise DegenerateSampleError("zero variance in both samples")
    nx, ny = len(x), len(y)
    if pooled:
        sp2 = ((nx - 1) * vx + (ny - 1) * vy) / (nx + ny - 2)
        se = math.sqrt(sp2 * (1 / nx + 1 / ny))
        df = float(nx + ny - 2)
    else:
        se = math.sqrt(vx / nx + vy / ny)
        df = (vx / nx + vy / ny) ** 2 / (
            (vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1)
        )
    t = (x.mean() - y.mean()) / se
    p = 2.0 * float(sps.t.sf(abs(t), df))
    return float(t), p, float(df)


METRIC_EXTRACTORS = {
    "lifetime_tweets": lambda entry, as_of_ms: _user_of(entry).lifetime_tweets,
    "tweets_per_day": lambda entry, as_of_ms: tweets_per_day(_user_of(entry), as_of_ms),
    "followers": lambda entry, as_of_ms: _user_of(entry).followers,
    "friends": lambda entry, as_of_ms: _user_of(entry).friends,
    "created_ms": lambda entry, as_of_ms: _user_of(entry).created_ms,
}


def metric_values(users, metric, as_of_ms: int = 0) -> np.ndarray:
    if callable(metric):
        return np.asarray([metric(u) for u in users], dtype=float)
    if metric not in METRIC_EXTRACTORS:
        raise DataError(f"unknown metric {metric!r}")
    fn = METRIC_EXTRACTORS[metric]
    return np.asarray([fn(u, as_of_ms) for u in users], dtype=float)


def pairwise_pvalues(users_by_method: dict, metric, as_of_ms: int = 0):
    """Symmetric matrix of two-sided p-values across methods; diagonal 1."""
    methods = list(users_by_method)
    values = {m: metric_values(users_by_method[m], metric, as_of_ms) for m in methods}
    k = len(methods)
    mat = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            _, p, _ = welch_t(values[methods[i]], values[methods[j]])
            mat[i, j] = mat[j, i] = p
    return methods, mat


def state_counts(users) -> dict:
    counts = {s: 0 for s in geo.STATES}
    for entry in users:
        s = _label_of(entry, "state", lambda u: u.true_state)
        if s in counts:
            counts[s] += 1
    return counts


def log_histogram(values, n_bins: int = 40):
    """(bin_lo, bin_hi, count) rows with log-spaced bins; zeros get their
    own [0, 1) bin since these metrics are heavy-tailed counts."""
    arr = np.asarray(list(values), dtype=float)
    rows = []
    zeros = int((arr < 1).sum())
    if zeros:
        rows.append((0.0, 1.0, zeros))
    pos = arr[arr >= 1]
    if pos.size:
        hi = max(pos.max(), 1.0)
        edges = np.logspace(0, math.log10(hi + 1.0), n_bins + 1)
        counts, edges = np.histogram(pos, bins=edges)
        for lo_e, hi_e, c in zip(edges[:-1], edges[1:], counts):
            rows.append((float(lo_e), float(hi_e), int(c)))
    return rows


def write_metric_csv(path, table: MetricTable):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["field", "value"])
        writer.writerow(["method", table.method])
        writer.writerow(["tweet_count", table.tweet_count])
        writer.writerow(["unique_accounts", table.unique_accounts])
        writer.writerow(["avg_tweets_per_account", fmt_float(table.avg_tweets_per_account)])
        writer.writerow(["english_ratio", fmt_float(table.english_ratio)])
        for name, st in sorted(table.user_stats.items()):
            writer.writerow([f"{name}_mean", fmt_float(st["mean"])])
            writer.writerow([f"{name}_std", fmt_float(st["std"])])
        for g in GENDERS:
            writer.writerow([f"share_gender_{g}", fmt_float(table.gender_shares.get(g, 0.0))])
        for a in AGE_BRACKETS:
            writer.writerow([f"share_age_{a}", fmt_float(table.age_shares.get(a, 0.0))])
        for s in sorted(table.state_counts):
            writer.writerow([f"state_{s}", table.state_counts[s]])


def write_histogram_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in rows:
            writer.writerow([fmt_float(lo), fmt_float(hi), c])


def combined_json(path, tables: dict):
    payload = {}
    for method, t in tables.items():
        payload[method] = {
            "tweet_count": t.tweet_count,
            "unique_accounts": t.unique_accounts,
            "avg_tweets_per_account": t.avg_tweets_per_account,
            "english_ratio": t.english_ratio,
            "user_stats": t.user_stats,
            "gender_shares": t.gender_shares,
            "age_shares": t.age_shares,
            "state_counts": t.state_counts,
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, allow_nan=True)
        fh.write("\n")


def write_pvalue_csv(path, methods, matrix):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method"] + list(methods))
        for i, m in enumerate(methods):
            writer.writerow([m] + [fmt_float(x) for x in matrix[i]])
