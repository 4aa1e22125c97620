"""User pre-processing: the eight-filter cascade plus bot and org
exclusion, with per-filter removal accounting.

Filters are conjunctive predicates applied in a fixed order; each removed
user is attributed to the first filter that rejects it, so permuting the
order changes attribution but never the retained set.
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import geo
from .errors import DataError, InsufficientUsersError
from .io import MS_PER_DAY, to_ms
from .rng import substream

DEFAULT_BIO_KEYWORDS = (
    "journalist", "anchor", "newspaper", "representative", "congressman",
    "congresswoman", "senator", "secretary", "mayor", "organization",
    "company", "institute", "charity", "magazine", "singer", "bot",
    "member", "advisory", "advisor", "startup", "venture", "news",
    "actor", "actress", "official page",
)

FILTER_ORDER = (
    "verified", "activity", "tenure", "bio", "language",
    "country", "protected", "suspended", "bot", "org",
)

DAYS_PER_MONTH = 30.4375  # mean Gregorian month


@dataclass(frozen=True)
class FilterConfig:
    min_tweets: int = 100
    min_tenure_months: int = 9
    bio_keywords: tuple = DEFAULT_BIO_KEYWORDS
    bio_whole_word: bool = True
    bot_score_threshold: float = 0.5
    # Noisy-score channel standing in for the external bot service.
    bot_score_bot_mean: float = 0.8
    bot_score_human_mean: float = 0.2
    bot_score_sd: float = 0.12
    require_language: str | None = None
    require_country: str | None = None
    order: tuple = FILTER_ORDER

    def __post_init__(self):
        if self.min_tweets < 0:
            raise DataError("min_tweets must be non-negative")
        unknown = set(self.order) - set(FILTER_ORDER)
        if unknown:
            raise DataError(f"unknown filter name(s): {sorted(unknown)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bio_keywords"] = list(self.bio_keywords)
        d["order"] = list(self.order)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FilterConfig":
        d = dict(d)
        if "bio_keywords" in d:
            d["bio_keywords"] = tuple(d["bio_keywords"])
        if "order" in d:
            d["order"] = tuple(d["order"])
        return cls(**d)


@dataclass
class RemovalReport:
    removed: list  # [(filter_name, count)] in application order
    input_size: int
    output_size: int

    def removed_total(self) -> int:
        return sum(n for _, n in self.removed)

    def check_conservation(self):
        if self.input_size - self.removed_total() != self.output_size:
            raise DataError("removal accounting does not conserve users")

    def as_dict(self) -> dict:
        return dict(self.removed)


def _keyword_pattern(keywords, whole_word: bool):
    if not whole_word:
        return None
    alts = "|".join(re.escape(k) for k in sorted(keywords, key=len, reverse=True))
    return re.compile(rf"\b(?:{alts})\b", re.IGNORECASE)


def bio_keyword_match(bio: str, keywords=DEFAULT_BIO_KEYWORDS,
                      whole_word: bool = True) -> bool:
    """Case-insensitive keyword screen; whole-word by default so "remember"
    does not trip on "member" (hyphens count as word boundaries)."""
    if not bio:
        return False
    if whole_word:
        return _keyword_pattern(keywords, True).search(bio) is not None
    low = bio.lower()
    return any(k in low for k in keywords)


def noisy_bot_scores(users, seed: int = 0, bot_mean: float = 0.8,
                     human_mean: float = 0.2, sd: float = 0.12) -> np.ndarray:
    """Stand-in for an external bot-scoring service: a noisy score around
    the latent flag, deterministic given the seed."""
    rng = substream(seed, "bot-scores")
    n = len(users)
    means = np.fromiter((bot_mean if u.is_bot else human_mean for u in users),
                        float, count=n)
    if sd == 0.0:
        return means
    return np.clip(rng.normal(means, sd), 0.0, 1.0)


def apply_filters(users, cfg: FilterConfig, as_of=None, seed: int = 0):
    """Run the cascade; returns (retained users, RemovalReport).

    `as_of` anchors the tenure filter (collection start); defaults to the
    newest account's creation time plus one day when omitted.
    """
    if as_of is None:
        as_of_ms = max((u.created_ms for u in users), default=0) + MS_PER_DAY
    else:
        as_of_ms = to_ms(as_of)
    tenure_cutoff_ms = as_of_ms - int(cfg.min_tenure_months * DAYS_PER_MONTH * MS_PER_DAY)
    pattern = _keyword_pattern(cfg.bio_keywords, cfg.bio_whole_word)
    scores = noisy_bot_scores(users, seed=seed, bot_mean=cfg.bot_score_bot_mean,
                              human_mean=cfg.bot_score_human_mean, sd=cfg.bot_score_sd)
    score_of = {id(u): s for u, s in zip(users, scores)}

    def bio_hit(u):
        if cfg.bio_whole_word:
            return pattern.search(u.bio) is not None if u.bio else False
        return bio_keyword_match(u.bio, cfg.bio_keywords, whole_word=False)

    predicates = {
        "verified": lambda u: u.is_verified,
        "activity": lambda u: u.lifetime_tweets < cfg.min_tweets,
        "tenure": lambda u: u.created_ms > tenure_cutoff_ms,
        "bio": bio_hit,
        "language": lambda u: (cfg.require_language is not None
                               and u.primary_language != cfg.require_language),
        "country": lambda u: (cfg.require_country == "US"
                              and u.true_state not in geo.STATES),
        "protected": lambda u: u.is_protected,
        "suspended": lambda u: u.is_suspended,
        "bot": lambda u: score_of[id(u)] > cfg.bot_score_threshold,
        "org": lambda u: u.is_org,
    }

    counts = {name: 0 for name in cfg.order}
    retained = []
    for u in users:
        for name in cfg.order:
            if predicates[name](u):
                counts[name] += 1
                break
        else:
            retained.append(u)
    report = RemovalReport(
        removed=[(name, counts[name]) for name in cfg.order],
        input_size=len(users),
        output_size=len(retained),
    )
    report.check_conservation()
    return retained, report


def subsample(users, n: int, seed: int = 0):
    """Uniform sample without replacement; full-size n yields a permutation."""
    if n > len(users):
        raise InsufficientUsersError(n, len(users))
    rng = substream(seed, "subsample")
    order = rng.permutation(len(users))[:n]
    return [users[i] for i in order]


def removal_table(reports_by_method: dict) -> list[list]:
    """Rows of the filters-by-methods removal table (plus input/retained)."""
    methods = list(reports_by_method)
    if not methods:
        return []
    order = [name for name, _ in reports_by_method[methods[0]].removed]
    rows = [["filter"] + methods]
    rows.append(["input"] + [reports_by_method[m].input_size for m in methods])
    for name in order:
        rows.append([name] + [reports_by_method[m].as_dict().get(name, 0) for m in methods])
    rows.append(["retained"] + [reports_by_method[m].output_size for m in methods])
    return rows


def write_removal_csv(path, reports_by_method: dict):
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in removal_table(reports_by_method):
            writer.writerow(row)


def with_overrides(cfg: FilterConfig, **kwargs) -> FilterConfig:
    return replace(cfg, **kwargs)
