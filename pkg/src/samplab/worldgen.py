"""Synthetic platform generator.

Builds a user universe from a ground-truth population table under a
configurable inclusion-probability design (so the truth behind every
sample is known exactly), then simulates a timestamped tweet stream for a
collection window. Everything is reproducible from (inputs, seed).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import geo
from .census import AGE_BRACKETS, GENDERS, PopulationTable
from .errors import DataError, DesignError
from .io import MS_PER_DAY, MS_PER_HOUR, read_jsonl, to_ms, write_jsonl
from .rng import substream
from .snowflake import DEFAULT_EPOCH_MS as SNOWFLAKE_EPOCH_MS

PLATFORM_FOUNDING_MS = to_ms("2006-03-21")
DEFAULT_SIM_START = "2022-09-07"

DESIGN_KINDS = (
    "constant",
    "age_effect",
    "gender_effect",
    "loglinear_age_gender",
    "arbitrary_table",
)

_BENIGN_BIO_WORDS = (
    "coffee", "hiking", "dreamer", "sports", "music", "gamer", "artist",
    "foodie", "traveler", "bookworm", "cat person", "dog person", "runner",
    "student", "engineer", "nurse", "teacher", "photography", "movies",
    "gardening", "baking", "cycling", "proud parent", "weekend chef",
    "vinyl collector", "trivia nights", "mountain air", "beach days",
)


@dataclass(frozen=True)
class InclusionDesign:
    """Probability that a person of given demographics joins the platform."""

    kind: str = "constant"
    base_rate: float = 0.02
    age_effects: tuple = (1.0, 1.0, 1.0, 1.0)
    gender_effects: tuple = (1.0, 1.0)
    per_state_noise_sd: float = 0.0
    table: dict | None = None  # arbitrary_table: {"age|gender|state": pi}

    def materialize(self, states, rng) -> np.ndarray:
        """pi array of shape (4 ages, 2 genders, n states); all in (0, 1]."""
        if self.kind not in DESIGN_KINDS:
            raise DesignError(f"unknown design kind {self.kind!r}")
        n_s = len(states)
        age = np.asarray(self.age_effects, dtype=float)
        gen = np.asarray(self.gender_effects, dtype=float)
        if age.shape != (4,) or gen.shape != (2,):
            raise DesignError("age_effects must have 4 entries, gender_effects 2")
        pi = np.full((4, 2, n_s), self.base_rate, dtype=float)
        if self.kind == "age_effect":
            pi *= age[:, None, None]
        elif self.kind == "gender_effect":
            pi *= gen[None, :, None]
        elif self.kind == "loglinear_age_gender":
            if self.per_state_noise_sd != 0.0:
                raise DesignError(
                    "log-linear designs are exact by definition; per-state noise must be 0"
                )
            pi *= age[:, None, None] * gen[None, :, None]
        elif self.kind == "arbitrary_table":
            if not self.table:
                raise DesignError("arbitrary_table design requires a table")
            for a_i, a in enumerate(AGE_BRACKETS):
                for g_i, g in enumerate(GENDERS):
                    for s_i, s in enumerate(states):
                        key = f"{a}|{g}|{s}"
                        if key not in self.table:
                            raise DesignError(f"arbitrary_table missing cell {key}")
                        pi[a_i, g_i, s_i] = float(self.table[key])
        if self.kind != "arbitrary_table" and self.per_state_noise_sd > 0:
            pi = pi * np.exp(rng.normal(0.0, self.per_state_noise_sd, size=n_s))
        if np.any(pi <= 0.0) or np.any(pi > 1.0):
            raise DesignError(
                f"inclusion probabilities must lie in (0, 1]; got range "
                f"[{pi.min():.4g}, {pi.max():.4g}]"
            )
        return pi

    def to_dict(self) -> dict:
        d = asdict(self)
        d["age_effects"] = list(self.age_effects)
        d["gender_effects"] = list(self.gender_effects)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InclusionDesign":
        d = dict(d)
        if "age_effects" in d:
            d["age_effects"] = tuple(d["age_effects"])
        if "gender_effects" in d:
            d["gender_effects"] = tuple(d["gender_effects"])
        return cls(**d)


@dataclass(frozen=True)
class BehaviorConfig:
    """Knobs for user behavior; defaults give heavy-tailed activity, a 2009
    creation peak with a 2011 rise and a recency tail, and flag rates near
    the removal fractions seen in 30K production samples."""

    activity_median: float = 0.5      # tweets/day, log-normal
    activity_sigma: float = 1.4
    followers_median: float = 200.0
    followers_sigma: float = 1.25
    friends_median: float = 250.0
    friends_sigma: float = 1.2
    social_activity_corr: float = 0.35
    friend_cap: int = 5000
    engagement_median: float = 0.008  # likes/hour accrued by a tweet
    engagement_sigma: float = 1.0
    likes_cap: int = 100_000
    english_rate: float = 0.85
    other_languages: tuple = ("es", "pt", "fr", "ja", "de", "ar")
    code_switch_rate: float = 0.03
    place_tag_rate: float = 0.5       # P(tweet carries a country place tag)
    coordinate_rate: float = 0.9      # P(point coords | domestic place tag)
    foreign_place_rate: float = 0.01  # P(place tag is foreign | tagged)
    bot_rate: float = 0.03
    org_rate: float = 0.02
    verified_rate: float = 0.026
    protected_rate: float = 0.02
    suspended_rate: float = 0.015
    bio_keyword_rate: float = 0.026
    creation_weights: tuple = (0.30, 0.22, 0.28, 0.20)
    recency_scale_days: float = 240.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["other_languages"] = list(self.other_languages)
        d["creation_weights"] = list(self.creation_weights)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BehaviorConfig":
        d = dict(d)
        if "other_languages" in d:
            d["other_languages"] = tuple(d["other_languages"])
        if "creation_weights" in d:
            d["creation_weights"] = tuple(d["creation_weights"])
        return cls(**d)


@dataclass(frozen=True)
class SimUser:
    user_id: int
    true_age: str
    true_gender: str
    true_state: str
    activity_rate: float
    created_ms: int
    followers: int
    friends: int
    lifetime_tweets: int
    is_bot: bool
    is_org: bool
    is_verified: bool
    is_protected: bool
    is_suspended: bool
    bio: str
    primary_language: str
    p_place_tag: float
    p_coordinates: float


@dataclass
class TweetStream:
    """Columnar tweet container sorted by timestamp."""

    ids: np.ndarray
    author: np.ndarray
    ts: np.ndarray
    lang: np.ndarray
    place: np.ndarray   # '' when untagged
    lat: np.ndarray     # nan when no coordinates
    lon: np.ndarray
    likes: np.ndarray
    window: tuple[int, int] = (0, 0)

    def __len__(self):
        return len(self.ids)

    def event(self, i: int) -> "TweetEvent":
        has_coords = not math.isnan(float(self.lat[i]))
        return TweetEvent(
            tweet_id=int(self.ids[i]),
            author=int(self.author[i]),
            timestamp=int(self.ts[i]),
            lang=str(self.lang[i]),
            place_country=str(self.place[i]) or None,
            coordinates=(float(self.lat[i]), float(self.lon[i])) if has_coords else None,
            likes_at_collection=int(self.likes[i]),
        )

    def __iter__(self):
        return (self.event(i) for i in range(len(self)))

    def select(self, mask) -> "TweetStream":
        return TweetStream(
            ids=self.ids[mask], author=self.author[mask], ts=self.ts[mask],
            lang=self.lang[mask], place=self.place[mask],
            lat=self.lat[mask], lon=self.lon[mask], likes=self.likes[mask],
            window=self.window,
        )

    @classmethod
    def empty(cls, window=(0, 0)) -> "TweetStream":
        return cls(
            ids=np.empty(0, np.uint64), author=np.empty(0, np.uint64),
            ts=np.empty(0, np.int64), lang=np.empty(0, "U3"),
            place=np.empty(0, "U2"), lat=np.empty(0, np.float32),
            lon=np.empty(0, np.float32), likes=np.empty(0, np.int64),
            window=window,
        )


@dataclass(frozen=True)
class TweetEvent:
    tweet_id: int
    author: int
    timestamp: int
    lang: str
    place_country: str | None
    coordinates: tuple[float, float] | None
    likes_at_collection: int


def _creation_times(n, cfg: BehaviorConfig, start_ms: int, rng) -> np.ndarray:
    w = np.asarray(cfg.creation_weights, dtype=float)
    w = w / w.sum()
    comp = rng.choice(4, size=n, p=w)
    out = np.empty(n, dtype=np.float64)
    peak_2009 = to_ms("2009-06-01")
    rise_2011 = to_ms("2011-09-01")
    m = comp == 0
    out[m] = rng.normal(peak_2009, 270 * MS_PER_DAY, size=m.sum())
    m = comp == 1
    out[m] = rng.normal(rise_2011, 330 * MS_PER_DAY, size=m.sum())
    m = comp == 2
    out[m] = rng.uniform(PLATFORM_FOUNDING_MS, start_ms, size=m.sum())
    m = comp == 3
    out[m] = start_ms - rng.exponential(cfg.recency_scale_days * MS_PER_DAY, size=m.sum())
    return np.clip(out, PLATFORM_FOUNDING_MS, start_ms - MS_PER_DAY).astype(np.int64)


def _assign_ids(created_ms: np.ndarray, rng) -> np.ndarray:
    """Legacy 32-bit serials for pre-adoption accounts, time-sortable 64-bit
    ids (timestamp/machine/sequence layout) afterwards. Unique by construction
    plus a collision-fix pass."""
    n = len(created_ms)
    ids = np.empty(n, dtype=np.uint64)
    legacy = created_ms < SNOWFLAKE_EPOCH_MS
    n_old = int(legacy.sum())
    if n_old:
        ids[legacy] = rng.integers(1, 2**32, size=n_old, dtype=np.uint64)
    new = ~legacy
    n_new = int(new.sum())
    if n_new:
        machine = rng.integers(0, 1024, size=n_new, dtype=np.uint64)
        seq = rng.integers(0, 4096, size=n_new, dtype=np.uint64)
        ts_rel = (created_ms[new] - SNOWFLAKE_EPOCH_MS).astype(np.uint64)
        ids[new] = (ts_rel << np.uint64(22)) | (machine << np.uint64(12)) | seq
    # Collisions are vanishingly rare; nudge the sequence bits until unique.
    while True:
        uniq, counts = np.unique(ids, return_counts=True)
        if (counts == 1).all():
            break
        dupes = np.isin(ids, uniq[counts > 1])
        first_of = {}
        for idx in np.nonzero(dupes)[0]:
            v = int(ids[idx])
            if v in first_of:
                ids[idx] = np.uint64(v) ^ np.uint64(rng.integers(1, 4096))
            else:
                first_of[v] = idx
    return ids


def build_world(census: PopulationTable, design: InclusionDesign,
                behavior: BehaviorConfig | None = None, seed: int = 0,
                start=DEFAULT_SIM_START) -> list[SimUser]:
    """Draw the platform's user universe from the population table.

    Every census person joins independently with probability pi(age,
    gender, state) from the design. Note the world is drawn from all
    stored census cells (DC included when present); `include_dc` only
    scopes the analysis side.
    """
    cfg = behavior or BehaviorConfig()
    start_ms = to_ms(start)
    if census.level != geo.STATE_LEVEL:
        raise DataError("build_world requires a state-level table")
    states = sorted({c.geo for c in census.cells})
    state_idx = {s: i for i, s in enumerate(states)}
    rng = substream(seed, "world")
    pi = design.materialize(states, substream(seed, "world", "state-noise"))

    # Per-cell binomial membership draws, expanded to per-user rows.
    cell_states, cell_ages, cell_genders, cell_sizes = [], [], [], []
    for c in sorted(census.cells, key=lambda c: (c.geo, AGE_BRACKETS.index(c.age),
                                                 GENDERS.index(c.gender))):
        a_i = AGE_BRACKETS.index(c.age)
        g_i = GENDERS.index(c.gender)
        s_i = state_idx[c.geo]
        m = int(rng.binomial(c.count, pi[a_i, g_i, s_i])) if c.count else 0
        if m:
            cell_states.append(s_i)
            cell_ages.append(a_i)
            cell_genders.append(g_i)
            cell_sizes.append(m)
    n = int(sum(cell_sizes))
    if n == 0:
        return []
    sizes = np.asarray(cell_sizes)
    s_arr = np.repeat(np.asarray(cell_states, dtype=np.int16), sizes)
    a_arr = np.repeat(np.asarray(cell_ages, dtype=np.int8), sizes)
    g_arr = np.repeat(np.asarray(cell_genders, dtype=np.int8), sizes)

    z_act = rng.normal(size=n)
    activity = np.exp(math.log(cfg.activity_median) + cfg.activity_sigma * z_act)
    rho = cfg.social_activity_corr
    z_fol = rho * z_act + math.sqrt(max(0.0, 1 - rho**2)) * rng.normal(size=n)
    z_fri = rho * z_act + math.sqrt(max(0.0, 1 - rho**2)) * rng.normal(size=n)
    followers = np.exp(math.log(cfg.followers_median) + cfg.followers_sigma * z_fol)
    friends = np.exp(math.log(cfg.friends_median) + cfg.friends_sigma * z_fri)
    followers = followers.astype(np.int64)
    friends = friends.astype(np.int64)
    over_cap = (friends > cfg.friend_cap) & (followers <= cfg.friend_cap)
    friends[over_cap] = cfg.friend_cap

    created = _creation_times(n, cfg, start_ms, rng)
    age_days = np.maximum((start_ms - created) / MS_PER_DAY, 1.0)
    lifetime = rng.poisson(activity * age_days)

    is_bot = rng.random(n) < cfg.bot_rate
    is_org = rng.random(n) < cfg.org_rate
    is_verified = rng.random(n) < cfg.verified_rate
    is_protected = rng.random(n) < cfg.protected_rate
    is_suspended = rng.random(n) < cfg.suspended_rate

    langs = np.where(
        rng.random(n) < cfg.english_rate,
        "en",
        rng.choice(np.asarray(cfg.other_languages, dtype="U3"), size=n),
    )

    from .preprocess import DEFAULT_BIO_KEYWORDS

    word_pool = np.asarray(_BENIGN_BIO_WORDS, dtype="U16")
    bio_left = rng.choice(word_pool, size=n)
    bio_right = rng.choice(word_pool, size=n)
    keyworded = rng.random(n) < cfg.bio_keyword_rate
    kw_pick = rng.choice(np.asarray(DEFAULT_BIO_KEYWORDS, dtype="U16"), size=n)

    ids = _assign_ids(created, rng)

    users = []
    for i in range(n):
        if keyworded[i]:
            bio = f"{bio_left[i]} | {kw_pick[i]} | {bio_right[i]}"
        else:
            bio = f"{bio_left[i]} | {bio_right[i]}"
        users.append(SimUser(
            user_id=int(ids[i]),
            true_age=AGE_BRACKETS[a_arr[i]],
            true_gender=GENDERS[g_arr[i]],
            true_state=states[s_arr[i]],
            activity_rate=float(activity[i]),
            created_ms=int(created[i]),
            followers=int(followers[i]),
            friends=int(friends[i]),
            lifetime_tweets=int(lifetime[i]),
            is_bot=bool(is_bot[i]),
            is_org=bool(is_org[i]),
            is_verified=bool(is_verified[i]),
            is_protected=bool(is_protected[i]),
            is_suspended=bool(is_suspended[i]),
            bio=bio,
            primary_language=str(langs[i]),
            p_place_tag=float(cfg.place_tag_rate),
            p_coordinates=float(cfg.coordinate_rate),
        ))
    users.sort(key=lambda u: u.user_id)
    return users


def simulate_month(world: list[SimUser], window, seed: int = 0,
                   behavior: BehaviorConfig | None = None) -> TweetStream:
    """Emit each user's Poisson(activity x days) tweets at uniform times.

    Tweets carry a place tag / coordinates / language per the author's
    behavior fields; likes reflect engagement accrued by the end of the
    window (a batch reader's view), so a real-time reader sees ~0.
    """
    cfg = behavior or BehaviorConfig()
    start_ms, end_ms = to_ms(window[0]), to_ms(window[1])
    if end_ms - start_ms < MS_PER_DAY:
        raise DataError("window must span at least one day")
    if not world:
        return TweetStream.empty((start_ms, end_ms))
    rng = substream(seed, "stream")
    n = len(world)
    days = (end_ms - start_ms) / MS_PER_DAY

    activity = np.fromiter((u.activity_rate for u in world), float, count=n)
    p_place = np.fromiter((u.p_place_tag for u in world), float, count=n)
    p_coord = np.fromiter((u.p_coordinates for u in world), float, count=n)
    user_ids = np.fromiter((u.user_id for u in world), np.uint64, count=n)
    primary = np.asarray([u.primary_language for u in world], dtype="U3")
    state_codes = sorted({u.true_state for u in world})
    s_lookup = {s: i for i, s in enumerate(state_codes)}
    rects = np.asarray([geo.STATE_RECTS[s] for s in state_codes], dtype=float)
    s_idx = np.fromiter((s_lookup[u.true_state] for u in world), np.int16, count=n)

    counts = rng.poisson(activity * days)
    total = int(counts.sum())
    if total == 0:
        return TweetStream.empty((start_ms, end_ms))
    author_row = np.repeat(np.arange(n), counts)
    ts = start_ms + rng.integers(0, end_ms - start_ms, size=total, dtype=np.int64)
    order = np.argsort(ts, kind="stable")
    author_row = author_row[order]
    ts = ts[order]

    # Time-sortable ids: per-millisecond sequence, spilling into machine bits.
    uniq, inv_first = np.unique(ts, return_index=True)
    run_start = np.repeat(inv_first, np.diff(np.append(inv_first, total)))
    seq = np.arange(total, dtype=np.uint64) - run_start.astype(np.uint64)
    machine = seq >> np.uint64(12)
    seq = seq & np.uint64(4095)
    ids = (((ts - SNOWFLAKE_EPOCH_MS).astype(np.uint64)) << np.uint64(22)) \
        | (machine << np.uint64(12)) | seq

    lang = primary[author_row]
    switch = rng.random(total) < cfg.code_switch_rate
    if switch.any():
        pool = np.asarray(("en",) + tuple(cfg.other_languages), dtype="U3")
        lang = lang.copy()
        lang[switch] = rng.choice(pool, size=int(switch.sum()))

    placed = rng.random(total) < p_place[author_row]
    foreign = placed & (rng.random(total) < cfg.foreign_place_rate)
    place = np.full(total, "", dtype="U2")
    place[placed] = "US"
    place[foreign] = "XX"

    has_coords = placed & ~foreign & (rng.random(total) < p_coord[author_row])
    lat = np.full(total, np.nan, dtype=np.float32)
    lon = np.full(total, np.nan, dtype=np.float32)
    if has_coords.any():
        rows = author_row[has_coords]
        r = rects[s_idx[rows]]
        u1 = rng.random(int(has_coords.sum()))
        u2 = rng.random(int(has_coords.sum()))
        lat[has_coords] = r[:, 0] + u1 * (r[:, 2] - r[:, 0])
        lon[has_coords] = r[:, 1] + u2 * (r[:, 3] - r[:, 1])

    engagement = np.exp(
        math.log(cfg.engagement_median) + cfg.engagement_sigma * rng.normal(size=n)
    )
    hours_open = (end_ms - ts) / MS_PER_HOUR
    likes = rng.poisson(engagement[author_row] * hours_open)
    likes = np.minimum(likes, cfg.likes_cap).astype(np.int64)

    return TweetStream(
        ids=ids, author=user_ids[author_row], ts=ts, lang=lang, place=place,
        lat=lat, lon=lon, likes=likes, window=(start_ms, end_ms),
    )


# ---------------------------------------------------------------------------
# persistence

WORLD_SCHEMA, WORLD_VERSION = "samplab.world", 1
STREAM_SCHEMA, STREAM_VERSION = "samplab.stream", 1


def user_to_dict(u: SimUser) -> dict:
    return {
        "user_id": u.user_id, "true_age": u.true_age, "true_gender": u.true_gender,
        "true_state": u.true_state, "activity_rate": u.activity_rate,
        "created_ms": u.created_ms, "followers": u.followers, "friends": u.friends,
        "lifetime_tweets": u.lifetime_tweets, "is_bot": u.is_bot, "is_org": u.is_org,
        "is_verified": u.is_verified, "is_protected": u.is_protected,
        "is_suspended": u.is_suspended, "bio": u.bio,
        "primary_language": u.primary_language, "p_place_tag": u.p_place_tag,
        "p_coordinates": u.p_coordinates,
    }


def user_from_dict(d: dict) -> SimUser:
    return SimUser(**d)


def write_world(path, world: list[SimUser]):
    write_jsonl(path, WORLD_SCHEMA, WORLD_VERSION, (user_to_dict(u) for u in world))


def read_world(path) -> list[SimUser]:
    return [user_from_dict(d) for d in read_jsonl(path, WORLD_SCHEMA, WORLD_VERSION)]


def write_stream(path, stream: TweetStream):
    def rows():
        for i in range(len(stream)):
            lat = float(stream.lat[i])
            yield {
                "tweet_id": int(stream.ids[i]),
                "author": int(stream.author[i]),
                "timestamp": int(stream.ts[i]),
                "lang": str(stream.lang[i]),
                "place_country": str(stream.place[i]) or None,
                "coordinates": (
                    [round(lat, 6), round(float(stream.lon[i]), 6)]
                    if not math.isnan(lat) else None
                ),
                "likes_at_collection": int(stream.likes[i]),
            }
    write_jsonl(path, STREAM_SCHEMA, STREAM_VERSION, rows())


def read_stream(path, window=(0, 0)) -> TweetStream:
    rows = list(read_jsonl(path, STREAM_SCHEMA, STREAM_VERSION))
    total = len(rows)
    out = TweetStream.empty(window)
    if not total:
        return out
    out.ids = np.fromiter((r["tweet_id"] for r in rows), np.uint64, count=total)
    out.author = np.fromiter((r["author"] for r in rows), np.uint64, count=total)
    out.ts = np.fromiter((r["timestamp"] for r in rows), np.int64, count=total)
    out.lang = np.asarray([r["lang"] for r in rows], dtype="U3")
    out.place = np.asarray([r["place_country"] or "" for r in rows], dtype="U2")
    coords = [r["coordinates"] for r in rows]
    out.lat = np.asarray([c[0] if c else np.nan for c in coords], dtype=np.float32)
    out.lon = np.asarray([c[1] if c else np.nan for c in coords], dtype=np.float32)
    out.likes = np.fromiter((r["likes_at_collection"] for r in rows), np.int64, count=total)
    return out
