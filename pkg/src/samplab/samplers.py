"""The four tweet-collection mechanisms and user draws from their output.

Mechanisms: a realtime 1% stream (millisecond-window or Bernoulli
thinning), a country place query, a language+country query, and a
bounding-box grid query. Each returns a SampleSet of captured tweets with
the deduplicated author set; users are then drawn uniformly from authors.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, InsufficientUsersError
from .rng import substream
from .tiler import TileSet, covers_many
from .worldgen import TweetStream

METHOD_STREAM = "stream1pct"
METHOD_LOC = "loc"
METHOD_LANG = "lang"
METHOD_BB = "bb"
METHODS = (METHOD_STREAM, METHOD_LOC, METHOD_LANG, METHOD_BB)

MS_WINDOW_DEFAULT = (657, 666)  # inclusive; 10/1000 of each second


@dataclass
class SampleSet:
    method: str
    tweets: np.ndarray            # tweet ids, deduplicated
    authors: np.ndarray           # distinct author ids, sorted
    collection_window: tuple[int, int]
    captured: TweetStream | None = None  # payload of the captured tweets

    def __len__(self):
        return len(self.tweets)

    @property
    def n_authors(self) -> int:
        return len(self.authors)


@dataclass(frozen=True)
class UserSample:
    method: str
    users: tuple
    seed: int

    @property
    def size(self) -> int:
        return len(self.users)


def _dedupe(stream: TweetStream, mask: np.ndarray, method: str) -> SampleSet:
    sub = stream.select(mask)
    if len(sub):
        _, first = np.unique(sub.ids, return_index=True)
        if len(first) != len(sub):
            sub = sub.select(np.sort(first))
    authors = np.unique(sub.author)
    return SampleSet(
        method=method, tweets=sub.ids.copy(), authors=authors,
        collection_window=stream.window, captured=sub,
    )


def sample_stream(stream: TweetStream, mode: str = "ms_window",
                  rate: float = 0.01, window_ms=MS_WINDOW_DEFAULT,
                  country: str | None = "US", seed: int = 0) -> SampleSet:
    """Realtime sample: keep tweets whose arrival millisecond falls in the
    window (or an independent Bernoulli(rate) draw), then keep only those
    carrying the target country tag."""
    if not (0 < rate <= 1):
        raise ConfigError(f"rate must lie in (0, 1], got {rate}")
    if mode == "ms_window":
        lo, hi = window_ms
        width = hi - lo + 1
        if not (0 <= lo <= hi < 1000):
            raise ConfigError(f"window {window_ms} out of range")
        if abs(width / 1000.0 - rate) > 1e-9:
            raise ConfigError(
                f"window width {width}ms implies rate {width / 1000.0}, not {rate}"
            )
        offset = stream.ts % 1000
        keep = (offset >= lo) & (offset <= hi)
    elif mode == "bernoulli":
        rng = substream(seed, "stream-thinning")
        keep = rng.random(len(stream)) < rate
    else:
        raise ConfigError(f"unknown stream mode {mode!r}")
    if country is not None:
        keep &= stream.place == country
    return _dedupe(stream, keep, METHOD_STREAM)


def sample_location_query(stream: TweetStream, country: str = "US") -> SampleSet:
    return _dedupe(stream, stream.place == country, METHOD_LOC)


def sample_language_query(stream: TweetStream, country: str = "US",
                          language: str = "en") -> SampleSet:
    keep = (stream.place == country) & (stream.lang == language)
    return _dedupe(stream, keep, METHOD_LANG)


def sample_bounding_box(stream: TweetStream, tiles: TileSet,
                        place_fallback: bool = False,
                        country: str = "US") -> SampleSet:
    """Keep tweets whose coordinates fall inside the tile grid. With
    place_fallback, coordinate-less tweets match on the country tag
    instead (off by default: grid output should reflect coordinate
    availability only)."""
    if not len(tiles.boxes):
        raise DataError("tile set is empty")
    has_coords = ~np.isnan(stream.lat)
    keep = np.zeros(len(stream), dtype=bool)
    if has_coords.any():
        idx = np.nonzero(has_coords)[0]
        hit = covers_many(tiles, stream.lat[idx].astype(float),
                          stream.lon[idx].astype(float))
        keep[idx] = hit
    if place_fallback:
        keep |= (~has_coords) & (stream.place == country)
    return _dedupe(stream, keep, METHOD_BB)


def draw_users(sample: SampleSet, n: int, seed: int = 0) -> UserSample:
    """Uniform draw without replacement over the author set (not tweets)."""
    authors = sample.authors
    if n > len(authors):
        raise InsufficientUsersError(n, len(authors))
    rng = substream(seed, "draw-users", sample.method)
    order = rng.permutation(len(authors))[:n]
    return UserSample(method=sample.method,
                      users=tuple(int(authors[i]) for i in order), seed=seed)


def analytic_stream_inclusion(k: int, rate: float = 0.01) -> float:
    """P(author with k tweets is caught by an independent-thinning stream)."""
    if not (0 < rate <= 1):
        raise ConfigError(f"rate must lie in (0, 1], got {rate}")
    if k < 0:
        raise DataError("tweet count must be non-negative")
    return 1.0 - (1.0 - rate) ** k


# ---------------------------------------------------------------------------
# persistence

def write_sample_set(ids_path, summary_path, sample: SampleSet):
    with open(ids_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tweet_id"])
        for t in sample.tweets:
            writer.writerow([int(t)])
    summary = {
        "method": sample.method,
        "n_tweets": int(len(sample.tweets)),
        "n_authors": int(len(sample.authors)),
        "collection_window": list(sample.collection_window),
    }
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_user_sample(path, sample: UserSample):
    with open(path, "w", encoding="utf-8") as fh:
        for uid in sample.users:
            fh.write(f"{uid}\n")


def read_user_ids(path) -> list[int]:
    with open(path, encoding="utf-8") as fh:
        return [int(line) for line in fh if line.strip()]
