"""Time-sortable 64-bit id generation and the random-id account probing
protocol.

Ids pack a 41-bit millisecond timestamp, 10-bit machine id, and 12-bit
per-millisecond sequence. The prober batches 1000 candidate ids (5 legacy
32-bit serials that were never emitted before, 995 fresh ids restricted to
a past time range) and estimates hit rates against a validity oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ClockError, ConfigError, DataError, ExhaustionError
from .rng import substream

TIMESTAMP_BITS = 41
MACHINE_BITS = 10
SEQUENCE_BITS = 12
MAX_MACHINE = 1 << MACHINE_BITS      # 1024
MAX_SEQUENCE = 1 << SEQUENCE_BITS    # 4096

# The platform's id epoch: date the time-sortable scheme went live. Ids
# produced by the world generator and by the prober share this offset.
DEFAULT_EPOCH_MS = 1_288_834_974_657

OLD_COUNT = 5
NEW_COUNT = 995
BATCH_SIZE = OLD_COUNT + NEW_COUNT

INVALID = "invalid"
VALID = "valid"
VALID_IN_COUNTRY = "valid_in_country"


def compose(timestamp_ms: int, machine: int, sequence: int, epoch_ms: int = 0) -> int:
    rel = timestamp_ms - epoch_ms
    if rel < 0 or rel >= (1 << TIMESTAMP_BITS):
        raise DataError(f"timestamp {timestamp_ms} out of the 41-bit range")
    if not (0 <= machine < MAX_MACHINE):
        raise DataError(f"machine id {machine} out of range")
    if not (0 <= sequence < MAX_SEQUENCE):
        raise DataError(f"sequence {sequence} out of range")
    return (rel << (MACHINE_BITS + SEQUENCE_BITS)) | (machine << SEQUENCE_BITS) | sequence


def decompose(raw: int, epoch_ms: int = 0) -> tuple[int, int, int]:
    """(timestamp_ms, machine, sequence) of a packed id."""
    if raw < 0:
        raise DataError("ids are unsigned")
    ts = (raw >> (MACHINE_BITS + SEQUENCE_BITS)) + epoch_ms
    machine = (raw >> SEQUENCE_BITS) & (MAX_MACHINE - 1)
    seq = raw & (MAX_SEQUENCE - 1)
    return ts, machine, seq


@dataclass
class SnowflakeGenerator:
    """Single-machine generator; callers supply the clock reading.

    Ids are strictly increasing per machine. The sequence resets each new
    millisecond; on overflow the generator advances its own clock by 1 ms.
    Clock regressions raise.
    """

    machine: int = 0
    epoch_ms: int = 0
    last_ts: int = -1
    sequence: int = -1

    def __post_init__(self):
        if not (0 <= self.machine < MAX_MACHINE):
            raise ConfigError(f"machine id must be < {MAX_MACHINE}")

    def next_id(self, now_ms: int | None = None) -> int:
        now = self.last_ts if now_ms is None and self.last_ts >= 0 else now_ms
        if now is None:
            now = self.epoch_ms
        if now < self.last_ts:
            raise ClockError(f"clock moved backwards: {now} < {self.last_ts}")
        if now == self.last_ts:
            self.sequence += 1
            if self.sequence >= MAX_SEQUENCE:
                now += 1  # sequence exhausted: advance into the next millisecond
                self.sequence = 0
        else:
            self.sequence = 0
        self.last_ts = now
        return compose(now, self.machine, self.sequence, self.epoch_ms)


@dataclass(frozen=True)
class IdBatch:
    old_ids: tuple
    new_ids: tuple
    seed: int
    time_range: tuple[int, int]

    @property
    def ids(self) -> tuple:
        return self.old_ids + self.new_ids

    def __post_init__(self):
        if len(self.old_ids) != OLD_COUNT or len(self.new_ids) != NEW_COUNT:
            raise DataError(
                f"batch must hold exactly {OLD_COUNT} old + {NEW_COUNT} new ids"
            )


class RandomIdSampler:
    """Candidate-id batch generator with a no-repeat guarantee on legacy ids.

    `time_range` is absolute epoch milliseconds; new-id timestamps are
    packed relative to the platform id epoch like every real id.
    """

    def __init__(self, epoch_ms: int = DEFAULT_EPOCH_MS):
        self.epoch_ms = epoch_ms
        self._used_old: set[int] = set()

    def candidate_batch(self, seed: int, time_range) -> IdBatch:
        lo, hi = int(time_range[0]), int(time_range[1])
        if hi <= lo:
            raise DataError("time_range must be a non-empty (start_ms, end_ms)")
        rel_lo, rel_hi = lo - self.epoch_ms, hi - self.epoch_ms
        if rel_lo < 0 or rel_hi >= (1 << TIMESTAMP_BITS):
            raise DataError("time_range outside the id scheme's 41-bit lifetime")
        rng = substream(seed, "id-batch")
        old = []
        attempts = 0
        while len(old) < OLD_COUNT:
            candidate = int(rng.integers(1, 2**32))
            attempts += 1
            if attempts > 1000 * OLD_COUNT:
                raise ExhaustionError("32-bit id space effectively exhausted")
            if candidate not in self._used_old:
                self._used_old.add(candidate)
                old.append(candidate)
        ts = rng.integers(rel_lo, rel_hi, size=NEW_COUNT, dtype=np.uint64)
        machine = rng.integers(0, MAX_MACHINE, size=NEW_COUNT, dtype=np.uint64)
        seq = rng.integers(0, MAX_SEQUENCE, size=NEW_COUNT, dtype=np.uint64)
        packed = (ts << np.uint64(MACHINE_BITS + SEQUENCE_BITS)) \
            | (machine << np.uint64(SEQUENCE_BITS)) | seq
        new = tuple(int(x) for x in packed)
        return IdBatch(old_ids=tuple(old), new_ids=new, seed=seed,
                       time_range=(lo, hi))


def gen_candidate_batch(seed: int, time_range,
                        epoch_ms: int = DEFAULT_EPOCH_MS) -> IdBatch:
    """One-off batch without cross-batch legacy-id history."""
    return RandomIdSampler(epoch_ms).candidate_batch(seed, time_range)


def _wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    denom = 1 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class HitRateEstimate:
    n_generated: int
    n_valid: int
    n_valid_in_country: int
    hit_rate: float
    country_rate: float
    hit_rate_ci: tuple[float, float]
    country_rate_ci: tuple[float, float]


def estimate_hit_rate(batches, validity_oracle) -> HitRateEstimate:
    """Probe every candidate id through the oracle and report the fraction
    of existing accounts and of accounts in the target country, with
    binomial (Wilson) intervals."""
    batches = list(batches)
    if not batches:
        raise DataError("no batches to evaluate")
    n = 0
    valid = 0
    in_country = 0
    for batch in batches:
        for raw in batch.ids:
            n += 1
            verdict = validity_oracle(raw)
            if verdict == VALID:
                valid += 1
            elif verdict == VALID_IN_COUNTRY:
                valid += 1
                in_country += 1
            elif verdict != INVALID:
                raise DataError(f"oracle returned unknown verdict {verdict!r}")
    return HitRateEstimate(
        n_generated=n,
        n_valid=valid,
        n_valid_in_country=in_country,
        hit_rate=valid / n,
        country_rate=in_country / n,
        hit_rate_ci=_wilson_interval(valid, n),
        country_rate_ci=_wilson_interval(in_country, n),
    )


def world_oracle(world, country_states=None):
    """Validity oracle backed by a synthetic world's id index."""
    states = set(country_states) if country_states is not None else None
    index = {u.user_id: u.true_state for u in world}

    def oracle(raw: int) -> str:
        state = index.get(int(raw))
        if state is None:
            return INVALID
        if states is None or state in states:
            return VALID_IN_COUNTRY
        return VALID

    return oracle


def write_batches(ids_path, sidecar_path, batches):
    batches = list(batches)
    with open(ids_path, "w", encoding="utf-8") as fh:
        for batch in batches:
            for raw in batch.ids:
                fh.write(f"{raw}\n")
    sidecar = {
        "batches": [
            {
                "seed": b.seed,
                "time_range": list(b.time_range),
                "old_count": len(b.old_ids),
                "new_count": len(b.new_ids),
            }
            for b in batches
        ]
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=1)
        fh.write("\n")
