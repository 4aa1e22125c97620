"""Demographic and location inference as noisy channels over latent truth.

A trained profile classifier is replaced by row-stochastic confusion
matrices for age, gender, and organization status; state-level location
inference becomes a correct-with-probability channel with a configurable
error model. The identity spec makes every label an oracle label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import geo
from .census import AGE_BRACKETS, GENDERS
from .errors import DataError
from .rng import substream

UNIFORM_OTHER_STATE = "uniform_other_state"
NEIGHBOR_STATE = "neighbor_state"


def _check_row_stochastic(name, matrix, size):
    m = np.asarray(matrix, dtype=float)
    if m.shape != (size, size):
        raise DataError(f"{name} must be {size}x{size}")
    if (m < 0).any():
        raise DataError(f"{name} has negative entries")
    if np.abs(m.sum(axis=1) - 1.0).max() > 1e-9:
        raise DataError(f"{name} rows must sum to 1")
    return m


@dataclass(frozen=True)
class ConfusionSpec:
    age_matrix: tuple
    gender_matrix: tuple
    org_matrix: tuple
    location_accuracy: float = 1.0
    location_error_model: str = UNIFORM_OTHER_STATE

    def __post_init__(self):
        _check_row_stochastic("age_matrix", self.age_matrix, 4)
        _check_row_stochastic("gender_matrix", self.gender_matrix, 2)
        _check_row_stochastic("org_matrix", self.org_matrix, 2)
        if not (0.0 <= self.location_accuracy <= 1.0):
            raise DataError("location_accuracy must lie in [0, 1]")
        if self.location_error_model not in (UNIFORM_OTHER_STATE, NEIGHBOR_STATE):
            raise DataError(
                f"unknown location error model {self.location_error_model!r}"
            )

    @classmethod
    def identity(cls) -> "ConfusionSpec":
        eye4 = tuple(tuple(float(x) for x in row) for row in np.eye(4))
        eye2 = tuple(tuple(float(x) for x in row) for row in np.eye(2))
        return cls(age_matrix=eye4, gender_matrix=eye2, org_matrix=eye2)

    def to_dict(self) -> dict:
        return {
            "age_matrix": [list(r) for r in self.age_matrix],
            "gender_matrix": [list(r) for r in self.gender_matrix],
            "org_matrix": [list(r) for r in self.org_matrix],
            "location_accuracy": self.location_accuracy,
            "location_error_model": self.location_error_model,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionSpec":
        return cls(
            age_matrix=tuple(tuple(r) for r in d["age_matrix"]),
            gender_matrix=tuple(tuple(r) for r in d["gender_matrix"]),
            org_matrix=tuple(tuple(r) for r in d["org_matrix"]),
            location_accuracy=d.get("location_accuracy", 1.0),
            location_error_model=d.get("location_error_model", UNIFORM_OTHER_STATE),
        )

    @classmethod
    def from_json(cls, path) -> "ConfusionSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class LabeledUser:
    """A user plus its observed (inferred) labels."""

    user: object
    age: str | None = None
    gender: str | None = None
    org: bool | None = None
    state: str | None = None


def _draw_categories(rows, matrix, rng) -> np.ndarray:
    """Vectorized draw of observed category indices given true indices."""
    m = np.asarray(matrix, dtype=float)
    cdf = np.cumsum(m, axis=1)
    u = rng.random(len(rows))
    return (u[:, None] > cdf[rows]).sum(axis=1)


def infer_demographics(users, spec: ConfusionSpec, seed: int = 0) -> list[LabeledUser]:
    """Draw observed (age, gender, org) labels from the confusion rows."""
    labeled = [u if isinstance(u, LabeledUser) else LabeledUser(user=u) for u in users]
    n = len(labeled)
    if n == 0:
        return labeled
    rng = substream(seed, "infer-demographics")
    age_idx = np.fromiter(
        (AGE_BRACKETS.index(l.user.true_age) for l in labeled), np.int64, count=n
    )
    gen_idx = np.fromiter(
        (GENDERS.index(l.user.true_gender) for l in labeled), np.int64, count=n
    )
    org_idx = np.fromiter((int(l.user.is_org) for l in labeled), np.int64, count=n)
    obs_age = _draw_categories(age_idx, spec.age_matrix, rng)
    obs_gen = _draw_categories(gen_idx, spec.gender_matrix, rng)
    obs_org = _draw_categories(org_idx, spec.org_matrix, rng)
    for i, l in enumerate(labeled):
        l.age = AGE_BRACKETS[obs_age[i]]
        l.gender = GENDERS[obs_gen[i]]
        l.org = bool(obs_org[i])
    return labeled


def infer_location(users, spec: ConfusionSpec, seed: int = 0) -> list[LabeledUser]:
    """Label each user with a state: correct with probability
    location_accuracy, otherwise per the configured error model."""
    labeled = [u if isinstance(u, LabeledUser) else LabeledUser(user=u) for u in users]
    n = len(labeled)
    if n == 0:
        return labeled
    rng = substream(seed, "infer-location")
    correct = rng.random(n) < spec.location_accuracy
    all_states = list(geo.STATES)
    for i, l in enumerate(labeled):
        true_state = l.user.true_state
        if correct[i]:
            l.state = true_state
            continue
        if spec.location_error_model == NEIGHBOR_STATE:
            neighbors = geo.ADJACENCY.get(true_state, ())
            if neighbors:
                l.state = neighbors[int(rng.integers(0, len(neighbors)))]
                continue
        others = [s for s in all_states if s != true_state]
        l.state = others[int(rng.integers(0, len(others)))]
    return labeled


def infer_all(users, spec: ConfusionSpec, seed: int = 0) -> list[LabeledUser]:
    return infer_location(infer_demographics(users, spec, seed), spec, seed)


def drop_org_labeled(labeled) -> list[LabeledUser]:
    """Organization-labeled accounts are excluded from analysis."""
    return [l for l in labeled if not l.org]


# JSON-lines export of labels appended to user rows.
def labeled_to_dict(l: LabeledUser) -> dict:
    from .worldgen import user_to_dict

    d = user_to_dict(l.user)
    d.update({"obs_age": l.age, "obs_gender": l.gender,
              "obs_org": l.org, "obs_state": l.state})
    return d


def labeled_from_dict(d: dict) -> LabeledUser:
    from .worldgen import user_from_dict

    d = dict(d)
    labels = {k: d.pop(k) for k in ("obs_age", "obs_gender", "obs_org", "obs_state")}
    return LabeledUser(
        user=user_from_dict(d), age=labels["obs_age"], gender=labels["obs_gender"],
        org=labels["obs_org"], state=labels["obs_state"],
    )
