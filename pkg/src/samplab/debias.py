"""Design tables and the five population-estimation regressions.

A design table aligns platform user counts M with ground-truth counts N
per (geo, age, gender) cell. Five model specs relate them:

  total            N_i ~ M_i                      (no debiasing)
  by_gender        N_i ~ sum_g beta_g M_i(g)      (gender marginals)
  by_age           N_i ~ sum_a beta_a M_i(a)      (age marginals)
  by_age_gender    N_i ~ sum_ag beta_ag M_i(a,g)  (joint counts)
  loglinear        log N(a,g) ~ log M(a,g) + age + gender   (per cell)

The first four are intercept-free least squares on per-geo aggregates; the
log-linear model is least squares on per-cell rows with drop-one coding,
which is where demographic inclusion effects become directly estimable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import geo
from .census import AGE_BRACKETS, GENDERS, PopulationTable, aggregate
from .errors import DataError, SingularDesignError, UnpredictableUnitError

POLICY_DROP = "drop"
POLICY_KEEP = "keep"
POLICY_DROP_STATES = "drop_states"
ZERO_ROW_POLICIES = (POLICY_DROP, POLICY_KEEP, POLICY_DROP_STATES)

MODEL_TOTAL = "total"
MODEL_BY_GENDER = "by_gender"
MODEL_BY_AGE = "by_age"
MODEL_BY_AGE_GENDER = "by_age_gender"
MODEL_LOGLINEAR = "loglinear"
MODEL_SPECS = (MODEL_TOTAL, MODEL_BY_GENDER, MODEL_BY_AGE,
               MODEL_BY_AGE_GENDER, MODEL_LOGLINEAR)


@dataclass(frozen=True)
class DesignRow:
    geo: str
    age: str
    gender: str
    m: int  # platform users in the cell
    n: int  # ground-truth persons in the cell


@dataclass
class RegressionTable:
    level: str
    rows: list[DesignRow]
    zero_row_policy: str
    dropped_rows: int
    candidate_rows: int

    @property
    def dropped_fraction(self) -> float:
        return self.dropped_rows / self.candidate_rows if self.candidate_rows else 0.0

    def units(self) -> list[str]:
        return sorted({r.geo for r in self.rows})

    def unit_rows(self, unit: str) -> list[DesignRow]:
        # Canonical (age, gender) order so fits and predictions are exactly
        # invariant to input row order.
        return sorted(
            (r for r in self.rows if r.geo == unit),
            key=lambda r: (AGE_BRACKETS.index(r.age), GENDERS.index(r.gender)),
        )

    def without_unit(self, unit: str) -> "RegressionTable":
        return RegressionTable(
            level=self.level,
            rows=[r for r in self.rows if r.geo != unit],
            zero_row_policy=self.zero_row_policy,
            dropped_rows=self.dropped_rows,
            candidate_rows=self.candidate_rows,
        )


def build_design(labeled_users, census: PopulationTable, level: str = geo.STATE_LEVEL,
                 zero_row_policy: str = POLICY_DROP) -> RegressionTable:
    """Count observed users per cell and join ground truth.

    Users must carry observed (age, gender, state) labels; org-labeled or
    unlocated users should be excluded by the caller. Cells outside the
    census analysis scope (e.g. DC when include_dc is off) are ignored.
    """
    if zero_row_policy not in ZERO_ROW_POLICIES:
        raise DataError(f"unknown zero-row policy {zero_row_policy!r}")
    table = aggregate(census, level) if level != census.level else census
    units = table.geo_units()
    unit_set = set(units)

    counts = {}
    for l in labeled_users:
        if l.age is None or l.gender is None or l.state is None:
            raise DataError("labeled users must carry observed age/gender/state")
        unit = geo.map_state(l.state, level)
        if unit not in unit_set:
            continue
        key = (unit, l.age, l.gender)
        counts[key] = counts.get(key, 0) + 1

    truth = {(c.geo, c.age, c.gender): c.count for c in table.active_cells()}
    rows = [
        DesignRow(unit, age, gender, counts.get((unit, age, gender), 0),
                  truth[(unit, age, gender)])
        for unit in units
        for age in AGE_BRACKETS
        for gender in GENDERS
    ]
    candidate = len(rows)

    if zero_row_policy == POLICY_DROP:
        kept = [r for r in rows if r.m > 0]
    elif zero_row_policy == POLICY_DROP_STATES:
        bad_units = {r.geo for r in rows if r.m == 0}
        kept = [r for r in rows if r.geo not in bad_units]
    else:
        kept = rows
    return RegressionTable(
        level=level, rows=kept, zero_row_policy=zero_row_policy,
        dropped_rows=candidate - len(kept), candidate_rows=candidate,
    )


@dataclass
class FittedModel:
    spec: str
    coefficients: dict
    level: str
    diagnostics: dict

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {"spec": self.spec, "level": self.level,
                 "coefficients": self.coefficients, "diagnostics": self.diagnostics},
                fh, sort_keys=True, indent=1,
            )
            fh.write("\n")


def _aggregate_terms(table: RegressionTable, spec: str):
    """Per-geo response N_i and regressor columns for the linear specs."""
    units = table.units()
    if spec == MODEL_TOTAL:
        columns = ["m_total"]
    elif spec == MODEL_BY_GENDER:
        columns = [f"m_{g}" for g in GENDERS]
    elif spec == MODEL_BY_AGE:
        columns = [f"m_{a}" for a in AGE_BRACKETS]
    elif spec == MODEL_BY_AGE_GENDER:
        columns = [f"m_{a}_{g}" for a in AGE_BRACKETS for g in GENDERS]
    else:
        raise DataError(f"not a linear spec: {spec}")

    X = np.zeros((len(units), len(columns)))
    y = np.zeros(len(units))
    for i, unit in enumerate(units):
        rows = table.unit_rows(unit)
        y[i] = sum(r.n for r in rows)
        for r in rows:
            if spec == MODEL_TOTAL:
                X[i, 0] += r.m
            elif spec == MODEL_BY_GENDER:
                X[i, GENDERS.index(r.gender)] += r.m
            elif spec == MODEL_BY_AGE:
                X[i, AGE_BRACKETS.index(r.age)] += r.m
            else:
                X[i, AGE_BRACKETS.index(r.age) * len(GENDERS)
                    + GENDERS.index(r.gender)] += r.m
    return units, columns, X, y


def _loglinear_design(rows):
    """Per-cell log response and design with drop-one categorical coding."""
    usable = sorted(
        (r for r in rows if r.m > 0 and r.n > 0),
        key=lambda r: (r.geo, AGE_BRACKETS.index(r.age), GENDERS.index(r.gender)),
    )
    skipped = len(rows) - len(usable)
    columns = (["log_m", "intercept"]
               + [f"age_{a}" for a in AGE_BRACKETS[1:]]
               + [f"gender_{GENDERS[1]}"])
    X = np.zeros((len(usable), len(columns)))
    y = np.zeros(len(usable))
    for i, r in enumerate(usable):
        y[i] = math.log(r.n)
        X[i, 0] = math.log(r.m)
        X[i, 1] = 1.0
        a_i = AGE_BRACKETS.index(r.age)
        if a_i > 0:
            X[i, 1 + a_i] = 1.0
        if r.gender == GENDERS[1]:
            X[i, -1] = 1.0
    return columns, X, y, skipped


def _check_rank(X, columns):
    if X.shape[0] < X.shape[1] or np.linalg.matrix_rank(X) < X.shape[1]:
        # Pivoted QR flags the dependent columns by tiny R diagonal.
        _, r, piv = scipy.linalg.qr(X, pivoting=True, mode="economic")
        diag = np.abs(np.diag(r))
        tol = diag.max() * max(X.shape) * np.finfo(float).eps if diag.size else 0.0
        bad = [columns[piv[i]] for i in range(len(diag)) if diag[i] <= tol]
        bad = bad or list(columns)
        raise SingularDesignError(bad)


def fit_model(table: RegressionTable, spec: str, smooth_zeros: float = 0.0,
              intercept: bool = False) -> FittedModel:
    """Least-squares fit of one model spec on the design table.

    Linear specs are intercept-free by default (the proportional-inclusion
    reading); `intercept` adds one for sensitivity runs. `smooth_zeros` > 0
    (keep-policy tables only) offsets zero-M cells for the log-linear spec
    instead of dropping them.
    """
    if spec not in MODEL_SPECS:
        raise DataError(f"unknown model spec {spec!r}")
    if spec == MODEL_LOGLINEAR:
        rows = table.rows
        if smooth_zeros > 0:
            rows = [DesignRow(r.geo, r.age, r.gender,
                              r.m if r.m > 0 else smooth_zeros, r.n) for r in rows]
        columns, X, y, skipped = _loglinear_design(rows)
        _check_rank(X, columns)
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
        resid = y - X @ beta
        diagnostics = {
            "n_rows": int(len(y)),
            "skipped_rows": int(skipped),
            "rss": float(resid @ resid),
            "resid_sd": float(np.std(resid, ddof=min(len(columns), max(0, len(y) - 1)))
                              if len(y) > len(columns) else 0.0),
            "negative_coefficients": [],
        }
        coef = {c: float(b) for c, b in zip(columns, beta)}
        return FittedModel(spec=spec, coefficients=coef, level=table.level,
                           diagnostics=diagnostics)

    units, columns, X, y = _aggregate_terms(table, spec)
    if intercept:
        columns = columns + ["intercept"]
        X = np.column_stack([X, np.ones(len(units))])
    _check_rank(X, columns)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    negative = [c for c, b in zip(columns, beta) if b < 0]
    diagnostics = {
        "n_units": int(len(units)),
        "rss": float(resid @ resid),
        "resid_sd": float(np.std(resid, ddof=1) if len(y) > 1 else 0.0),
        "negative_coefficients": negative,
    }
    coef = {c: float(b) for c, b in zip(columns, beta)}
    return FittedModel(spec=spec, coefficients=coef, level=table.level,
                       diagnostics=diagnostics)


def predict_population(model: FittedModel, unit_rows) -> float:
    """Predicted ground-truth total for one geo unit's design rows."""
    rows = list(unit_rows)
    if not rows:
        raise UnpredictableUnitError("no usable cells for this unit")
    coef = model.coefficients
    shift = coef.get("intercept", 0.0) if model.spec != MODEL_LOGLINEAR else 0.0
    if model.spec == MODEL_TOTAL:
        return coef["m_total"] * sum(r.m for r in rows) + shift
    if model.spec == MODEL_BY_GENDER:
        return sum(coef[f"m_{r.gender}"] * r.m for r in rows) + shift
    if model.spec == MODEL_BY_AGE:
        return sum(coef[f"m_{r.age}"] * r.m for r in rows) + shift
    if model.spec == MODEL_BY_AGE_GENDER:
        return sum(coef[f"m_{r.age}_{r.gender}"] * r.m for r in rows) + shift
    if model.spec == MODEL_LOGLINEAR:
        usable = [r for r in rows if r.m > 0]
        if not usable:
            raise UnpredictableUnitError("all cells of this unit have zero counts")
        total = 0.0
        for r in usable:
            logn = (coef["log_m"] * math.log(r.m) + coef["intercept"]
                    + coef.get(f"age_{r.age}", 0.0)
                    + coef.get(f"gender_{r.gender}", 0.0))
            total += math.exp(logn)
        return total
    raise DataError(f"unknown model spec {model.spec!r}")


@dataclass(frozen=True)
class InclusionEstimate:
    age: str
    gender: str
    m: int
    n: int
    pi_hat: float
    ci: tuple[float, float]
    defined: bool


def inclusion_probabilities(table: RegressionTable) -> list[InclusionEstimate]:
    """pi(a, g) = sum_geo M / sum_geo N with binomial Wilson intervals."""
    from .snowflake import _wilson_interval

    out = []
    for age in AGE_BRACKETS:
        for gender in GENDERS:
            rows = [r for r in table.rows if r.age == age and r.gender == gender]
            m = sum(r.m for r in rows)
            n = sum(r.n for r in rows)
            if n == 0:
                out.append(InclusionEstimate(age, gender, m, n, float("nan"),
                                             (float("nan"), float("nan")), False))
                continue
            out.append(InclusionEstimate(
                age, gender, m, n, m / n, _wilson_interval(m, n), True,
            ))
    return out


def write_design_csv(path, table: RegressionTable):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["geo", "age", "gender", "M", "N"])
        for r in sorted(table.rows, key=lambda r: (r.geo, AGE_BRACKETS.index(r.age),
                                                   GENDERS.index(r.gender))):
            writer.writerow([r.geo, r.age, r.gender, r.m, r.n])


def read_design_csv(path, level: str, zero_row_policy: str = POLICY_DROP,
                    candidate_rows: int | None = None) -> RegressionTable:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(DesignRow(rec["geo"], rec["age"], rec["gender"],
                                  int(rec["M"]), int(rec["N"])))
    candidate = candidate_rows if candidate_rows is not None else len(rows)
    return RegressionTable(level=level, rows=rows, zero_row_policy=zero_row_policy,
                           dropped_rows=candidate - len(rows), candidate_rows=candidate)
