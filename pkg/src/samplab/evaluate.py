"""Estimation quality: mean absolute percentage error, leave-one-geo-out
cross-validation with clustered error bars, robustness variants, and
missing-demographic-group accounting.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import geo
from .census import AGE_BRACKETS, GENDERS, PopulationTable
from .debias import (MODEL_SPECS, POLICY_DROP, POLICY_DROP_STATES,
                     RegressionTable, build_design, fit_model,
                     predict_population)
from .errors import DataError, SingularDesignError, UnpredictableUnitError
from .inference import drop_org_labeled, infer_all
from .preprocess import apply_filters, subsample, with_overrides
from .rng import substream

VARIANT_MAIN = "main"
VARIANT_INCLUDE_DC = "include_dc"
VARIANT_DROP_MISSING = "drop_missing_states"
VARIANT_DIVISION = "division_level"
VARIANT_MIN_TWEETS_200 = "min_tweets_200"
VARIANT_TENURE_12MO = "tenure_12mo"
VARIANTS = (VARIANT_INCLUDE_DC, VARIANT_DROP_MISSING, VARIANT_DIVISION,
            VARIANT_MIN_TWEETS_200, VARIANT_TENURE_12MO)


@dataclass
class EstimateReport:
    method: str
    spec: str
    level: str
    variant: str
    per_unit: list          # [(geo, actual N, predicted N, APE percent)]
    mape: float
    se: float
    skipped: list = field(default_factory=list)  # [(geo, reason)]

    def n_units(self) -> int:
        return len(self.per_unit)


def mape(predictions, actuals) -> float:
    """Mean absolute percentage error, in percent."""
    preds = list(predictions)
    acts = list(actuals)
    if len(preds) != len(acts) or not preds:
        raise DataError("predictions and actuals must be equal-length and non-empty")
    total = 0.0
    for i, (p, a) in enumerate(zip(preds, acts)):
        if a == 0:
            raise DataError(f"actual value is zero for unit index {i}")
        total += 100.0 * abs(p - a) / abs(a)
    return total / len(preds)


def loso_cv(table: RegressionTable, spec: str, method: str = "",
            variant: str = VARIANT_MAIN) -> EstimateReport:
    """Leave-one-geo-unit-out: fit on the rest, predict the held-out total.

    The clustered standard error degenerates to the standard error of
    per-unit APEs (one observation per cluster).
    """
    units = table.units()
    if len(units) < 3:
        raise DataError(f"need at least 3 geo units, have {len(units)}")
    per_unit = []
    skipped = []
    for unit in units:
        rest = table.without_unit(unit)
        held = table.unit_rows(unit)
        actual = sum(r.n for r in held)
        try:
            model = fit_model(rest, spec)
            pred = predict_population(model, held)
        except (SingularDesignError, UnpredictableUnitError) as exc:
            skipped.append((unit, str(exc)))
            continue
        if actual == 0:
            skipped.append((unit, "zero ground-truth population"))
            continue
        ape = 100.0 * abs(pred - actual) / abs(actual)
        per_unit.append((unit, float(actual), float(pred), float(ape)))
    if not per_unit:
        raise DataError("no predictable units")
    apes = np.asarray([u[3] for u in per_unit])
    se = float(np.std(apes, ddof=1) / math.sqrt(len(apes))) if len(apes) > 1 else 0.0
    return EstimateReport(
        method=method, spec=spec, level=table.level, variant=variant,
        per_unit=per_unit, mape=float(apes.mean()), se=se, skipped=skipped,
    )


def missing_groups(labeled_by_method: dict, level: str = geo.STATE_LEVEL,
                   sizes=(5000, 8000, 10000), seed: int = 0,
                   include_dc: bool = False) -> dict:
    """Per method and sample size: number of geo units lacking at least one
    (age, gender) cell. Subsamples are nested so counts are comparable."""
    units = geo.geo_units(level, include_dc)
    full_cells = len(AGE_BRACKETS) * len(GENDERS)
    out = {}
    for method, labeled in labeled_by_method.items():
        rng = substream(seed, "missing-groups", method)
        order = rng.permutation(len(labeled))
        out[method] = {}
        for size in sizes:
            if size > len(labeled):
                raise DataError(
                    f"{method}: sample of {size} exceeds {len(labeled)} labeled users"
                )
            seen = {}
            for i in order[:size]:
                l = labeled[i]
                unit = geo.map_state(l.state, level)
                if unit in units:
                    seen.setdefault(unit, set()).add((l.age, l.gender))
            lacking = sum(
                1 for u in units if len(seen.get(u, ())) < full_cells
            )
            out[method][size] = lacking
    return out


@dataclass(frozen=True)
class RobustnessInputs:
    """Materialized pipeline state the variants re-run from."""

    users30k_by_method: dict
    census: PopulationTable
    filter_config: object
    confusion_spec: object
    n_final: int
    seed: int
    as_of: object = None
    specs: tuple = MODEL_SPECS


def _tail_pipeline(users30k, census, filter_cfg, confusion, n_final, seed,
                   as_of, level, policy, include_dc):
    """30K users -> filters -> final draw -> labels -> design table."""
    retained, _ = apply_filters(users30k, filter_cfg, as_of=as_of, seed=seed)
    n = min(n_final, len(retained))
    final = subsample(retained, n, seed=seed)
    labeled = drop_org_labeled(infer_all(final, confusion, seed=seed))
    located = [l for l in labeled if l.state is not None]
    return build_design(located, census.with_dc(include_dc), level=level,
                        zero_row_policy=policy)


def robustness_suite(inputs: RobustnessInputs, variants=VARIANTS) -> list[EstimateReport]:
    """Re-run the analysis tail under each variant, producing the full
    methods-by-specs grid of leave-one-unit-out reports per variant."""
    reports = []
    for variant in variants:
        level = geo.DIVISION_LEVEL if variant == VARIANT_DIVISION else geo.STATE_LEVEL
        policy = POLICY_DROP_STATES if variant == VARIANT_DROP_MISSING else POLICY_DROP
        include_dc = variant == VARIANT_INCLUDE_DC
        filter_cfg = inputs.filter_config
        if variant == VARIANT_MIN_TWEETS_200:
            filter_cfg = with_overrides(filter_cfg, min_tweets=200)
        elif variant == VARIANT_TENURE_12MO:
            filter_cfg = with_overrides(filter_cfg, min_tenure_months=12)
        tables = {}
        for method, users30k in inputs.users30k_by_method.items():
            try:
                tables[method] = _tail_pipeline(
                    users30k, inputs.census, filter_cfg, inputs.confusion_spec,
                    inputs.n_final, inputs.seed, inputs.as_of, level, policy,
                    include_dc,
                )
            except DataError as exc:
                raise DataError(f"variant {variant}, method {method}: {exc}") from exc
        for method, table in tables.items():
            for spec in inputs.specs:
                try:
                    report = loso_cv(table, spec, method=method, variant=variant)
                except (DataError, SingularDesignError) as exc:
                    raise DataError(
                        f"variant {variant}, method {method}, spec {spec}: {exc}"
                    ) from exc
                reports.append(report)
    return reports


def write_reports_csv(path, reports):
    """Flat per-unit estimates: method,spec,variant,geo,N,Nhat,APE."""
    from .io import fmt_float

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "spec", "variant", "geo", "N", "Nhat", "APE"])
        for rep in reports:
            for unit, actual, pred, ape in rep.per_unit:
                writer.writerow([rep.method, rep.spec, rep.variant, unit,
                                 fmt_float(actual), fmt_float(pred), fmt_float(ape)])


def report_to_dict(rep: EstimateReport) -> dict:
    return {
        "method": rep.method, "spec": rep.spec, "level": rep.level,
        "variant": rep.variant, "mape": rep.mape, "se": rep.se,
        "per_unit": [
            {"geo": g, "N": n, "Nhat": nh, "APE": ape}
            for g, n, nh, ape in rep.per_unit
        ],
        "skipped": [{"geo": g, "reason": r} for g, r in rep.skipped],
    }


def write_reports_json(path, reports):
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump([report_to_dict(r) for r in reports], fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_summary_csv(path, reports):
    from .io import fmt_float

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "spec", "variant", "level", "n_units",
                         "mape", "se", "n_skipped"])
        for rep in reports:
            writer.writerow([
                rep.method, rep.spec, rep.variant, rep.level, rep.n_units(),
                fmt_float(rep.mape), fmt_float(rep.se), len(rep.skipped),
            ])
