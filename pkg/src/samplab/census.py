"""Ground-truth population tables.

A population table holds one count per (geo unit, age bracket, gender)
cell. Tables load from CSV at state level and can be aggregated to Census
divisions or regions; DC is stored but excluded from analysis views unless
`include_dc` is set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

from . import geo
from .errors import DataError, SchemaError

AGE_BRACKETS = ("le18", "19-29", "30-39", "ge40")
GENDERS = ("m", "f")
CSV_HEADER = ["geo", "age_bracket", "gender", "count"]


@dataclass(frozen=True)
class DemographicCell:
    geo: str
    age: str
    gender: str
    count: int

    def __post_init__(self):
        if self.age not in AGE_BRACKETS:
            raise DataError(f"unknown age bracket {self.age!r}")
        if self.gender not in GENDERS:
            raise DataError(f"unknown gender {self.gender!r}")
        if self.count < 0:
            raise DataError(f"negative count for {self.geo}/{self.age}/{self.gender}")


@dataclass(frozen=True)
class PopulationTable:
    level: str
    cells: tuple[DemographicCell, ...]
    include_dc: bool = False

    def active_cells(self) -> list[DemographicCell]:
        """Cells in analysis scope (DC filtered out unless include_dc)."""
        if self.include_dc or self.level != geo.STATE_LEVEL:
            return list(self.cells)
        return [c for c in self.cells if c.geo != geo.DC]

    def geo_units(self) -> list[str]:
        return sorted({c.geo for c in self.active_cells()})

    def total(self) -> int:
        return sum(c.count for c in self.active_cells())

    def count(self, unit: str, age: str, gender: str) -> int:
        key = (unit, age, gender)
        return self._index()[key]

    def _index(self):
        idx = getattr(self, "_idx", None)
        if idx is None:
            idx = {(c.geo, c.age, c.gender): c.count for c in self.cells}
            object.__setattr__(self, "_idx", idx)
        return idx

    def with_dc(self, include_dc: bool) -> "PopulationTable":
        return replace(self, include_dc=include_dc)


def _validate_complete(cells_by_geo, require_complete):
    for unit, seen in cells_by_geo.items():
        for age in AGE_BRACKETS:
            for gender in GENDERS:
                if (age, gender) not in seen:
                    raise SchemaError(f"missing cell ({unit}, {age}, {gender})")
    if require_complete:
        missing = [s for s in geo.STATES_NO_DC if s not in cells_by_geo]
        if missing:
            raise SchemaError(f"missing state(s): {', '.join(missing)}")


def load_census(path, include_dc: bool = False,
                require_complete: bool = True) -> PopulationTable:
    """Load a state-level population table from CSV.

    The file must carry the header geo,age_bracket,gender,count; each
    present geo unit needs all 8 cells. With require_complete (default)
    all 50 states must be present; subsets are allowed for toy runs.
    """
    cells = []
    seen = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise SchemaError(f"bad header {header!r}, expected {CSV_HEADER}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise SchemaError(f"row {lineno}: expected 4 fields, got {len(row)}")
            unit, age, gender, count_s = row
            if unit not in geo.STATES:
                raise SchemaError(f"row {lineno}: unknown geo {unit!r}")
            if age not in AGE_BRACKETS:
                raise SchemaError(f"row {lineno}: unknown bracket label {age!r}")
            if gender not in GENDERS:
                raise SchemaError(f"row {lineno}: unknown gender {gender!r}")
            try:
                count = int(count_s)
            except ValueError:
                raise SchemaError(f"row {lineno}: non-integer count {count_s!r}")
            if count < 0:
                raise SchemaError(f"row {lineno}: negative count {count}")
            key = (age, gender)
            per_geo = seen.setdefault(unit, set())
            if key in per_geo:
                raise SchemaError(f"row {lineno}: duplicate cell ({unit}, {age}, {gender})")
            per_geo.add(key)
            cells.append(DemographicCell(unit, age, gender, count))
    _validate_complete(seen, require_complete)
    cells.sort(key=lambda c: (c.geo, AGE_BRACKETS.index(c.age), GENDERS.index(c.gender)))
    return PopulationTable(level=geo.STATE_LEVEL, cells=tuple(cells), include_dc=include_dc)


def write_census(table: PopulationTable, path):
    """Inverse of load_census; round-trips bit-exactly."""
    cells = sorted(
        table.cells,
        key=lambda c: (c.geo, AGE_BRACKETS.index(c.age), GENDERS.index(c.gender)),
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in cells:
            writer.writerow([c.geo, c.age, c.gender, c.count])


def aggregate(table: PopulationTable, level: str) -> PopulationTable:
    """Sum counts up to a coarser geographic level (sum-preserving)."""
    if level == table.level:
        return table
    if not geo.is_coarser(level, table.level):
        raise DataError(f"cannot aggregate {table.level} table to finer level {level}")
    if table.level != geo.STATE_LEVEL:
        raise DataError("aggregation is only supported from state level")
    sums = {}
    for c in table.active_cells():
        key = (geo.map_state(c.geo, level), c.age, c.gender)
        sums[key] = sums.get(key, 0) + c.count
    cells = tuple(
        DemographicCell(unit, age, gender, n)
        for (unit, age, gender), n in sorted(
            sums.items(),
            key=lambda kv: (kv[0][0], AGE_BRACKETS.index(kv[0][1]), GENDERS.index(kv[0][2])),
        )
    )
    return PopulationTable(level=level, cells=cells, include_dc=table.include_dc)


def marginals(table: PopulationTable, dims) -> dict:
    """Per-geo counts summed over the dropped dimension(s).

    `dims` names the kept dimensions, a non-empty subset of {age, gender}.
    Keys of the result are (geo,) plus the kept values in (age, gender)
    order.
    """
    dims = set(dims)
    if not dims:
        raise DataError("dims must be a non-empty subset of {'age', 'gender'}")
    if not dims <= {"age", "gender"}:
        raise DataError(f"unknown dims {dims - {'age', 'gender'}}")
    out = {}
    for c in table.active_cells():
        key = (c.geo,)
        if "age" in dims:
            key += (c.age,)
        if "gender" in dims:
            key += (c.gender,)
        out[key] = out.get(key, 0) + c.count
    return out


def bucket_single_year_ages(in_path, out_path, include_under_13: bool = True):
    """Convert a single-year-of-age CSV (header geo,age,gender,count with
    integer ages) into the four-bracket schema.

    Platform accounts require age 13+; `include_under_13` keeps younger
    persons in the le18 bracket anyway (the default convention), while
    False drops them from the ground truth.
    """
    sums = {}
    with open(in_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["geo", "age", "gender", "count"]:
            raise SchemaError(f"bad header {header!r}, expected geo,age,gender,count")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            unit, age_s, gender, count_s = row
            try:
                age = int(age_s)
                count = int(count_s)
            except ValueError:
                raise SchemaError(f"row {lineno}: non-integer age or count")
            if age < 0 or count < 0:
                raise SchemaError(f"row {lineno}: negative age or count")
            if age < 13 and not include_under_13:
                continue
            if age <= 18:
                bracket = "le18"
            elif age <= 29:
                bracket = "19-29"
            elif age <= 39:
                bracket = "30-39"
            else:
                bracket = "ge40"
            key = (unit, bracket, gender)
            sums[key] = sums.get(key, 0) + count
    units = sorted({k[0] for k in sums})
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for unit in units:
            for age in AGE_BRACKETS:
                for gender in GENDERS:
                    writer.writerow([unit, age, gender, sums.get((unit, age, gender), 0)])


def synthetic_table(n_states: int, total: int, seed: int,
                    include_dc: bool = False,
                    age_alpha=(6.0, 4.0, 4.0, 12.0),
                    male_range=(0.44, 0.56)) -> PopulationTable:
    """Random state-level table with heterogeneous cell compositions.

    Used by experiments and demos: state totals follow a rough power law
    and cell shares vary by state, so regression designs are full rank.
    Smaller `age_alpha` / wider `male_range` spread compositions further,
    which conditions joint-count regressions better.
    """
    from .rng import substream

    units = list(geo.STATES_NO_DC[:n_states])
    if include_dc:
        units.append(geo.DC)
    rng = substream(seed, "synthetic-census")
    weights = rng.pareto(1.5, size=len(units)) + 0.25
    weights /= weights.sum()
    cells = []
    for unit, w in zip(units, weights):
        state_total = max(8, int(round(w * total)))
        shares = rng.dirichlet(list(age_alpha))               # age profile
        male = rng.uniform(*male_range)
        remaining = state_total
        keys = [(a, g) for a in AGE_BRACKETS for g in GENDERS]
        for i, (age, gender) in enumerate(keys):
            frac = shares[AGE_BRACKETS.index(age)] * (male if gender == "m" else 1 - male)
            if i == len(keys) - 1:
                n = remaining
            else:
                n = min(remaining, int(round(frac * state_total)))
            remaining -= n
            cells.append(DemographicCell(unit, age, gender, n))
    cells.sort(key=lambda c: (c.geo, AGE_BRACKETS.index(c.age), GENDERS.index(c.gender)))
    return PopulationTable(level=geo.STATE_LEVEL, cells=tuple(cells), include_dc=include_dc)
