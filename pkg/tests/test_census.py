import csv

import pytest
from hypothesis import given, settings, strategies as st

from samplab import census, geo
from samplab.errors import DataError, SchemaError

FIXTURE = "src/samplab/data/census_us_states.csv"


def write_rows(path, rows, header=("geo", "age_bracket", "gender", "count")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def uniform_rows(units, count=1):
    return [
        [u, a, g, count]
        for u in units
        for a in census.AGE_BRACKETS
        for g in census.GENDERS
    ]


def test_uniform_full_file_totals(tmp_path):
    path = tmp_path / "census.csv"
    write_rows(path, uniform_rows(geo.STATES))
    table = census.load_census(path, include_dc=True)
    assert table.total() == 408
    assert len(table.geo_units()) == 51
    assert census.load_census(path).total() == 400  # DC excluded by default


def test_missing_cell_is_schema_error(tmp_path):
    rows = [r for r in uniform_rows(geo.STATES) if r[:3] != ["WY", "ge40", "f"]]
    path = tmp_path / "census.csv"
    write_rows(path, rows)
    with pytest.raises(SchemaError, match="missing cell"):
        census.load_census(path)


def test_missing_state_is_schema_error(tmp_path):
    units = [s for s in geo.STATES_NO_DC if s != "VT"]
    path = tmp_path / "census.csv"
    write_rows(path, uniform_rows(units))
    with pytest.raises(SchemaError, match="missing state"):
        census.load_census(path)
    # subsets are fine for toy runs when completeness is waived
    table = census.load_census(path, require_complete=False)
    assert len(table.geo_units()) == 49


@pytest.mark.parametrize("row,message", [
    (["OH", "ge40", "f", "-3"], "negative"),
    (["OH", "80plus", "f", "5"], "bracket"),
    (["ZZ", "ge40", "f", "5"], "unknown geo"),
    (["OH", "ge40", "x", "5"], "gender"),
    (["OH", "ge40", "f", "many"], "non-integer"),
])
def test_bad_rows_name_the_line(tmp_path, row, message):
    rows = uniform_rows(["OH"]) + [row]
    path = tmp_path / "census.csv"
    write_rows(path, rows)
    with pytest.raises(SchemaError, match=message) as err:
        census.load_census(path, require_complete=False)
    assert "row 10" in str(err.value)


def test_duplicate_cell_rejected(tmp_path):
    rows = uniform_rows(["OH"]) + [["OH", "le18", "m", "2"]]
    path = tmp_path / "census.csv"
    write_rows(path, rows)
    with pytest.raises(SchemaError, match="duplicate"):
        census.load_census(path, require_complete=False)


def test_bad_header(tmp_path):
    path = tmp_path / "census.csv"
    write_rows(path, uniform_rows(["OH"]), header=("state", "age", "sex", "n"))
    with pytest.raises(SchemaError, match="header"):
        census.load_census(path, require_complete=False)


def test_fixture_totals_match_independent_recompute():
    # Second route: pandas groupby, fully independent of the loader.
    import pandas as pd

    table = census.load_census(FIXTURE, include_dc=True)
    df = pd.read_csv(FIXTURE)
    expected = df.groupby("geo")["count"].sum().to_dict()
    for unit in table.geo_units():
        loaded = sum(c.count for c in table.cells if c.geo == unit)
        assert loaded == expected[unit]
    assert table.total() == int(df["count"].sum())


def test_aggregate_new_england_count(tmp_path):
    path = tmp_path / "census.csv"
    write_rows(path, uniform_rows(geo.STATES))
    table = census.load_census(path)
    div = census.aggregate(table, geo.DIVISION_LEVEL)
    # 6 member states, all cells 1
    assert div.count("new_england", "le18", "m") == 6
    assert len(div.geo_units()) == 9
    reg = census.aggregate(table, geo.REGION_LEVEL)
    assert len(reg.geo_units()) == 4


def test_aggregate_identity_and_errors():
    table = census.synthetic_table(8, 10_000, seed=1)
    assert census.aggregate(table, geo.STATE_LEVEL) is table
    div = census.aggregate(table, geo.DIVISION_LEVEL)
    with pytest.raises(DataError, match="finer"):
        census.aggregate(div, geo.STATE_LEVEL)


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_aggregate_conserves_total(seed):
    table = census.synthetic_table(12, 50_000, seed=seed)
    for level in (geo.DIVISION_LEVEL, geo.REGION_LEVEL):
        assert census.aggregate(table, level).total() == table.total()


def test_marginals_uniform(tmp_path):
    path = tmp_path / "census.csv"
    write_rows(path, uniform_rows(geo.STATES))
    table = census.load_census(path)
    gender_marg = census.marginals(table, {"gender"})
    assert all(v == 4 for v in gender_marg.values())
    assert len(gender_marg) == 50 * 2
    joint = census.marginals(table, {"age", "gender"})
    assert len(joint) == 50 * 8 and all(v == 1 for v in joint.values())


def test_marginals_match_bruteforce_resummation():
    table = census.synthetic_table(9, 90_000, seed=44)
    marg = census.marginals(table, {"age"})
    # brute-force second route over raw cells
    for unit in table.geo_units():
        for age in census.AGE_BRACKETS:
            expected = sum(c.count for c in table.active_cells()
                           if c.geo == unit and c.age == age)
            assert marg[(unit, age)] == expected
    # marginals partition each geo total
    for unit in table.geo_units():
        geo_total = sum(c.count for c in table.active_cells() if c.geo == unit)
        assert sum(v for (u, _), v in marg.items() if u == unit) == geo_total


def test_marginals_empty_dims_error():
    table = census.synthetic_table(4, 1000, seed=0)
    with pytest.raises(DataError):
        census.marginals(table, set())
    with pytest.raises(DataError):
        census.marginals(table, {"height"})


def test_roundtrip_bit_exact(tmp_path):
    src = tmp_path / "a.csv"
    dst = tmp_path / "b.csv"
    write_rows(src, uniform_rows(geo.STATES, count=7))
    table = census.load_census(src)
    census.write_census(table, dst)
    reloaded = census.load_census(dst)
    assert reloaded.cells == table.cells
    census.write_census(reloaded, src)
    assert src.read_bytes() == dst.read_bytes()


def test_bucket_single_year_ages(tmp_path):
    src = tmp_path / "single.csv"
    rows = [
        ["OH", "5", "m", "10"],    # under 13
        ["OH", "15", "m", "20"],
        ["OH", "18", "m", "5"],
        ["OH", "19", "m", "7"],
        ["OH", "29", "m", "3"],
        ["OH", "35", "m", "9"],
        ["OH", "40", "m", "11"],
        ["OH", "85", "m", "2"],
        ["OH", "30", "f", "4"],
    ]
    with open(src, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["geo", "age", "gender", "count"])
        w.writerows(rows)
    out = tmp_path / "bucketed.csv"
    census.bucket_single_year_ages(src, out)
    table = census.load_census(out, require_complete=False)
    assert table.count("OH", "le18", "m") == 35   # 10 + 20 + 5
    assert table.count("OH", "19-29", "m") == 10
    assert table.count("OH", "30-39", "m") == 9
    assert table.count("OH", "ge40", "m") == 13
    assert table.count("OH", "30-39", "f") == 4

    out2 = tmp_path / "bucketed13.csv"
    census.bucket_single_year_ages(src, out2, include_under_13=False)
    table2 = census.load_census(out2, require_complete=False)
    assert table2.count("OH", "le18", "m") == 25  # drops the age-5 row

    bad = tmp_path / "bad.csv"
    bad.write_text("geo,age,gender,count\nOH,adult,m,5\n")
    with pytest.raises(SchemaError, match="row 2"):
        census.bucket_single_year_ages(bad, out)
