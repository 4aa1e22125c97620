import csv
import hashlib
import json
import os
import subprocess
import sys

import pytest

from samplab_plots import FigureSpec, RenderError, render


def sha256(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def write_summary_csv(path, methods=("bb", "loc", "lang", "stream1pct"),
                      specs=("total", "by_gender", "by_age", "by_age_gender",
                             "loglinear")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "spec", "variant", "level", "n_units", "mape",
                    "se", "n_skipped"])
        for i, m in enumerate(methods):
            for j, s in enumerate(specs):
                w.writerow([m, s, "main", "state", 50,
                            20.0 + 3 * i - 2 * j, 1.5, 0])


def write_pvalue_csv(path, value=1.0):
    methods = ["stream1pct", "loc", "lang", "bb"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method"] + methods)
        for m in methods:
            w.writerow([m] + [value] * len(methods))


def write_hist_csv(path, counts=(10, 25, 40, 5)):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count"])
        lo = 1.0
        for c in counts:
            w.writerow([lo, lo * 2, c])
            lo *= 2


def write_metrics_json(path):
    payload = {
        "loc": {
            "tweet_count": 1000,
            "state_counts": {"CA": 120, "TX": 90, "OH": 40, "WY": 1, "VT": 0},
        }
    }
    json.dump(payload, open(path, "w"))


def test_mape_bars_counts_and_outputs(tmp_path):
    summary = tmp_path / "summary.csv"
    write_summary_csv(summary)
    spec = FigureSpec(kind="mape_bars", inputs={"summary": str(summary)},
                      output=str(tmp_path / "fig_mape"), config_hash="cafe" * 8)
    before = sha256(summary)
    result = render(spec)
    assert result.n_bars == 20  # 4 methods x 5 specs
    assert os.path.getsize(result.png) > 0
    assert os.path.getsize(result.svg) > 0
    assert sha256(summary) == before
    assert "cafecafecafe" in open(result.svg).read()


def test_pvalue_heatmap_all_ones(tmp_path):
    pv = tmp_path / "pvalues.csv"
    write_pvalue_csv(pv, value=1.0)
    spec = FigureSpec(kind="pvalue_heatmap", inputs={"pvalues": str(pv)},
                      output=str(tmp_path / "fig_p"),
                      style={"metric": "tweets_per_day"}, config_hash="00" * 32)
    result = render(spec)
    assert result.n_cells == 16
    svg = open(result.svg).read()
    assert svg.count("1.00") >= 16  # unit annotations present
    assert os.path.getsize(result.png) > 0


def test_state_map_counts(tmp_path):
    metrics = tmp_path / "metrics.json"
    write_metrics_json(metrics)
    spec = FigureSpec(kind="state_map", inputs={"metrics": str(metrics)},
                      output=str(tmp_path / "fig_map"),
                      style={"method": "loc"}, config_hash="ab" * 32)
    result = render(spec)
    assert result.n_states == 51
    assert os.path.getsize(result.svg) > 0


def test_distributions_bin_mass_matches_input(tmp_path):
    paths = {}
    totals = {}
    for i, label in enumerate(("followers bb", "followers loc")):
        p = tmp_path / f"hist{i}.csv"
        counts = (10 + i, 25, 40, 5 * (i + 1))
        write_hist_csv(p, counts)
        paths[label] = str(p)
        totals[label] = sum(counts)
    spec = FigureSpec(kind="distributions", inputs={"histograms": paths},
                      output=str(tmp_path / "fig_dist"), config_hash="11" * 32)
    result = render(spec)
    assert result.bin_mass == totals
    # independent re-sum straight from the CSVs
    for label, p in paths.items():
        with open(p) as fh:
            expected = sum(int(r["count"]) for r in csv.DictReader(fh))
        assert result.bin_mass[label] == expected


def test_schema_errors_name_the_column(tmp_path):
    bad = tmp_path / "bad.csv"
    with open(bad, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "model", "variant", "mape", "se"])  # spec misnamed
        w.writerow(["bb", "total", "main", "20", "1"])
    spec = FigureSpec(kind="mape_bars", inputs={"summary": str(bad)},
                      output=str(tmp_path / "x"))
    with pytest.raises(RenderError, match="spec"):
        render(spec)
    with pytest.raises(RenderError, match="not found"):
        render(FigureSpec(kind="pvalue_heatmap",
                          inputs={"pvalues": str(tmp_path / "nope.csv")},
                          output=str(tmp_path / "y")))


def test_spec_json_validation(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"kind": "mape_bars", "inputs": {}}))
    with pytest.raises(RenderError, match="output"):
        FigureSpec.from_json(p)
    p.write_text(json.dumps({"kind": "pie", "inputs": {}, "output": "x"}))
    with pytest.raises(RenderError, match="kind"):
        FigureSpec.from_json(p)


def test_cli_render(tmp_path):
    summary = tmp_path / "summary.csv"
    write_summary_csv(summary)
    spec_path = tmp_path / "fig.json"
    spec_path.write_text(json.dumps({
        "kind": "mape_bars",
        "inputs": {"summary": str(summary)},
        "output": str(tmp_path / "out"),
        "config_hash": "ff" * 32,
    }))
    proc = subprocess.run(
        [sys.executable, "-m", "samplab_plots.cli", "render", "--spec", str(spec_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert os.path.exists(tmp_path / "out.png")
    assert os.path.exists(tmp_path / "out.svg")


def test_cli_missing_spec_is_clean_error(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "samplab_plots.cli", "render", "--spec",
         str(tmp_path / "missing.json")],
        capture_output=True, text=True)
    assert proc.returncode == 2
    assert "render error" in proc.stderr
    assert "Traceback" not in proc.stderr
