"""Figure rendering from samplab's persisted artifacts.

Four figure kinds, all consuming only the pipeline's CSV/JSON files:

  distributions   small multiples from exported histogram CSVs
  pvalue_heatmap  annotated matrix from a pairwise p-value CSV
  state_map       schematic per-state count map (tile-grid layout)
  mape_bars       grouped MAPE bars with error whiskers per variant

Rendering never mutates its inputs; each figure embeds the producing
run's config hash in its caption.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"  # keep SVG text inspectable

import matplotlib.pyplot as plt
import numpy as np


class RenderError(Exception):
    """Bad figure spec or input schema; the message names what is missing."""


FIGURE_KINDS = ("distributions", "pvalue_heatmap", "state_map", "mape_bars")

DEFAULT_METHOD_ORDER = ("bb", "loc", "lang", "stream1pct")
METHOD_LABELS = {"bb": "BB", "loc": "Loc", "lang": "Lang", "stream1pct": "1% Stream"}
SPEC_LABELS = {
    "total": "N ~ M",
    "by_gender": "gender marginals",
    "by_age": "age marginals",
    "by_age_gender": "joint counts",
    "loglinear": "log-linear cells",
}

# Coarse tile-grid layout of the states: (row, col) on a schematic map.
STATE_GRID = {
    "AK": (0, 0), "ME": (0, 10),
    "VT": (1, 9), "NH": (1, 10),
    "WA": (2, 0), "ID": (2, 1), "MT": (2, 2), "ND": (2, 3), "MN": (2, 4),
    "WI": (2, 5), "MI": (2, 7), "NY": (2, 8), "MA": (2, 9), "RI": (2, 10),
    "OR": (3, 0), "NV": (3, 1), "WY": (3, 2), "SD": (3, 3), "IA": (3, 4),
    "IL": (3, 5), "IN": (3, 6), "OH": (3, 7), "PA": (3, 8), "NJ": (3, 9),
    "CT": (3, 10),
    "CA": (4, 0), "UT": (4, 1), "CO": (4, 2), "NE": (4, 3), "MO": (4, 4),
    "KY": (4, 5), "WV": (4, 6), "VA": (4, 7), "MD": (4, 8), "DE": (4, 9),
    "AZ": (5, 1), "NM": (5, 2), "KS": (5, 3), "AR": (5, 4), "TN": (5, 5),
    "NC": (5, 6), "SC": (5, 7), "DC": (5, 8),
    "OK": (6, 3), "LA": (6, 4), "MS": (6, 5), "AL": (6, 6), "GA": (6, 7),
    "HI": (7, 0), "TX": (7, 3), "FL": (7, 7),
}


@dataclass
class FigureSpec:
    kind: str
    inputs: dict
    output: str               # path stem; .png and .svg are written
    style: dict = field(default_factory=dict)
    config_hash: str | None = None
    manifest: str | None = None  # alternative source of the config hash

    @classmethod
    def from_json(cls, path) -> "FigureSpec":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except OSError as exc:
            raise RenderError(f"cannot read figure spec: {exc}")
        except json.JSONDecodeError as exc:
            raise RenderError(f"figure spec is not valid JSON: {exc}")
        missing = {"kind", "inputs", "output"} - set(d)
        if missing:
            raise RenderError(f"figure spec missing keys: {sorted(missing)}")
        if d["kind"] not in FIGURE_KINDS:
            raise RenderError(f"unknown figure kind {d['kind']!r}")
        return cls(kind=d["kind"], inputs=d["inputs"], output=d["output"],
                   style=d.get("style", {}), config_hash=d.get("config_hash"),
                   manifest=d.get("manifest"))


@dataclass
class RenderResult:
    png: str
    svg: str
    n_bars: int = 0
    n_cells: int = 0
    n_states: int = 0
    bin_mass: dict = field(default_factory=dict)  # panel label -> total count


def _read_csv(path, required_columns):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise RenderError(f"input file not found: {path}")
    if not rows:
        raise RenderError(f"{path}: no data rows")
    missing = [c for c in required_columns if c not in rows[0]]
    if missing:
        raise RenderError(f"{path}: missing column(s) {missing}")
    return rows


def _resolve_hash(spec: FigureSpec) -> str:
    if spec.config_hash:
        return spec.config_hash
    if spec.manifest:
        try:
            with open(spec.manifest, encoding="utf-8") as fh:
                return json.load(fh).get("config_hash", "unknown")
        except (OSError, json.JSONDecodeError):
            raise RenderError(f"cannot read manifest {spec.manifest}")
    return "unknown"


def _caption(fig, spec: FigureSpec, text: str):
    fig.text(0.01, 0.005,
             f"{text}  |  run {_resolve_hash(spec)[:12]}",
             fontsize=7, color="0.35", ha="left", va="bottom")


def _save(fig, spec: FigureSpec) -> tuple[str, str]:
    png = spec.output + ".png"
    svg = spec.output + ".svg"
    os.makedirs(os.path.dirname(os.path.abspath(png)), exist_ok=True)
    fig.savefig(png, dpi=150)
    fig.savefig(svg)
    plt.close(fig)
    return png, svg


def _method_order(style, methods):
    order = [m for m in style.get("method_order", DEFAULT_METHOD_ORDER)
             if m in methods]
    return order + [m for m in methods if m not in order]


def render_mape_bars(spec: FigureSpec) -> RenderResult:
    rows = _read_csv(spec.inputs["summary"],
                     ["method", "spec", "variant", "mape", "se"])
    variant = spec.style.get("variant", "main")
    rows = [r for r in rows if r["variant"] == variant]
    if not rows:
        raise RenderError(f"no rows for variant {variant!r}")
    methods = _method_order(spec.style, {r["method"] for r in rows})
    specs = sorted({r["spec"] for r in rows},
                   key=lambda s: list(SPEC_LABELS).index(s) if s in SPEC_LABELS else 99)
    lookup = {(r["method"], r["spec"]): (float(r["mape"]), float(r["se"]))
              for r in rows}
    width = 0.8 / len(methods)
    fig, ax = plt.subplots(figsize=(1.8 * len(specs) + 2, 4.2))
    n_bars = 0
    for i, method in enumerate(methods):
        xs, ys, es = [], [], []
        for j, model in enumerate(specs):
            if (method, model) not in lookup:
                continue
            mape, se = lookup[(method, model)]
            xs.append(j + (i - (len(methods) - 1) / 2) * width)
            ys.append(mape)
            es.append(se)
        ax.bar(xs, ys, width=width * 0.92, yerr=es, capsize=2,
               label=METHOD_LABELS.get(method, method))
        n_bars += len(xs)
    ax.set_xticks(range(len(specs)))
    ax.set_xticklabels([SPEC_LABELS.get(s, s) for s in specs], fontsize=8)
    ax.set_ylabel("MAPE (%)")
    ax.set_title(f"Population-estimate error by model and sampling method ({variant})")
    ax.legend(fontsize=8)
    _caption(fig, spec, f"leave-one-unit-out, variant={variant}")
    png, svg = _save(fig, spec)
    return RenderResult(png=png, svg=svg, n_bars=n_bars)


def render_pvalue_heatmap(spec: FigureSpec) -> RenderResult:
    path = spec.inputs["pvalues"]
    rows = _read_csv(path, ["method"])
    methods = [c for c in rows[0] if c != "method"]
    if not methods:
        raise RenderError(f"{path}: no method columns")
    matrix = np.array([[float(r[m]) for m in methods] for r in rows])
    fig, ax = plt.subplots(figsize=(1.1 * len(methods) + 2, 1.1 * len(methods) + 1.5))
    im = ax.imshow(matrix, vmin=0.0, vmax=1.0, cmap="viridis")
    labels = [METHOD_LABELS.get(m, m) for m in methods]
    ax.set_xticks(range(len(methods)), labels, fontsize=8)
    ax.set_yticks(range(len(methods)), labels, fontsize=8)
    for i in range(len(methods)):
        for j in range(len(methods)):
            ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center",
                    fontsize=8, color="w" if matrix[i, j] < 0.6 else "k")
    metric = spec.style.get("metric", "metric")
    ax.set_title(f"Pairwise test p-values: {metric}")
    fig.colorbar(im, ax=ax, shrink=0.8)
    _caption(fig, spec, f"two-sided unequal-variance tests on {metric}")
    png, svg = _save(fig, spec)
    return RenderResult(png=png, svg=svg, n_cells=matrix.size)


def render_state_map(spec: FigureSpec) -> RenderResult:
    path = spec.inputs["metrics"]
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise RenderError(f"input file not found: {path}")
    method = spec.style.get("method")
    if method is None:
        method = sorted(payload)[0]
    if method not in payload:
        raise RenderError(f"{path}: no method {method!r}")
    counts = payload[method].get("state_counts")
    if counts is None:
        raise RenderError(f"{path}: missing column(s) ['state_counts']")
    vmax = max(max(counts.values()), 1)
    fig, ax = plt.subplots(figsize=(11, 7))
    cmap = plt.get_cmap("YlGnBu")
    drawn = 0
    for state, (row, col) in STATE_GRID.items():
        value = counts.get(state, 0)
        color = cmap(0.15 + 0.85 * value / vmax)
        ax.add_patch(plt.Rectangle((col, -row), 0.94, 0.94, color=color))
        ax.text(col + 0.47, -row + 0.58, state, ha="center", fontsize=8)
        ax.text(col + 0.47, -row + 0.24, str(value), ha="center", fontsize=7)
        drawn += 1
    ax.set_xlim(-0.5, 11.7)
    ax.set_ylim(-7.6, 1.6)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(f"Users located per state ({METHOD_LABELS.get(method, method)})")
    _caption(fig, spec, f"schematic tile-grid map, method={method}")
    png, svg = _save(fig, spec)
    return RenderResult(png=png, svg=svg, n_states=drawn)


def render_distributions(spec: FigureSpec) -> RenderResult:
    panels = spec.inputs.get("histograms")
    if not panels:
        raise RenderError("distributions spec needs inputs.histograms "
                          "(label -> CSV path)")
    log_x = spec.style.get("log_x", True)
    n = len(panels)
    ncols = min(3, n)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows),
                             squeeze=False)
    bin_mass = {}
    for idx, (label, path) in enumerate(sorted(panels.items())):
        rows = _read_csv(path, ["bin_lo", "bin_hi", "count"])
        lo = np.array([float(r["bin_lo"]) for r in rows])
        hi = np.array([float(r["bin_hi"]) for r in rows])
        counts = np.array([int(r["count"]) for r in rows])
        ax = axes[idx // ncols][idx % ncols]
        ax.bar(lo, counts, width=hi - lo, align="edge", edgecolor="none")
        if log_x:
            ax.set_xscale("symlog", linthresh=1.0)
        ax.set_title(label, fontsize=9)
        ax.set_ylabel("users", fontsize=8)
        bin_mass[label] = int(counts.sum())
    for idx in range(n, nrows * ncols):
        axes[idx // ncols][idx % ncols].axis("off")
    fig.suptitle("Distributions by sampling method", fontsize=11)
    _caption(fig, spec, "log-spaced bins from exported histograms")
    fig.tight_layout(rect=(0, 0.02, 1, 0.97))
    png, svg = _save(fig, spec)
    return RenderResult(png=png, svg=svg, bin_mass=bin_mass)


def render(spec: FigureSpec) -> RenderResult:
    if spec.kind == "mape_bars":
        return render_mape_bars(spec)
    if spec.kind == "pvalue_heatmap":
        return render_pvalue_heatmap(spec)
    if spec.kind == "state_map":
        return render_state_map(spec)
    if spec.kind == "distributions":
        return render_distributions(spec)
    raise RenderError(f"unknown figure kind {spec.kind!r}")
