"""Figure construction from performance/rarity CSV files.

Rendering is a pure function of the CSV bytes and the figure spec: fixed
style, fixed ordering, no timestamps, and a pinned SVG hash salt, so the
same inputs always produce byte-identical images.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams.update({
    "svg.hashsalt": "figemit",
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
})

KINDS = ("perf_vs_n", "perf_vs_alpha", "convergence", "rarity_hist")

# one stable colour per canonical rule name; unknown names get the fallback cycle
RULE_COLORS = {
    "av": "#1f77b4",
    "av_cost": "#ff7f0e",
    "pav": "#2ca02c",
    "greedy_cover": "#d62728",
    "phragmen": "#9467bd",
    "mes": "#8c564b",
    "mes_av": "#e377c2",
    "mes_phragmen": "#7f7f7f",
}
FALLBACK_COLORS = ("#bcbd22", "#17becf", "#aec7e8", "#ffbb78")


class SchemaError(ValueError):
    """The CSV does not carry the columns (or rows) the figure kind needs."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    output: str
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("figure spec needs at least one input CSV")


_SPEC_FIELDS = {"input", "kind", "output", "xlim", "ylim"}


def spec_from_dict(doc: dict) -> FigureSpec:
    unknown = set(doc) - _SPEC_FIELDS
    if unknown:
        raise ValueError(f"unknown figure spec fields: {sorted(unknown)}")
    inputs = doc["input"]
    if isinstance(inputs, str):
        inputs = (inputs,)
    return FigureSpec(
        inputs=tuple(inputs),
        kind=doc["kind"],
        output=doc["output"],
        xlim=tuple(doc["xlim"]) if doc.get("xlim") else None,
        ylim=tuple(doc["ylim"]) if doc.get("ylim") else None,
    )


def load_specs(path) -> list[FigureSpec]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, list):
        raise ValueError("figure spec file must hold a JSON list")
    return [spec_from_dict(d) for d in doc]


def _read_rows(paths, required) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [col for col in required if col not in header]
            if missing:
                raise SchemaError(f"{path}: missing columns {missing}")
            rows.extend(reader)
    if not rows:
        raise SchemaError(f"no data rows in {', '.join(map(str, paths))}")
    return rows


def _series_by_rule(rows, x_col):
    """rule -> sorted (x, mean, ci) triples; rules keep first-appearance order."""
    series: dict[str, list[tuple[float, float, float]]] = {}
    for row in rows:
        series.setdefault(row["rule"], []).append(
            (float(row[x_col]), float(row["mean_ratio"]), float(row["ci95"]))
        )
    return {rule: sorted(points) for rule, points in series.items()}


def _color(rule: str, idx: int) -> str:
    return RULE_COLORS.get(rule, FALLBACK_COLORS[idx % len(FALLBACK_COLORS)])


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure for a spec (without saving it)."""
    if spec.kind == "rarity_hist":
        rows = _read_rows(spec.inputs, required=("g_plus", "g_minus"))
        gaps = [abs(float(r["g_plus"]) - float(r["g_minus"])) for r in rows]
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        ax.hist(gaps, bins=40, color="#1f77b4")
        ax.set_xlabel("|G+ - G-|")
        ax.set_ylabel("samples")
        ax.set_title("Gap between minimum rates of opposing pivotal families")
    else:
        x_col = "alpha" if spec.kind == "perf_vs_alpha" else "n"
        rows = _read_rows(spec.inputs, required=("rule", x_col, "mean_ratio", "ci95"))
        series = _series_by_rule(rows, x_col)
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for idx, (rule, points) in enumerate(series.items()):
            xs = [p[0] for p in points]
            means = [p[1] for p in points]
            los = [p[1] - p[2] for p in points]
            his = [p[1] + p[2] for p in points]
            color = _color(rule, idx)
            ax.plot(xs, means, marker="o", markersize=3, label=rule, color=color)
            ax.fill_between(xs, los, his, alpha=0.15, color=color, linewidth=0)
        if spec.kind == "convergence":
            ax.set_xscale("log")
        ax.set_xlabel("cost ratio" if x_col == "alpha" else "number of agents")
        ax.set_ylabel("mean utility ratio vs optimum")
        ax.legend(loc="lower right", fontsize=8)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Build and save one figure; the output format follows the extension
    (SVG by default)."""
    fig = build_figure(spec)
    out = Path(spec.output)
    fmt = out.suffix.lstrip(".").lower() or "svg"
    try:
        fig.savefig(out, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    finally:
        plt.close(fig)
    return out
