"""Render figures from CSVs produced by the real simulation CLI."""
import json
import subprocess
import sys

import pytest

from figemit import FigureSpec, build_figure

pytest.importorskip("epblab", reason="simulation package not installed")


def run(*args):
    res = subprocess.run([sys.executable, "-m", *map(str, args)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    return res


@pytest.fixture(scope="module")
def real_csvs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("data")
    perf_n = tmp / "perf_n.csv"
    run("epblab.cli", "simulate", "--m", 5, "--alpha", 1, "--budget", 3, "--lmax", 1,
        "--rules", "all", "--n-list", "10,20,40", "--trials", 3, "--samples", 5,
        "--seed", 3, "--out", perf_n)
    perf_alpha = tmp / "perf_alpha.csv"
    run("epblab.cli", "simulate", "--m", 5, "--alpha", "1,3,5", "--budget", 5,
        "--lmax", 1, "--rules", "av", "--n-list", 50, "--trials", 3, "--samples", 5,
        "--seed", 4, "--out", perf_alpha)
    rates = tmp / "rates.csv"
    run("epblab.cli", "bne", "--m", 4, "--budget", 2, "--lmax", 1, "--samples", 40,
        "--seed", 5, "--dump", rates)
    return {"perf_n": perf_n, "perf_alpha": perf_alpha, "rates": rates, "tmp": tmp}


def test_perf_vs_n_all_rules(real_csvs):
    spec = FigureSpec(inputs=(str(real_csvs["perf_n"]),), kind="perf_vs_n", output="x.svg")
    fig = build_figure(spec)
    labels = [line.get_label() for line in fig.axes[0].get_lines()]
    assert labels == ["av", "av_cost", "pav", "greedy_cover", "phragmen", "mes",
                      "mes_av", "mes_phragmen"]


def test_perf_vs_alpha_single_rule(real_csvs):
    spec = FigureSpec(inputs=(str(real_csvs["perf_alpha"]),), kind="perf_vs_alpha",
                      output="x.svg")
    fig = build_figure(spec)
    ax = fig.axes[0]
    assert len(ax.get_lines()) == 1
    assert list(ax.get_lines()[0].get_xdata()) == [1.0, 3.0, 5.0]


def test_full_emit_figures_run(real_csvs):
    tmp = real_csvs["tmp"]
    spec_path = tmp / "figures.json"
    spec_path.write_text(json.dumps([
        {"input": str(real_csvs["perf_n"]), "kind": "perf_vs_n",
         "output": str(tmp / "perf_n.svg"), "ylim": [0, 1.01]},
        {"input": str(real_csvs["perf_n"]), "kind": "convergence",
         "output": str(tmp / "convergence.svg")},
        {"input": str(real_csvs["perf_alpha"]), "kind": "perf_vs_alpha",
         "output": str(tmp / "perf_alpha.svg")},
        {"input": str(real_csvs["rates"]), "kind": "rarity_hist",
         "output": str(tmp / "rarity.png")},
    ]))
    run("figemit.cli", "--spec", spec_path)
    for name in ("perf_n.svg", "convergence.svg", "perf_alpha.svg", "rarity.png"):
        assert (tmp / name).stat().st_size > 0
