"""End-to-end: render paper-style panels from real simulation CSV output.

These tests drive the `dimertrap` CLI as a subprocess and consume only its
CSV files, then check that every series in the image manifest carries the
same row count as its source CSV.
"""

import json
import shutil
import subprocess

import pytest

from dimerplots.cli import main

pytestmark = pytest.mark.skipif(
    shutil.which("dimertrap") is None, reason="dimertrap CLI not installed"
)


def _run(args, cwd):
    subprocess.run(["dimertrap", *args, "--quiet"], cwd=cwd, check=True)


def _csv_rows(path):
    return sum(1 for line in path.read_text().splitlines()[1:] if line.strip())


def _render(tmp_path, panel_text, name):
    panel = tmp_path / f"{name}.txt"
    panel.write_text(panel_text)
    out = tmp_path / f"{name}.png"
    assert main(["--panel", str(panel), "--out", str(out), "--quiet"]) == 0
    return json.loads((tmp_path / f"{name}.png.manifest.json").read_text())


def test_fig1_style_panel(tmp_path):
    # LvNE curve plus sampled points with error bars on the same axes
    cfg = tmp_path / "run.txt"
    cfg.write_text("alpha=0.1\nt_max=5\nn_points=11\nsweeps=20000\nburn_in=1000\n")
    _run(["lvne", "--config", str(cfg), "--out", "run"], tmp_path)
    _run(["pimc", "--config", str(cfg), "--out", "run", "--p", "5",
          "--seed", "42"], tmp_path)
    manifest = _render(
        tmp_path,
        f"title=survival, weak coupling\nymin=0\nymax=1\n"
        f"series={tmp_path / 'run_lvne.csv'} | line | LvNE\n"
        f"series={tmp_path / 'run_pimc.csv'} | markers | sampled\n",
        "fig1b",
    )
    for s in manifest["series"]:
        assert s["rows"] == _csv_rows(tmp_path / s["path"].split("/")[-1])


def test_fig1d_style_longtime_log_panel(tmp_path):
    # several dephasing strengths on a log-y long-time axis
    labels = []
    for alpha in ("0", "0.1", "0.25"):
        cfg = tmp_path / f"a{alpha}.txt"
        cfg.write_text(f"alpha={alpha}\nt_max=60\nn_points=121\nout=a{alpha}\n")
        _run(["lvne", "--config", str(cfg)], tmp_path)
        labels.append(f"series={tmp_path / f'a{alpha}_lvne.csv'} | line | alpha={alpha}")
    manifest = _render(
        tmp_path, "title=long-time decay\nlogy=1\n" + "\n".join(labels) + "\n",
        "fig1d",
    )
    assert [s["rows"] for s in manifest["series"]] == [121, 121, 121]


def test_fig2_style_trap_strength_panel(tmp_path):
    lines = []
    for gamma, style in (("0.1", "line"), ("0.5", "dashed"), ("1.0", "dotted")):
        cfg = tmp_path / f"g{gamma}.txt"
        cfg.write_text(f"Gamma={gamma}\nalpha=0.1\nt_max=10\nn_points=51\nout=g{gamma}\n")
        _run(["lvne", "--config", str(cfg)], tmp_path)
        lines.append(f"series={tmp_path / f'g{gamma}_lvne.csv'} | {style} | Gamma={gamma}")
    manifest = _render(
        tmp_path, "title=trap strength comparison\n" + "\n".join(lines) + "\n",
        "fig2",
    )
    assert all(s["rows"] == 51 for s in manifest["series"])
