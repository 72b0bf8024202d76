"""Panel specification parsing and rendering.

A panel spec is a key=value text file ('#' starts a comment), with the same
conventions as the simulation CLI's config files. The repeatable ``series``
key adds one curve:

    series = path.csv | style | label

where style is one of ``line``, ``dashed``, ``dotted``, ``markers``.
Remaining keys: ``title``, ``xlabel``, ``ylabel``, ``xmin``, ``xmax``,
``ymin``, ``ymax``, ``logy`` (0/1).

Rendering is deterministic: the same spec and input files produce the same
image bytes (tested byte-wise for PNG; the check would need a structural
diff only if the matplotlib version changed between renders).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLES = {
    "line": dict(linestyle="-", marker=""),
    "dashed": dict(linestyle="--", marker=""),
    "dotted": dict(linestyle=":", marker=""),
    "markers": dict(linestyle="", marker="o", markersize=4),
}


class PanelError(Exception):
    """Raised for an invalid panel spec or unreadable series data."""


@dataclass(frozen=True)
class Series:
    path: str
    style: str
    label: str

    def __post_init__(self):
        if self.style not in _STYLES:
            raise PanelError(
                f"unknown style '{self.style}' (choose from {sorted(_STYLES)})"
            )
        if not self.path:
            raise PanelError("series path must be non-empty")


@dataclass(frozen=True)
class PanelSpec:
    series: tuple[Series, ...]
    title: str = ""
    xlabel: str = "t"
    ylabel: str = "survival probability"
    xmin: float | None = None
    xmax: float | None = None
    ymin: float | None = None
    ymax: float | None = None
    logy: bool = False

    def __post_init__(self):
        if not self.series:
            raise PanelError("panel needs at least one series")


_FLOAT_KEYS = ("xmin", "xmax", "ymin", "ymax")
_TEXT_KEYS = ("title", "xlabel", "ylabel")


def parse_panel(text: str) -> PanelSpec:
    """Parse a panel spec from key=value text."""
    series: list[Series] = []
    kwargs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PanelError(f"expected key=value (line {lineno})")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "series":
                parts = [p.strip() for p in value.split("|")]
                if len(parts) != 3:
                    raise PanelError("series needs 'path | style | label'")
                series.append(Series(*parts))
            elif key in _TEXT_KEYS:
                kwargs[key] = value
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key == "logy":
                if value not in ("0", "1"):
                    raise PanelError("logy must be 0 or 1")
                kwargs[key] = value == "1"
            else:
                raise PanelError(f"unknown key '{key}'")
        except ValueError:
            raise PanelError(
                f"unparsable value for '{key}' (line {lineno})"
            ) from None
        except PanelError as exc:
            raise PanelError(f"{exc} (line {lineno})") from None
    return PanelSpec(series=tuple(series), **kwargs)


def load_panel(path: str | Path) -> PanelSpec:
    p = Path(path)
    if not p.is_file():
        raise PanelError(f"panel spec not found: {p}")
    return parse_panel(p.read_text())


def read_series_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Read a 'time,value[,error]' CSV; returns (t, v, err-or-None)."""
    p = Path(path)
    if not p.is_file():
        raise PanelError(f"series file not found: {p}")
    lines = p.read_text().splitlines()
    if not lines:
        raise PanelError(f"empty series file: {p}")
    header = [h.strip() for h in lines[0].split(",")]
    if header not in (["time", "value"], ["time", "value", "error"]):
        raise PanelError(f"unexpected CSV header {header!r} in {p}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise PanelError(f"wrong column count in {p} (line {lineno})")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise PanelError(f"non-numeric cell in {p} (line {lineno})") from None
    if not rows:
        raise PanelError(f"no data rows in {p}")
    data = np.array(rows)
    err = data[:, 2] if len(header) == 3 else None
    return data[:, 0], data[:, 1], err


def render(panel: PanelSpec, out: str | Path) -> dict:
    """Render the panel to `out` and write a sidecar manifest.

    Returns the manifest: per-series label, source path, and row count, plus
    the image path. The manifest is also written next to the image as
    `<out>.manifest.json`.
    """
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=150)
    manifest_series = []
    for s in panel.series:
        t, v, err = read_series_csv(s.path)
        style = _STYLES[s.style]
        if err is not None and s.style == "markers":
            ax.errorbar(t, v, yerr=err, label=s.label, capsize=2, **style)
        else:
            ax.plot(t, v, label=s.label, **style)
        manifest_series.append({"label": s.label, "path": str(s.path), "rows": int(t.size)})
    if panel.logy:
        ax.set_yscale("log")
    if panel.title:
        ax.set_title(panel.title)
    ax.set_xlabel(panel.xlabel)
    ax.set_ylabel(panel.ylabel)
    if panel.xmin is not None or panel.xmax is not None:
        ax.set_xlim(left=panel.xmin, right=panel.xmax)
    if panel.ymin is not None or panel.ymax is not None:
        ax.set_ylim(bottom=panel.ymin, top=panel.ymax)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    # empty metadata keeps the image bytes independent of the render time
    fig.savefig(out, metadata={})
    plt.close(fig)
    manifest = {"image": str(out), "series": manifest_series}
    Path(f"{out}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
