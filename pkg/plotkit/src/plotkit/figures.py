"""Render figures from the delimited experiment outputs.

Consumes only the two documented CSV schemas (kappa.csv and ser.csv) and
draws either a paired condition-number histogram or a set of error rate
curves.  Rendering is a pure function of the CSV bytes: the style is
pinned, SVG ids are salted with a fixed string, and no timestamps are
written, so re-rendering the same file reproduces the image byte for byte.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KAPPA_COLUMNS = ("realization", "kappa_before", "kappa_after", "se_before", "se_after", "iters")
SER_COLUMNS = ("scenario", "detector", "snr_db", "ser", "trials", "ci_halfwidth")
FIGURE_KINDS = ("kappa-hist", "ser-curve")

# pinned style: a fixed CSV must yield byte-identical SVG
_FIXED_STYLE = {
    "svg.hashsalt": "plotkit",
    "svg.fonttype": "none",
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.framealpha": 0.9,
}

_MARKERS = "osD^vP*X"
_HIST_COLOR = "#4878a8"


class PlotkitError(Exception):
    """Base class for rendering failures."""


class SchemaError(PlotkitError):
    """Input CSV does not match the documented schema."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request.

    ``log_y`` applies to error rate curves, ``bins`` to histograms; the
    other kind ignores the respective field.
    """

    input_csv: Union[str, Path]
    kind: str
    output: Union[str, Path]
    log_y: bool = True
    bins: int = 40

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise PlotkitError(f"unknown figure kind {self.kind!r}, expected one of {FIGURE_KINDS}")
        if int(self.bins) != self.bins or self.bins < 1:
            raise PlotkitError(f"bins must be a positive integer, got {self.bins!r}")
        if not Path(self.input_csv).is_file():
            raise PlotkitError(f"input CSV not found: {self.input_csv}")


def _read_rows(path, columns):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path.name}: empty file, expected header "
                              f"{','.join(columns)}") from None
        if header != columns:
            missing = [c for c in columns if c not in header]
            extra = [c for c in header if c not in columns]
            parts = []
            if missing:
                parts.append("missing columns: " + ", ".join(missing))
            if extra:
                parts.append("unexpected columns: " + ", ".join(extra))
            if not parts:
                parts.append("column order must be " + ",".join(columns))
            raise SchemaError(f"{path.name}: " + "; ".join(parts))
        rows = list(reader)
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(columns):
            raise SchemaError(f"{path.name}: line {lineno} has {len(row)} fields, "
                              f"expected {len(columns)}")
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    return rows


def load_kappa(path):
    """Parse kappa.csv into a dict of float column arrays."""
    rows = _read_rows(path, KAPPA_COLUMNS)
    try:
        table = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise SchemaError(f"{Path(path).name}: non-numeric value ({exc})") from None
    return {name: table[:, i] for i, name in enumerate(KAPPA_COLUMNS)}


def load_ser(path):
    """Parse ser.csv into per-(scenario, detector) column arrays.

    Groups keep first-appearance order so the legend matches the file.
    """
    rows = _read_rows(path, SER_COLUMNS)
    grouped: dict = {}
    for lineno, row in enumerate(rows, start=2):
        try:
            values = [float(v) for v in row[2:]]
        except ValueError as exc:
            raise SchemaError(f"{Path(path).name}: non-numeric value on line "
                              f"{lineno} ({exc})") from None
        grouped.setdefault((row[0], row[1]), []).append(values)
    out = {}
    for key, values in grouped.items():
        table = np.array(values)
        out[key] = {"snr_db": table[:, 0], "ser": table[:, 1],
                    "trials": table[:, 2], "ci_halfwidth": table[:, 3]}
    return out


def _save(fig, output):
    out = Path(output)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    fmt = out.suffix.lower().lstrip(".") or "svg"
    if fmt == "svg":
        # Date: None keeps the file free of wall-clock metadata
        fig.savefig(out, format="svg", metadata={"Date": None})
    else:
        fig.savefig(out, format=fmt)
    plt.close(fig)
    return out


def plot_kappa(spec: FigureSpec) -> Path:
    """Two-panel histogram of condition numbers before and after tuning.

    Unbounded (rank-deficient) draws cannot be binned; they are dropped
    from the bars and called out in the per-panel sample annotation.
    """
    data = load_kappa(spec.input_csv)
    with matplotlib.rc_context(_FIXED_STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.8), layout="constrained")
        panels = (("kappa_before", "before optimization"),
                  ("kappa_after", "after optimization"))
        for ax, (column, title) in zip(axes, panels):
            values = data[column]
            finite = values[np.isfinite(values)]
            note = f"n = {values.size}"
            if finite.size < values.size:
                note += f" ({values.size - finite.size} unbounded)"
            if finite.size:
                ax.hist(finite, bins=int(spec.bins), color=_HIST_COLOR,
                        edgecolor="white", linewidth=0.4)
            ax.set_title(title)
            ax.text(0.97, 0.95, note, transform=ax.transAxes, ha="right", va="top")
        axes[0].set_ylabel("realizations")
        fig.supxlabel("condition number")
        return _save(fig, spec.output)


def plot_ser(spec: FigureSpec) -> Path:
    """Error rate versus SNR, one line per scenario and detector pair."""
    groups = load_ser(spec.input_csv)
    with matplotlib.rc_context(_FIXED_STYLE):
        fig, ax = plt.subplots(figsize=(6.8, 4.6), layout="constrained")
        for i, ((scenario, detector), g) in enumerate(groups.items()):
            order = np.argsort(g["snr_db"], kind="stable")
            ax.errorbar(g["snr_db"][order], g["ser"][order],
                        yerr=g["ci_halfwidth"][order],
                        label=f"{scenario} {detector}",
                        marker=_MARKERS[i % len(_MARKERS)],
                        markersize=4.5, capsize=3, linewidth=1.4)
        if spec.log_y:
            ax.set_yscale("log")
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("symbol error rate")
        ax.legend()
        return _save(fig, spec.output)


def render(spec: FigureSpec) -> Path:
    if spec.kind == "kappa-hist":
        return plot_kappa(spec)
    return plot_ser(spec)
