"""Static SVG figures for trial records and phase grids."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InvalidParameterError  # noqa: E402
from .harness import PhaseGrid, summarize  # noqa: E402

# x axis and label per family; rs-vs-gaussian series are split by operator and rate
_AXES = {
    "snr-vs-rate": ("rate", "sampling rate m/n"),
    "snr-vs-input-snr": ("input_snr_db", "input SNR (dB)"),
    "rs-vs-gaussian": ("input_snr_db", "input SNR (dB)"),
    "mc-rmse": ("missing", "missing fraction"),
}
_YLABEL = {"snr_db": "output SNR (dB)", "rmse": "RMSE (per entry)", "rel_err": "relative error"}


def _save(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "nullproj", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_records(records, path, title: str | None = None) -> Path:
    """Mean +/- standard error per sweep point, one line per series."""
    records = [r for r in records if r.value is not None and not math.isnan(r.value)]
    if not records:
        raise InvalidParameterError("nothing to plot: no finite records")
    families = {r.family for r in records}
    if len(families) != 1:
        raise InvalidParameterError(f"records mix families {sorted(families)}")
    family = families.pop()
    if family not in _AXES:
        raise InvalidParameterError(f"family {family!r} is drawn as a heatmap, not a line plot")
    xcol, xlabel = _AXES[family]
    metric = records[0].metric
    series_by = ("solver", "operator", "rate") if family == "rs-vs-gaussian" else ("solver",)
    stats = summarize(records, by=series_by + (xcol,))
    series: dict = {}
    for key, (mean, se, _) in stats.items():
        series.setdefault(key[:-1], []).append((key[-1], mean, se))
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for name in sorted(series, key=lambda k: tuple(str(p) for p in k)):
        pts = sorted(series[name])
        x = np.array([p[0] for p in pts], dtype=float)
        m = np.array([p[1] for p in pts])
        e = np.array([p[2] for p in pts])
        label = name[0] if len(name) == 1 else f"{name[0]} {name[1]} m/n={name[2]:g}"
        ax.errorbar(x, m, yerr=e, marker="o", ms=4, capsize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(_YLABEL.get(metric, metric))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_phase(grid: PhaseGrid, path, solver: str | None = None, title: str | None = None) -> Path:
    """Success-rate heatmap with every solver's 50% contour drawn on top."""
    if not grid.success:
        raise InvalidParameterError("nothing to plot: empty phase grid")
    names = sorted(grid.success)
    base = solver or names[0]
    if base not in grid.success:
        raise InvalidParameterError(f"no grid for solver {base!r}")
    fig, ax = plt.subplots(figsize=(6.4, 5.0))
    im = ax.imshow(grid.success[base], origin="lower", aspect="auto", vmin=0, vmax=1,
                   cmap="viridis", extent=_extent(grid.rhos, grid.deltas))
    fig.colorbar(im, ax=ax, label=f"success rate ({base})")
    for name, style in zip(names, ["-", "--", ":", "-."] * len(names)):
        c = grid.contour(name)
        ok = ~np.isnan(c)
        ax.plot(c[ok], grid.deltas[ok], style, color="white" if name == base else "orange",
                marker="o", ms=3, lw=2, label=f"{name} 50%")
    ax.set_xlabel("rho = s/m (normalized sparsity)")
    ax.set_ylabel("delta = m/n (normalized dimension)")
    ax.legend(fontsize=8, loc="upper right")
    ax.set_title(title or f"success: rel. error <= {grid.success_tol:g}")
    fig.tight_layout()
    return _save(fig, path)


def _extent(xs, ys):
    def edges(v):
        v = np.asarray(v, dtype=float)
        h = (v[1] - v[0]) / 2 if v.size > 1 else 0.5
        return v[0] - h, v[-1] + h
    return (*edges(xs), *edges(ys))


def emit_plot(data, kind: str, path, **kw) -> Path:
    """Dispatch on ``kind``: ``"line"`` for records, ``"heatmap"`` for a grid."""
    if kind == "line":
        return plot_records(data, path, **kw)
    if kind == "heatmap":
        if not isinstance(data, PhaseGrid):
            if not data:
                raise InvalidParameterError("nothing to plot: no records")
            tol = kw.pop("success_tol", 1e-3)
            data = PhaseGrid.from_records(data, tol)
        return plot_phase(data, path, **kw)
    raise InvalidParameterError(f"unknown plot kind {kind!r}; expected 'line' or 'heatmap'")


__all__ = ["plot_records", "plot_phase", "emit_plot"]
