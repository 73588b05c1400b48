"""Figure rendering for the CLI's report paths.

Every function writes one image file (format taken from the suffix) and
returns the path. Figures are optional side outputs; the CSV/JSON data is
always the primary result.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "savefig.bbox": "tight",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    # keep output bytes stable across runs
    "svg.hashsalt": "gradient-aesthetics",
    "pdf.compression": 0,
}
_META = {"png": {"Software": None}, "pdf": {"CreationDate": None, "Producer": None},
         "svg": {"Date": None}}


def _save(fig, path) -> Path:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "png"
    try:
        fig.savefig(path, format=fmt, metadata=_META.get(fmt))
    finally:
        plt.close(fig)
    return path


def plot_level_histogram(hist, path, fit=None, level: int | None = None) -> Path:
    """Bar chart of a level's occupation counts, optionally with the fitted
    Maxwell-Boltzmann curve on top."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = np.arange(hist.counts.size)
        ax.bar(x, hist.counts, width=1.0, color="0.6", label="counts")
        if fit is not None:
            xs = np.linspace(0, x[-1], 1024)
            ax.plot(xs, fit.model(xs), color="C3", lw=1.5,
                    label=f"fit b={fit.shape:.3g}, R²={fit.r_squared:.3f}")
            ax.legend()
        ax.set_xlabel("value")
        ax.set_ylabel("count")
        if level is not None:
            ax.set_title(f"level {level} distribution")
        ax.set_xlim(-0.5, x[-1] + 0.5)
        return _save(fig, path)


def plot_mb_family(path, shapes=(0.5, 1.0, 2.0), dims: int = 2) -> Path:
    """Maxwell-Boltzmann speed densities for several shape parameters."""
    from .statmech import mb_pdf_2d, mb_pdf_3d

    pdf = mb_pdf_2d if dims == 2 else mb_pdf_3d
    vmax = 4.0 / math.sqrt(min(shapes))
    v = np.linspace(0.0, vmax, 512)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for b in shapes:
            ax.plot(v, pdf(v, b), label=f"b={b:g}")
        ax.set_xlabel("v")
        ax.set_ylabel("f(v)")
        ax.set_title(f"{dims}-D Maxwell-Boltzmann density")
        ax.legend()
        return _save(fig, path)


def plot_maxent(levels, solution, path) -> Path:
    """Max-entropy occupations against energy level, log scale."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(levels, solution.occupations, "o-", ms=3)
        ax.set_xlabel("energy level")
        ax.set_ylabel("occupation")
        ax.set_title(f"beta={solution.beta:.6g}")
        return _save(fig, path)


def plot_corpus(report, path) -> Path:
    """M against scaled first-level energy; labeled corpora get separate
    markers (circles for appealing, stars for control)."""
    markers = {"appealing": ("o", "C0"), "control": ("*", "C3"), None: ("o", "C0")}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label in ("appealing", "control", None):
            pts = [e for e in report.entries if e.label == label]
            if not pts:
                continue
            m, c = markers[label]
            ax.scatter([e.score.levels[0].energy_scaled for e in pts],
                       [e.score.m(report.measure) for e in pts],
                       marker=m, color=c, s=28, label=label or "images")
        ax.set_xlabel("scaled image energy")
        ax.set_ylabel(f"M ({report.measure})")
        ax.legend()
        return _save(fig, path)


def plot_archive(archive, path, k: int = 12, cols: int = 4) -> Path:
    """Montage of the incumbents of the ``k`` most populated groups."""
    from .search import top_groups

    bins = [b for b in top_groups(archive, k) if archive.bins[b] is not None]
    rows = max(1, math.ceil(len(bins) / cols))
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(rows, cols, figsize=(2.2 * cols, 2.4 * rows), squeeze=False)
        for ax in axes.flat:
            ax.axis("off")
        for ax, b in zip(axes.flat, bins):
            slot = archive.bins[b]
            ax.imshow(slot.image.pixels, cmap="gray", vmin=0, vmax=255, interpolation="nearest")
            ax.set_title(f"group {b}  M={slot.score.m(archive.measure):.3f}", fontsize=8)
        return _save(fig, path)
