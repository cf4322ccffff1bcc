"""SVG figures with byte-stable output.

Matplotlib writes random element ids and a creation date into SVG files;
both are pinned here (``svg.hashsalt`` and ``metadata={"Date": None}``), so
identical data produces identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .lattice import Trajectory  # noqa: E402

__all__ = ["TRACE_DECIMATION", "render_duality", "render_tails"]

TRACE_DECIMATION = 20  # circles mark every 20th sample of the field trace
_RC = {"svg.hashsalt": "fracto", "svg.fonttype": "none", "path.simplify": False}
_STYLES = ("-", "--", ":")


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def _waterfall(ax, traj: Trajectory | None, title: str, max_curves: int = 12) -> None:
    ax.set_title(title)
    ax.set_xlabel("x")
    if traj is None or not traj.times:
        ax.text(0.5, 0.5, "no data for this arm", ha="center", va="center", transform=ax.transAxes)
        return
    n = len(traj.times)
    pick = np.unique(np.linspace(0, n - 1, min(n, max_curves)).round().astype(int))
    span = max(float(np.ptp(np.concatenate([traj.u[i] for i in pick]))), 1e-12)
    for rank, i in enumerate(pick):
        ax.plot(traj.x, traj.u[i] + rank * span, color="k", lw=0.6)
    ax.set_yticks([r * span for r in range(len(pick))])
    ax.set_yticklabels([f"{traj.times[i]:g}" for i in pick])
    ax.set_ylabel("t (curves offset)")


def render_duality(
    path: Path, alpha: float, lattice: Trajectory | None, field: Trajectory | None
) -> Path:
    """Chain and field snapshots side by side over a center-trace overlay.

    The chain trace is the solid curve; the field trace is drawn as circles at
    every ``TRACE_DECIMATION``-th sample.  A missing arm leaves a labelled
    empty panel.
    """
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=(9.0, 7.0))
        grid = fig.add_gridspec(2, 2, height_ratios=(3, 2))
        _waterfall(fig.add_subplot(grid[0, 0]), lattice, f"chain, alpha={alpha:g}")
        _waterfall(fig.add_subplot(grid[0, 1]), field, f"field, alpha={alpha:g}")
        ax = fig.add_subplot(grid[1, :])
        ax.set_xlabel("t")
        ax.set_ylabel("u at x = 0")
        missing = []
        if lattice is not None and lattice.trace_t:
            t, u = lattice.trace
            ax.plot(t, u, "k-", lw=0.8, label="chain")
        else:
            missing.append("chain")
        if field is not None and field.trace_t:
            t, u = field.trace
            ax.plot(t[::TRACE_DECIMATION], u[::TRACE_DECIMATION], "o", ms=3, mfc="none", mec="C3", label="field")
        else:
            missing.append("field")
        if missing:
            ax.text(0.5, 0.9, "missing: " + ", ".join(missing), ha="center", transform=ax.transAxes)
        if len(missing) < 2:
            ax.legend(loc="lower right")
        fig.tight_layout()
        return _save(fig, path)


def render_tails(
    path: Path,
    snapshots: Sequence[tuple[float, np.ndarray, np.ndarray]],
    window: tuple[float, float],
    slopes: Sequence[float | None] = (),
) -> Path:
    """Positive-x profiles in linear, semi-log and log-log scales.

    ``snapshots`` holds ``(alpha, x, u)`` triples.  The log-log panel carries a
    reference line of slope ``-(1 + alpha)`` for each curve, anchored at the
    profile value at the window start; fitted slopes label the legend.
    """
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 3, figsize=(12.0, 4.0))
        titles = ("linear", "semi-log", "log-log")
        for ax, title in zip(axes, titles):
            ax.set_title(title)
            ax.set_xlabel("x")
        axes[0].set_ylabel("|u|")
        if not snapshots:
            for ax in axes:
                ax.text(0.5, 0.5, "no snapshots", ha="center", va="center", transform=ax.transAxes)
        for i, (alpha, x, u) in enumerate(snapshots):
            style = _STYLES[i % len(_STYLES)]
            pos = x > 0
            xp, up = x[pos], np.abs(u[pos])
            fitted = slopes[i] if i < len(slopes) else None
            label = f"alpha={alpha:g}" + (f", fit {fitted:.3f}" if fitted is not None else "")
            axes[0].plot(xp, up, "k" + style, lw=0.8, label=label)
            keep = up > 0
            axes[1].semilogy(xp[keep], up[keep], "k" + style, lw=0.8)
            axes[2].loglog(xp[keep], up[keep], "k" + style, lw=0.8)
            x1, x2 = window
            j = int(np.searchsorted(xp, x1))
            if j < xp.size and up[j] > 0:
                xr = np.array([x1, x2])
                axes[2].loglog(xr, up[j] * (xr / xp[j]) ** -(1.0 + alpha), "C0" + style, lw=1.2)
        if snapshots:
            axes[0].legend(loc="upper right")
        fig.tight_layout()
        return _save(fig, path)
