"""Render reliability curves to image files alongside the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_curve_plot(grid, values, path, title=None, stderr=None, label="R_S(t)"):
    """Write a reliability-curve figure; 3-sigma band when stderr is given."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(grid, values, lw=1.8, color="#1f5fa8", label=label)
    if stderr is not None:
        lo = [v - 3 * s for v, s in zip(values, stderr)]
        hi = [v + 3 * s for v, s in zip(values, stderr)]
        ax.fill_between(grid, lo, hi, color="#1f5fa8", alpha=0.2, label="±3 s.e.")
    ax.set_xlabel("t")
    ax.set_ylabel("reliability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
