"""Matplotlib rendering for the report paths.

Every CLI command that emits delimited data can also render a figure next
to it; these helpers keep the styling in one place.  The Agg backend is
forced so rendering works headless.
"""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_FIGSIZE = (7.0, 4.2)
_DPI = 150


def render_curves(
    path: str,
    x: np.ndarray,
    curves: Sequence[tuple[str, np.ndarray]],
    xlabel: str,
    ylabel: str,
    title: str,
    logy: bool = False,
) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    for label, y in curves:
        ax.plot(x, y, lw=1.2, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_surface(
    path: str,
    x: np.ndarray,
    t: np.ndarray,
    values: np.ndarray,
    xlabel: str,
    ylabel: str,
    title: str,
) -> None:
    """Heatmap of values[i, j] over (t[i], x[j])."""
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    mesh = ax.pcolormesh(x, t, values, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="density")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_scan_heatmap(
    path: str,
    alphas: np.ndarray,
    ks: np.ndarray,
    linf: np.ndarray,
    title: str,
) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 5.0), dpi=_DPI)
    floor = max(float(np.min(linf[linf > 0])) if np.any(linf > 0) else 1e-16, 1e-16)
    mesh = ax.pcolormesh(
        ks,
        alphas,
        np.log10(np.maximum(linf, floor)),
        shading="auto",
        cmap="magma",
    )
    fig.colorbar(mesh, ax=ax, label="log10 L-inf continuity residual")
    ax.set_xlabel("k")
    ax.set_ylabel("alpha")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
