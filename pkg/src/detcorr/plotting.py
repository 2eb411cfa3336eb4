"""Render the two experiment tables as figures next to their CSV output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_STATE_LABELS = {"ghz": "GHZ", "linear_cluster": "linear cluster"}


def render_figure1(rows: Sequence[dict], path: str | Path) -> None:
    """Stabilizer values per vertex, raw (lower points) vs corrected (upper)."""
    states = list(dict.fromkeys(r["state"] for r in rows))
    fig, axes = plt.subplots(1, len(states), figsize=(5.0 * len(states), 3.4), sharey=True)
    if len(states) == 1:
        axes = [axes]
    for ax, state in zip(axes, states):
        sub = [r for r in rows if r["state"] == state]
        ks = [r["k"] for r in sub]
        ax.errorbar(
            ks, [r["raw"] for r in sub], yerr=[r["raw_sigma"] for r in sub],
            fmt="o", ms=4, capsize=2, label="raw",
        )
        ax.errorbar(
            ks, [r["corrected"] for r in sub], yerr=[r["corrected_sigma"] for r in sub],
            fmt="s", ms=4, capsize=2, label="corrected",
        )
        ax.axhline(1.0, color="gray", lw=0.8, ls=":")
        ax.set_title(_STATE_LABELS.get(state, state))
        ax.set_xlabel("stabilizer index k")
        ax.set_xticks(ks)
    axes[0].set_ylabel(r"$\langle S_k \rangle$")
    axes[0].legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_figure2(rows: Sequence[dict], path: str | Path) -> None:
    """Witness vs preparation noise, raw (upper curves) vs corrected (lower)."""
    states = list(dict.fromkeys(r["state"] for r in rows))
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    markers = {"ghz": "o", "linear_cluster": "s"}
    for state in states:
        sub = sorted((r for r in rows if r["state"] == state), key=lambda r: r["p_n"])
        pn = [r["p_n"] for r in sub]
        label = _STATE_LABELS.get(state, state)
        m = markers.get(state, "o")
        ax.errorbar(
            pn, [r["w_raw"] for r in sub], yerr=[r["w_raw_sigma"] for r in sub],
            fmt=m + "-", ms=3, lw=0.9, capsize=2, label=f"{label}, raw",
        )
        ax.errorbar(
            pn, [r["w_corrected"] for r in sub], yerr=[r["w_corrected_sigma"] for r in sub],
            fmt=m + "--", ms=3, lw=0.9, capsize=2, label=f"{label}, corrected",
        )
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xlabel(r"preparation error $p_n$")
    ax.set_ylabel(r"$\langle W \rangle$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


__all__ = ["render_figure1", "render_figure2"]
