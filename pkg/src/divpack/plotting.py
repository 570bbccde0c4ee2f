"""PNG figures for the report commands (matplotlib, non-interactive backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def search_histogram(densities: Sequence[float], target: float, path: str | Path,
                     title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(densities, bins=min(40, max(5, len(densities) // 10)), color="#4c72b0")
    ax.axvline(target, color="#c44e52", linestyle="--", label=f"target {target:.5f}")
    ax.set_xlabel("packing density")
    ax.set_ylabel("codes")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def mc_values(values: Sequence[float], target: float, path: str | Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(len(values)), values, ".", color="#4c72b0", label="per-code sum")
    mean = sum(values) / len(values) if values else 0.0
    ax.axhline(mean, color="#55a868", label=f"mean {mean:.4f}")
    ax.axhline(target, color="#c44e52", linestyle="--", label=f"target {target:.4f}")
    ax.set_xlabel("code")
    ax.set_ylabel("primitive-vector sum")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def bounds_curves(rows: Sequence[dict], path: str | Path, title: str = "") -> Path:
    """log2 density targets against the rank t."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ts = [r["t"] for r in rows]
    for key, label in (("log2_minkowski_hlawka", "2 zeta(d)/2^d"),
                       ("log2_symmetric", "|G0| zeta(d)/2^d"),
                       ("log2_rogers_symmetric", "|G0| zeta(d) t / (2^d e (1-e^-t))")):
        ax.plot(ts, [r[key] + r["dimension"] for r in rows], "o-", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("log2(bound) + d")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
