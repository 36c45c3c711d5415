"""Figure rendering for sweep results and window scaling, written straight to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_AXIS_LABEL = {"r": "constraint density r", "p": "forbidden fraction p"}


def save_transition_figure(results, path, threshold: float | None = None, title: str | None = None) -> Path:
    """Empirical Pr(Sat) vs the swept parameter, one errorbar curve per n."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    axis = results[0].axis if results else "r"
    for n in sorted({res.n for res in results}):
        rows = sorted((res for res in results if res.n == n), key=lambda res: res.value)
        xs = [res.value for res in rows]
        ys = [res.prsat for res in rows]
        lo = [res.prsat - res.ci_lo for res in rows]
        hi = [res.ci_hi - res.prsat for res in rows]
        ax.errorbar(xs, ys, yerr=[lo, hi], marker="o", markersize=3.5, capsize=2, lw=1.2, label=f"n={n}")
    if threshold is not None:
        ax.axvline(threshold, color="k", ls="--", lw=1, alpha=0.6, label="threshold")
    ax.set_xlabel(_AXIS_LABEL.get(axis, axis))
    ax.set_ylabel("empirical Pr(Sat)")
    ax.set_ylim(-0.03, 1.03)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_width_figure(fit, path, title: str | None = None) -> Path:
    """Log-log window widths vs n, with the comparator rates scaled through the first point."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.loglog(fit.ns, fit.widths, "o-", lw=1.2, label=f"width (slope {fit.slope:.2f})")
    scale = fit.widths[0] / fit.comparator_nlogn[0]
    ax.loglog(fit.ns, [scale * c for c in fit.comparator_nlogn], "k--", lw=1, alpha=0.6,
              label="1/(n ln n) rate")
    if fit.comparator_lower is not None:
        scale = fit.widths[0] / fit.comparator_lower[0]
        ax.loglog(fit.ns, [scale * c for c in fit.comparator_lower], "k:", lw=1, alpha=0.6,
                  label="1/(n^(1-eps) ln n) rate")
    ax.set_xlabel("n")
    ax.set_ylabel("window width")
    ax.grid(alpha=0.3, which="both")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
