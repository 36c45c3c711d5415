"""Smoke tests: figures render to non-empty files."""

import math

from rbcsp.experiment import GridPointResult, scaling_fit
from rbcsp.plots import save_transition_figure, save_width_figure


def _point(n, value, prsat):
    sat = round(prsat * 100)
    return GridPointResult(
        n=n, axis="r", value=value, d=7, m=50, q=12, trials=100,
        sat=sat, unsat=100 - sat, timeout=0, prsat=prsat,
        ci_lo=max(0.0, prsat - 0.05), ci_hi=min(1.0, prsat + 0.05),
        mean_nodes=10.0, mean_elapsed_ms=1.0,
    )


def test_transition_figure(tmp_path):
    results = [
        _point(n, r, max(0.0, min(1.0, 1.5 - 0.5 * r - 0.01 * n)))
        for n in (12, 16)
        for r in (1.0, 1.5, 2.0, 2.5)
    ]
    path = save_transition_figure(results, tmp_path / "transition.png", threshold=2.0)
    assert path.exists() and path.stat().st_size > 1000


def test_width_figure(tmp_path):
    fit = scaling_fit([(n, 3.0 / (n * math.log(n))) for n in (50, 100, 200)], epsilon=0.4)
    path = save_width_figure(fit, tmp_path / "widths.png")
    assert path.exists() and path.stat().st_size > 1000
