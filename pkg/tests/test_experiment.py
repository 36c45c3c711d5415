"""Sweep harness, Wilson intervals, isotonic windows, and scaling fits."""

import math

import pytest

from rbcsp.core import RBParams
from rbcsp.errors import ConfigError, RangeError
from rbcsp.experiment import (
    CSV_HEADER,
    GridPointResult,
    SweepConfig,
    empirical_window,
    isotonic_decreasing,
    load_results,
    parse_config,
    scaling_fit,
    sweep,
    two_column_text,
    wilson_interval,
)
from rbcsp.theory import thresholds, window


def test_wilson_extremes():
    lo, hi = wilson_interval(0, 50)
    assert lo == 0.0 and 0 < hi < 0.2
    lo, hi = wilson_interval(50, 50)
    assert hi == 1.0 and 0.8 < lo < 1.0


def test_wilson_half_half():
    lo, hi = wilson_interval(50, 100, 0.95)
    assert lo == pytest.approx(0.4038, abs=2e-4)
    assert hi == pytest.approx(0.5962, abs=2e-4)
    assert lo < 0.5 < hi


def test_wilson_validation():
    with pytest.raises(ValueError):
        wilson_interval(5, 0)
    with pytest.raises(ValueError):
        wilson_interval(6, 5)


def test_isotonic_fixed_point_and_projection():
    monotone = [0.9, 0.9, 0.5, 0.2, 0.0]
    assert isotonic_decreasing(monotone) == monotone
    noisy = [0.8, 0.95, 0.4, 0.5, 0.1]
    fit = isotonic_decreasing(noisy)
    assert all(a >= b - 1e-15 for a, b in zip(fit, fit[1:]))
    assert isotonic_decreasing(fit) == pytest.approx(fit)


def test_isotonic_weighted_pooling():
    # One violator pair pooled by weight: (0.2*1 + 0.8*3)/4 = 0.65.
    fit = isotonic_decreasing([0.2, 0.8], weights=[1.0, 3.0])
    assert fit == pytest.approx([0.65, 0.65])


def _point(n, value, prsat, trials=100, axis="r"):
    sat = round(prsat * trials)
    return GridPointResult(
        n=n, axis=axis, value=value, d=7, m=50, q=12, trials=trials,
        sat=sat, unsat=trials - sat, timeout=0, prsat=sat / trials,
        ci_lo=0.0, ci_hi=1.0, mean_nodes=1.0, mean_elapsed_ms=0.0,
    )


def test_empirical_window_synthetic_crossings():
    rows = [_point(12, 2.0, 1.0), _point(12, 2.5, 0.5), _point(12, 3.0, 0.0), _point(12, 3.5, 0.0)]
    win = empirical_window(rows, 0.25)
    assert win.lower == pytest.approx(2.25)
    assert win.upper == pytest.approx(2.75)
    assert win.width == pytest.approx(0.5)
    assert win.fit_residual == pytest.approx(0.0)


def test_empirical_window_errors():
    rows = [_point(12, 2.0, 0.9), _point(12, 2.5, 0.8), _point(12, 3.0, 0.7), _point(12, 3.5, 0.6)]
    with pytest.raises(RangeError):
        empirical_window(rows, 0.25)  # never falls to 0.25
    with pytest.raises(RangeError):
        empirical_window(rows[:3], 0.25)  # too few points
    mixed = rows + [_point(16, 4.0, 0.1)]
    with pytest.raises(ValueError):
        empirical_window(mixed, 0.25)


def test_scaling_fit_exact_rate():
    pairs = [(n, 5.0 / (n * math.log(n))) for n in (50, 100, 200, 400)]
    fit = scaling_fit(pairs)
    assert fit.slope == pytest.approx(-1.0, abs=1e-12)
    assert fit.slope_stderr == pytest.approx(0.0, abs=1e-10)
    assert fit.comparator_nlogn[0] == pytest.approx(1.0 / (50 * math.log(50)))


def test_scaling_fit_constant_widths():
    fit = scaling_fit([(n, 0.25) for n in (50, 100, 200)])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_scaling_fit_validation():
    with pytest.raises(ValueError):
        scaling_fit([(50, 0.1), (100, 0.05)])
    with pytest.raises(ValueError):
        scaling_fit([(50, 0.1), (100, 0.05), (200, 0.0)])


def test_scaling_fit_on_analytic_windows():
    widths = []
    for n in (50, 100, 200, 400):
        params = RBParams(n=n, k=2, alpha=0.8, p=0.25, r=1.0)
        widths.append((n, window(params, 0.1, axis="r").width))
    report = thresholds(RBParams(n=50, k=2, alpha=0.8, p=0.25, r=1.0))
    fit = scaling_fit(widths, epsilon=report.epsilon)
    assert fit.slope < 0
    assert fit.comparator_lower is not None


def _tiny_config(tmp_path, **overrides):
    kwargs = dict(
        axis="r",
        k=2,
        alpha=1.0,
        fixed=0.25,
        n_list=(8,),
        grid=(0.4, 2.6),
        trials=6,
        master_seed=321,
        max_nodes=200_000,
        max_seconds=None,
        out=str(tmp_path / "results.csv"),
        elapsed_in_csv=False,
    )
    kwargs.update(overrides)
    return SweepConfig(**kwargs)


def test_sweep_single_point(tmp_path):
    config = _tiny_config(tmp_path, grid=(1.0,), trials=1)
    results = sweep(config)
    assert len(results) == 1
    assert results[0].sat + results[0].unsat + results[0].timeout == 1
    lines = (tmp_path / "results.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2


def test_sweep_far_from_threshold():
    r_cr = thresholds(RBParams(n=12, k=2, alpha=0.8, p=0.25, r=1.0)).r_cr
    config = SweepConfig(
        axis="r", k=2, alpha=0.8, fixed=0.25, n_list=(12,),
        grid=(0.2 * r_cr, 2.0 * r_cr), trials=100, master_seed=1234,
        max_nodes=500_000, max_seconds=None, out=None,
    )
    below, above = sweep(config)
    assert below.timeout == 0 and above.timeout == 0
    assert below.prsat >= 0.95
    assert above.prsat <= 0.05


def test_sweep_deterministic_bytes(tmp_path):
    config_a = _tiny_config(tmp_path, out=str(tmp_path / "a.csv"))
    config_b = _tiny_config(tmp_path, out=str(tmp_path / "b.csv"))
    sweep(config_a)
    sweep(config_b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sweep_worker_count_irrelevant(tmp_path):
    config_a = _tiny_config(tmp_path, out=str(tmp_path / "w1.csv"))
    config_b = _tiny_config(tmp_path, out=str(tmp_path / "w2.csv"))
    sweep(config_a, workers=1)
    sweep(config_b, workers=2)
    assert (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w2.csv").read_bytes()


def test_sweep_resumes_from_existing_rows(tmp_path):
    config = _tiny_config(tmp_path)
    # Pre-seed the results file with a sentinel row for the first grid point.
    sentinel = GridPointResult(
        n=8, axis="r", value=0.4, d=8, m=17, q=16, trials=6,
        sat=1, unsat=5, timeout=0, prsat=1 / 6, ci_lo=0.1, ci_hi=0.2,
        mean_nodes=123.0, mean_elapsed_ms=0.0,
    )
    from rbcsp.experiment import write_results

    write_results([sentinel], config.out)
    results = sweep(config)
    assert len(results) == 2
    # The sentinel row is preserved (not recomputed); floats survive to 15 digits.
    assert (results[0].sat, results[0].unsat, results[0].mean_nodes) == (1, 5, 123.0)
    assert results[0].prsat == pytest.approx(1 / 6, rel=1e-14)
    persisted = load_results(config.out)
    assert persisted[0] == results[0]
    assert persisted[1].value == pytest.approx(2.6)


def test_config_parsing(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text(
        "# transition study\n"
        "axis=r\n"
        "k=2\n"
        "alpha=0.8\n"
        "p=0.25\n"
        "n_list=12,16\n"
        "grid=1.0:3.0:5\n"
        "trials=10\n"
        "master_seed=99\n"
        "max_nodes=1000\n"
        "elapsed_in_csv=false\n"
        "out=res.csv\n"
    )
    config = parse_config(path)
    assert config.axis == "r" and config.fixed == 0.25
    assert config.n_list == (12, 16)
    assert config.grid == pytest.approx((1.0, 1.5, 2.0, 2.5, 3.0))
    assert config.max_nodes == 1000 and config.max_seconds is None
    assert config.elapsed_in_csv is False


def test_config_parsing_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("axis=r\nk=2\nalpha=0.8\np=0.25\nn_list=8\ngrid=1,2\ntrials=5\nmaster_seed=1\nbogus=3\n")
    with pytest.raises(ConfigError):
        parse_config(path)
    path.write_text("axis=r\nk=2\nalpha=0.8\nr=1.0\nn_list=8\ngrid=1,2\ntrials=5\nmaster_seed=1\n")
    with pytest.raises(ConfigError):
        parse_config(path)  # axis=r must not set r
    path.write_text("axis=r\nk=2\nalpha=0.8\np=0.25\nn_list=8\ngrid=2,1\ntrials=5\nmaster_seed=1\n")
    with pytest.raises(ConfigError):
        parse_config(path)  # grid not increasing


def test_sweep_censors_timeouts():
    config = SweepConfig(
        axis="r", k=2, alpha=0.8, fixed=0.25, n_list=(12,), grid=(2.8,),
        trials=4, master_seed=5, max_nodes=1, max_seconds=None, out=None,
    )
    (res,) = sweep(config)
    assert res.timeout == 4 and res.sat == res.unsat == 0
    assert math.isnan(res.prsat) and math.isnan(res.ci_lo)


def test_empirical_window_desk_scale_n15():
    # Both delta=0.25 crossings fall inside a bracket around the r-threshold (~2.78).
    config = SweepConfig(
        axis="r", k=2, alpha=0.8, fixed=0.25, n_list=(15,),
        grid=(1.8, 2.2, 2.6, 3.0, 3.4), trials=80, master_seed=606,
        max_nodes=300_000, max_seconds=None, out=None,
    )
    results = sweep(config)
    win = empirical_window(results, 0.25)
    assert 1.8 < win.lower < win.upper < 3.4
    assert win.lower < 2.781 + 0.3 and win.upper > 2.781 - 0.5


def test_sweep_p_axis():
    config = SweepConfig(
        axis="p", k=2, alpha=1.0, fixed=1.0, n_list=(8,), grid=(0.2, 0.45, 0.7, 0.9),
        trials=20, master_seed=88, max_nodes=300_000, max_seconds=None, out=None,
    )
    results = sweep(config)
    assert [res.axis for res in results] == ["p"] * 4
    assert results[0].prsat > results[-1].prsat
    win = empirical_window(results, 0.25)
    assert 0.2 < win.lower <= win.upper < 0.9


def test_sweep_validates_grid_points_up_front():
    from rbcsp.errors import DegenerateError

    config = SweepConfig(
        axis="p", k=2, alpha=1.0, fixed=1.0, n_list=(4,), grid=(0.5, 0.999),
        trials=5, master_seed=1, out=None,
    )
    with pytest.raises(DegenerateError):
        sweep(config)  # q rounds to d^k at p=0.999 before any trial runs


def test_two_column_text():
    assert two_column_text([1, 2], [0.5, 0.25]) == "1 0.5\n2 0.25\n"
