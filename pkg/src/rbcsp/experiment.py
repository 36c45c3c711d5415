"""Monte Carlo phase-transition experiments.

A sweep runs seeded trials (generate + solve under a node budget) over a grid
of r or p values for several problem sizes, tallies empirical satisfiability
with Wilson confidence intervals, and persists a resumable CSV.  Downstream,
isotonic regression fits a monotone transition curve per size, the delta and
1-delta crossings give an empirical scaling window, and a log-log regression
of widths against n*ln(n) summarizes how the window narrows.

Trial seeds derive from (master seed, size index, grid index, trial index),
so any single trial is reproducible in isolation and results are independent
of worker scheduling.  Timeouts are censored: reported, never counted as
UNSAT.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist

from .core import RBParams, derive, fmt_float
from .errors import ConfigError, RangeError
from .gen import SeedPolicy, generate
from .solve import SAT, TIMEOUT, UNSAT, Budget, solve

WORKERS_ENV = "RBCSP_WORKERS"

CSV_HEADER = "n,axis,value,d,m,q,trials,sat,unsat,timeout,prsat,ci_lo,ci_hi,mean_nodes,mean_elapsed_ms"


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a grid over r (at fixed p) or over p (at fixed r), for several n."""

    axis: str  # "r" | "p"
    k: int
    alpha: float
    fixed: float  # p when axis == "r", r when axis == "p"
    n_list: tuple[int, ...]
    grid: tuple[float, ...]
    trials: int
    master_seed: int
    delta: float = 0.1
    max_nodes: int = 10**8
    max_seconds: float | None = None
    out: str | None = None
    elapsed_in_csv: bool = True

    def __post_init__(self):
        if self.axis not in ("r", "p"):
            raise ConfigError(f"axis must be 'r' or 'p', got {self.axis!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if len(self.grid) < 1 or any(a >= b for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("grid must be non-empty and strictly increasing")
        if len(self.n_list) < 1:
            raise ConfigError("n_list must be non-empty")

    def params_at(self, n: int, value: float) -> RBParams:
        if self.axis == "r":
            return RBParams(n=n, k=self.k, alpha=self.alpha, p=self.fixed, r=value, delta=self.delta)
        return RBParams(n=n, k=self.k, alpha=self.alpha, p=value, r=self.fixed, delta=self.delta)


_CONFIG_KEYS = {
    "axis", "k", "alpha", "p", "r", "n_list", "grid", "trials",
    "master_seed", "delta", "max_nodes", "max_seconds", "out", "elapsed_in_csv",
}


def _parse_bool(value: str, key: str) -> bool:
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    raise ConfigError(f"{key} must be 'true' or 'false', got {value!r}")


def _parse_grid(spec: str) -> tuple[float, ...]:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid range must read 'lo:hi:steps', got {spec!r}")
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        if steps < 1:
            raise ConfigError("grid steps must be >= 1")
        if steps == 1:
            return (lo,)
        return tuple(lo + (hi - lo) * i / (steps - 1) for i in range(steps))
    return tuple(float(tok) for tok in spec.split(","))


def parse_config(path: str | Path) -> SweepConfig:
    """Read a sweep config from a plain-text key=value file ('#' starts a comment)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    for key in ("axis", "k", "alpha", "n_list", "grid", "trials", "master_seed"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
    axis = raw["axis"]
    if axis == "r":
        if "p" not in raw:
            raise ConfigError(f"{path}: axis=r sweeps need the fixed value 'p'")
        if "r" in raw:
            raise ConfigError(f"{path}: axis=r sweeps vary r; do not set it")
        fixed = float(raw["p"])
    elif axis == "p":
        if "r" not in raw:
            raise ConfigError(f"{path}: axis=p sweeps need the fixed value 'r'")
        if "p" in raw:
            raise ConfigError(f"{path}: axis=p sweeps vary p; do not set it")
        fixed = float(raw["r"])
    else:
        raise ConfigError(f"{path}: axis must be 'r' or 'p', got {axis!r}")

    return SweepConfig(
        axis=axis,
        k=int(raw["k"]),
        alpha=float(raw["alpha"]),
        fixed=fixed,
        n_list=tuple(int(tok) for tok in raw["n_list"].split(",")),
        grid=_parse_grid(raw["grid"]),
        trials=int(raw["trials"]),
        master_seed=int(raw["master_seed"]),
        delta=float(raw.get("delta", "0.1")),
        max_nodes=int(raw.get("max_nodes", str(10**8))),
        max_seconds=float(raw["max_seconds"]) if "max_seconds" in raw else None,
        out=raw.get("out"),
        elapsed_in_csv=_parse_bool(raw.get("elapsed_in_csv", "true"), "elapsed_in_csv"),
    )


# --------------------------------------------------------------------------
# Wilson score interval
# --------------------------------------------------------------------------


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion, clipped to [0, 1]."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridPointResult:
    n: int
    axis: str
    value: float
    d: int
    m: int
    q: int
    trials: int
    sat: int
    unsat: int
    timeout: int
    prsat: float  # sat / (sat + unsat); timeouts are censored
    ci_lo: float
    ci_hi: float
    mean_nodes: float
    mean_elapsed_ms: float


def _result_row(res: GridPointResult) -> str:
    return ",".join(
        [
            str(res.n),
            res.axis,
            fmt_float(res.value),
            str(res.d),
            str(res.m),
            str(res.q),
            str(res.trials),
            str(res.sat),
            str(res.unsat),
            str(res.timeout),
            fmt_float(res.prsat),
            fmt_float(res.ci_lo),
            fmt_float(res.ci_hi),
            fmt_float(res.mean_nodes),
            fmt_float(res.mean_elapsed_ms),
        ]
    )


def load_results(path: str | Path) -> list[GridPointResult]:
    """Read a persisted sweep CSV back into GridPointResult records."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path}: not a sweep results file (bad header)")
    results = []
    for line in lines[1:]:
        if not line:
            continue
        f = line.split(",")
        if len(f) != 15:
            raise ConfigError(f"{path}: malformed row {line!r}")
        results.append(
            GridPointResult(
                n=int(f[0]), axis=f[1], value=float(f[2]), d=int(f[3]), m=int(f[4]), q=int(f[5]),
                trials=int(f[6]), sat=int(f[7]), unsat=int(f[8]), timeout=int(f[9]),
                prsat=float(f[10]), ci_lo=float(f[11]), ci_hi=float(f[12]),
                mean_nodes=float(f[13]), mean_elapsed_ms=float(f[14]),
            )
        )
    return results


def write_results(results, path: str | Path) -> None:
    rows = [CSV_HEADER] + [_result_row(res) for res in results]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def _solve_trial(job):
    params, seed, max_nodes, max_seconds = job
    inst = generate(params, seed)
    outcome = solve(inst, Budget(max_nodes=max_nodes, max_seconds=max_seconds))
    return outcome.status, outcome.nodes, outcome.elapsed


def _run_point(config: SweepConfig, n: int, value: float, policy: SeedPolicy, workers: int) -> GridPointResult:
    params = config.params_at(n, value)
    sizes = derive(params)
    jobs = [
        (params, policy.trial_seed(t), config.max_nodes, config.max_seconds)
        for t in range(config.trials)
    ]
    if workers <= 1:
        outcomes = [_solve_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_solve_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    sat = sum(1 for status, _, _ in outcomes if status == SAT)
    unsat = sum(1 for status, _, _ in outcomes if status == UNSAT)
    timeout = sum(1 for status, _, _ in outcomes if status == TIMEOUT)
    decided = sat + unsat
    prsat = sat / decided if decided else math.nan
    ci_lo, ci_hi = wilson_interval(sat, decided) if decided else (math.nan, math.nan)
    mean_nodes = sum(nodes for _, nodes, _ in outcomes) / len(outcomes)
    mean_ms = (
        1000.0 * sum(elapsed for _, _, elapsed in outcomes) / len(outcomes)
        if config.elapsed_in_csv
        else 0.0
    )
    return GridPointResult(
        n=n, axis=config.axis, value=value, d=sizes.d, m=sizes.m, q=sizes.q,
        trials=config.trials, sat=sat, unsat=unsat, timeout=timeout,
        prsat=prsat, ci_lo=ci_lo, ci_hi=ci_hi, mean_nodes=mean_nodes, mean_elapsed_ms=mean_ms,
    )


def sweep(config: SweepConfig, workers: int | None = None) -> list[GridPointResult]:
    """Run (or resume) a sweep; returns results in (n_list x grid) order.

    Grid points already present in the output CSV are skipped, so an
    interrupted sweep picks up where it left off.  With node-based budgets the
    tallies are deterministic for a given config and worker-pool width has no
    effect on the output.
    """
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    # Validate every grid point up front so bad configs fail before any work.
    for n in config.n_list:
        for value in config.grid:
            derive(config.params_at(n, value))

    done: dict[tuple[int, str], GridPointResult] = {}
    out = Path(config.out) if config.out else None
    if out is not None and out.exists():
        for res in load_results(out):
            done[(res.n, fmt_float(res.value))] = res
    appender = None
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        if not out.exists():
            out.write_text(CSV_HEADER + "\n", encoding="utf-8", newline="\n")
        appender = out.open("a", encoding="utf-8", newline="\n")

    master = SeedPolicy(config.master_seed)
    results = []
    try:
        for ni, n in enumerate(config.n_list):
            size_policy = master.substream(ni)
            for gi, value in enumerate(config.grid):
                key = (n, fmt_float(value))
                if key in done:
                    results.append(done[key])
                    continue
                res = _run_point(config, n, value, size_policy.substream(gi), workers)
                results.append(res)
                if appender is not None:
                    appender.write(_result_row(res) + "\n")
                    appender.flush()
    finally:
        if appender is not None:
            appender.close()
    if out is not None:
        # Canonical order regardless of how many rows came from a previous run.
        write_results(results, out)
    return results


# --------------------------------------------------------------------------
# Isotonic transition fit and empirical windows
# --------------------------------------------------------------------------


def isotonic_decreasing(ys, weights=None) -> list[float]:
    """Weighted least-squares projection onto non-increasing sequences (PAV)."""
    ys = list(ys)
    weights = [1.0] * len(ys) if weights is None else list(weights)
    if len(weights) != len(ys):
        raise ValueError("weights must match values")
    # Pool adjacent violators on the reversed sequence (non-decreasing there).
    rev_y = ys[::-1]
    rev_w = weights[::-1]
    block_y: list[float] = []
    block_w: list[float] = []
    block_len: list[int] = []
    for y, w in zip(rev_y, rev_w):
        cur_y, cur_w, cur_len = y, w, 1
        while block_y and block_y[-1] > cur_y:
            py, pw, pl = block_y.pop(), block_w.pop(), block_len.pop()
            cur_y = (cur_y * cur_w + py * pw) / (cur_w + pw)
            cur_w += pw
            cur_len += pl
        block_y.append(cur_y)
        block_w.append(cur_w)
        block_len.append(cur_len)
    fitted_rev: list[float] = []
    for y, ln in zip(block_y, block_len):
        fitted_rev.extend([y] * ln)
    return fitted_rev[::-1]


@dataclass(frozen=True)
class EmpiricalWindow:
    """Crossings of the fitted transition curve with 1-delta (lower) and delta (upper)."""

    n: int
    delta: float
    lower: float
    upper: float
    width: float
    fit_residual: float


def _crossing(xs, ys, level: float) -> float:
    """x where a non-increasing piecewise-linear curve crosses `level`."""
    if ys[0] < level:
        raise RangeError(f"fitted curve starts below {level}; grid does not span the transition")
    if ys[-1] > level:
        raise RangeError(f"fitted curve never falls to {level}; grid does not span the transition")
    last_at_or_above = max(i for i, y in enumerate(ys) if y >= level)
    if last_at_or_above == len(ys) - 1:
        return xs[-1]
    x0, x1 = xs[last_at_or_above], xs[last_at_or_above + 1]
    y0, y1 = ys[last_at_or_above], ys[last_at_or_above + 1]
    return x0 + (y0 - level) / (y0 - y1) * (x1 - x0)


def empirical_window(results, delta: float) -> EmpiricalWindow:
    """Fit a monotone transition curve for one n and locate the delta-crossings.

    `results` must be GridPointResult records for a single n; points where all
    trials were censored are dropped.
    """
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    rows = [res for res in results if res.sat + res.unsat > 0]
    if not rows:
        raise RangeError("no grid point has a decided trial")
    ns = {res.n for res in rows}
    axes = {res.axis for res in rows}
    if len(ns) != 1 or len(axes) != 1:
        raise ValueError(f"empirical_window needs results for a single n and axis, got n={ns}, axis={axes}")
    rows.sort(key=lambda res: res.value)
    if len(rows) < 4:
        raise RangeError(f"need >= 4 usable grid points, got {len(rows)}")
    xs = [res.value for res in rows]
    raw = [res.prsat for res in rows]
    weights = [float(res.sat + res.unsat) for res in rows]
    fitted = isotonic_decreasing(raw, weights)
    residual = math.sqrt(sum((f - y) ** 2 for f, y in zip(fitted, raw)) / len(raw))
    lower = _crossing(xs, fitted, 1.0 - delta)
    upper = _crossing(xs, fitted, delta)
    return EmpiricalWindow(
        n=rows[0].n, delta=delta, lower=lower, upper=upper, width=upper - lower, fit_residual=residual
    )


# --------------------------------------------------------------------------
# Width scaling
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    """OLS of ln(width) against ln(n*ln n), with the predicted comparator sequences."""

    ns: tuple[int, ...]
    widths: tuple[float, ...]
    slope: float
    slope_stderr: float
    comparator_nlogn: tuple[float, ...]
    comparator_lower: tuple[float, ...] | None


def scaling_fit(pairs, epsilon: float | None = None) -> ScalingFit:
    """Fit how window widths shrink with n; pairs are (n, width) with width > 0.

    The comparator sequences 1/(n*ln n) and, when epsilon is given,
    1/(n^(1-epsilon)*ln n) are reported alongside; no pass/fail decision is made.
    """
    pairs = sorted(pairs)
    if len(pairs) < 3:
        raise ValueError(f"need >= 3 sizes for a scaling fit, got {len(pairs)}")
    if any(w <= 0 for _, w in pairs):
        raise ValueError("widths must be positive")
    ns = tuple(int(n) for n, _ in pairs)
    if len(set(ns)) != len(ns):
        raise ValueError("sizes must be distinct")
    widths = tuple(float(w) for _, w in pairs)
    xs = [math.log(n * math.log(n)) for n in ns]
    ys = [math.log(w) for w in widths]
    count = len(xs)
    mean_x = sum(xs) / count
    mean_y = sum(ys) / count
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ssr = sum((y - intercept - slope * x) ** 2 for x, y in zip(xs, ys))
    stderr = math.sqrt(max(ssr, 0.0) / (count - 2) / sxx) if count > 2 else 0.0
    comparator = tuple(1.0 / (n * math.log(n)) for n in ns)
    comparator_lower = (
        tuple(1.0 / (n ** (1.0 - epsilon) * math.log(n)) for n in ns) if epsilon is not None else None
    )
    return ScalingFit(
        ns=ns, widths=widths, slope=slope, slope_stderr=stderr,
        comparator_nlogn=comparator, comparator_lower=comparator_lower,
    )


def two_column_text(xs, ys) -> str:
    """Plot-ready two-column text, one '<x> <y>' pair per line."""
    return "\n".join(f"{fmt_float(float(x))} {fmt_float(float(y))}" for x, y in zip(xs, ys)) + "\n"
