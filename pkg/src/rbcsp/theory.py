"""Exact finite-n analysis: thresholds, solution-count moments, overlap diagnostics,
and scaling-window endpoints.

The asymptotic thresholds are r_cr = -alpha/ln(1-p) and p_cr = 1 - e^(-alpha/r).
At finite n the first moment gives a closed-form upper window endpoint (Markov:
Pr(Sat) <= E(N)), while the lower endpoint comes from the Cauchy bound
Pr(Sat) >= E(N)^2 / E(N^2), evaluated exactly and inverted by bisection.

All moment arithmetic runs in the natural-log domain with log-gamma binomial
coefficients, so evaluations stay stable for n up to ~1e5.  Two evaluation
modes exist: "continuous" keeps the real-valued sizes d = n^alpha,
m = r*n*ln(n), q = p*d^k (matching the analytic formulas, and smooth in r and
p for bisection), while "integerized" uses the rounded sizes that generation
actually builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import RBParams, derive, fmt_float
from .errors import BracketError, DegenerateError

CONTINUOUS = "continuous"
INTEGERIZED = "integerized"

_SCAN_STEPS = 64
_BISECT_TOL = 1e-6


# --------------------------------------------------------------------------
# Thresholds and the window-rate constant
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    """Closed-form thresholds plus the window-rate constant c and epsilon = max(c, 0).

    c_r = alpha + 1 - r_cr*k*p   (valid bound c_r < 1 under the r-axis regime)
    c_p = alpha + 1 - r*k*p_cr   (valid bound c_p < 1 under the p-axis regime)
    c / epsilon report the regime that holds (r-axis preferred), or None if neither.
    """

    r_cr: float
    p_cr: float
    c: float | None
    epsilon: float | None
    c_r: float
    c_p: float
    regime_r: bool
    regime_p: bool


def thresholds(params: RBParams) -> ThresholdReport:
    """Evaluate both thresholds and the window-rate constants for these parameters."""
    r_cr = -params.alpha / math.log1p(-params.p)
    p_cr = -math.expm1(-params.alpha / params.r)
    c_r = params.alpha + 1.0 - r_cr * params.k * params.p
    c_p = params.alpha + 1.0 - params.r * params.k * p_cr
    in_r = params.regime_r
    in_p = params.regime_p
    c = c_r if in_r else (c_p if in_p else None)
    epsilon = None if c is None else (c + abs(c)) / 2.0
    return ThresholdReport(
        r_cr=r_cr, p_cr=p_cr, c=c, epsilon=epsilon, c_r=c_r, c_p=c_p, regime_r=in_r, regime_p=in_p
    )


# --------------------------------------------------------------------------
# Moments of the solution count N
# --------------------------------------------------------------------------


def _check_mode(mode: str) -> None:
    if mode not in (CONTINUOUS, INTEGERIZED):
        raise ValueError(f"mode must be {CONTINUOUS!r} or {INTEGERIZED!r}, got {mode!r}")


def _moment_basis(params: RBParams, mode: str):
    """Shared quantities for pair terms: (n, k, ln d, ln(d-1), m, a, b).

    a is the probability that one fixed tuple survives a random illegal set,
    b that two distinct fixed tuples both survive.  Integerized mode uses the
    exact subset-count ratios a = (T-q)/T and b = (T-q)(T-q-1)/(T(T-1)) with
    T = d^k; continuous mode takes the real-size limits a = 1-p and
    b = (1-p)((1-p) - 1/T)/(1 - 1/T).
    """
    n, k = params.n, params.k
    if mode == INTEGERIZED:
        sizes = derive(params)
        if sizes.d < 2:
            raise DegenerateError("pair terms need a domain of size >= 2")
        t_space = sizes.d**k
        a = (t_space - sizes.q) / t_space
        b = ((t_space - sizes.q) * (t_space - sizes.q - 1)) / (t_space * (t_space - 1))
        return n, k, math.log(sizes.d), math.log(sizes.d - 1), float(sizes.m), a, b
    ln_d = params.alpha * math.log(n)
    # ln(d-1) = ln d + ln(1 - 1/d), overflow-free for any alpha.
    ln_dm1 = ln_d + math.log1p(-math.exp(-ln_d))
    m = params.r * n * math.log(n)
    a = 1.0 - params.p
    inv_t = math.exp(-k * ln_d)
    b = max(a * (a - inv_t) / (1.0 - inv_t), 0.0)
    return n, k, ln_d, ln_dm1, m, a, b


def _ln_choose(n: float, k: float) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_pair_term(n, k, ln_d, ln_dm1, m, a, b, similarity: int) -> float:
    # ln of d^n * C(n,S) * (d-1)^(n-S) * [a*rho + b*(1-rho)]^m where
    # rho = C(S,k)/C(n,k) is the chance a random scope falls inside the S agreeing variables.
    s = similarity
    rho = 0.0 if s < k else math.exp(_ln_choose(s, k) - _ln_choose(n, k))
    bracket = a * rho + b * (1.0 - rho)
    if bracket <= 0.0:
        return -math.inf
    return n * ln_d + _ln_choose(n, s) + (n - s) * ln_dm1 + m * math.log(bracket)


def _logsumexp(terms) -> float:
    peak = max(terms)
    if peak == -math.inf:
        return -math.inf
    return peak + math.log(math.fsum(math.exp(t - peak) for t in terms if t > -math.inf))


def log_expected_solutions(params: RBParams, mode: str = CONTINUOUS) -> float:
    """ln E(N) for the expected number of satisfying assignments E(N) = d^n (1-p)^m.

    Continuous mode evaluates (alpha + r*ln(1-p)) * n * ln(n), which is exactly 0
    at r = r_cr; integerized mode evaluates n*ln(d) + m*ln(1 - q/d^k) on the
    rounded sizes.
    """
    _check_mode(mode)
    if mode == CONTINUOUS:
        return (params.alpha + params.r * math.log1p(-params.p)) * params.n * math.log(params.n)
    sizes = derive(params)
    t_space = sizes.d**params.k
    return params.n * math.log(sizes.d) + sizes.m * math.log((t_space - sizes.q) / t_space)


def pair_term(params: RBParams, similarity: int, mode: str = INTEGERIZED) -> float:
    """ln of the S-th similarity-class contribution to E(N^2).

    The class collects ordered assignment pairs agreeing on exactly S variables;
    at S = n the term reduces to ln E(N) exactly (same-tuple case).
    """
    _check_mode(mode)
    if not 0 <= similarity <= params.n:
        raise ValueError(f"similarity must lie in [0, n={params.n}], got {similarity}")
    return _log_pair_term(*_moment_basis(params, mode), similarity)


@dataclass(frozen=True)
class MomentReport:
    """First and second moments of the solution count, in the log domain.

    pair_terms[S] is ln of the similarity-S contribution to E(N^2); the report
    also carries the Cauchy lower bound E(N)^2/E(N^2) and the Markov upper
    bound min(1, E(N)) on the satisfiability probability.
    """

    log_EN: float
    pair_terms: tuple[float, ...]
    log_EN2: float
    ratio_lower_bound: float
    markov_upper_bound: float


def log_second_moment(params: RBParams, mode: str = INTEGERIZED) -> MomentReport:
    """Evaluate E(N^2) = sum_S pair_term(S) by log-sum-exp over the n+1 classes."""
    _check_mode(mode)
    basis = _moment_basis(params, mode)
    terms = tuple(_log_pair_term(*basis, s) for s in range(params.n + 1))
    log_en = terms[params.n]
    log_en2 = _logsumexp(terms)
    # Cauchy-Schwarz guarantees the ratio <= 1; clamp the ~1-ulp float excess.
    ratio = math.exp(min(0.0, 2.0 * log_en - log_en2))
    markov = math.exp(log_en) if log_en < 0.0 else 1.0
    return MomentReport(
        log_EN=log_en,
        pair_terms=terms,
        log_EN2=log_en2,
        ratio_lower_bound=ratio,
        markov_upper_bound=markov,
    )


# --------------------------------------------------------------------------
# Overlap diagnostics
# --------------------------------------------------------------------------


def overlap_exponent(params: RBParams, s: float) -> float:
    """h(s) = r*ln(1 + (p/(1-p))*s^k) - alpha*s.

    The growth rate, per n*ln(n), of the similarity-class term at overlap
    s = S/n; h(0) = 0 and h(1) = -r*ln(1-p) - alpha, which vanishes at r_cr.
    """
    beta = params.p / (1.0 - params.p)
    return params.r * math.log1p(beta * s**params.k) - params.alpha * s


def overlap_exponent_curvature(params: RBParams, s: float) -> float:
    """Second derivative of the overlap exponent.

    h''(s) = r*k*p*s^(k-2) * [(k-1)(1-p) - p*s^k] / (1 - p + p*s^k)^2,
    non-negative on [0,1] whenever k >= 1/(1-p), making h convex there.
    """
    k, p, r = params.k, params.p, params.r
    num = r * k * p * s ** (k - 2) * ((k - 1) * (1.0 - p) - p * s**k)
    den = (1.0 - p + p * s**k) ** 2
    return num / den


def overlap_correction(k: int, s: float) -> float:
    """g(s) = k(k-1)(s^k - s^(k-1))/2: the O(1/n) scope-collision correction; <= 0 on [0,1]."""
    return k * (k - 1) * (s**k - s ** (k - 1)) / 2.0


@dataclass(frozen=True)
class OverlapCurve:
    """Overlap diagnostics sampled on a uniform s-grid over [0, 1]."""

    s_grid: tuple[float, ...]
    h_vals: tuple[float, ...]
    h2_vals: tuple[float, ...]
    g_vals: tuple[float, ...]
    log_f_vals: tuple[float, ...]


def overlap_curve(params: RBParams, grid_size: int = 1001) -> OverlapCurve:
    """Sample h, h'', g and ln f(s) = h(s)*n*ln(n) on a uniform grid."""
    if grid_size < 3:
        raise ValueError(f"grid_size must be >= 3, got {grid_size}")
    nlogn = params.n * math.log(params.n)
    s_grid, h_vals, h2_vals, g_vals, log_f_vals = [], [], [], [], []
    for i in range(grid_size):
        s = i / (grid_size - 1)
        h = overlap_exponent(params, s)
        s_grid.append(s)
        h_vals.append(h)
        h2_vals.append(overlap_exponent_curvature(params, s))
        g_vals.append(overlap_correction(params.k, s))
        log_f_vals.append(h * nlogn)
    return OverlapCurve(
        s_grid=tuple(s_grid),
        h_vals=tuple(h_vals),
        h2_vals=tuple(h2_vals),
        g_vals=tuple(g_vals),
        log_f_vals=tuple(log_f_vals),
    )


# --------------------------------------------------------------------------
# Scaling-window endpoints
# --------------------------------------------------------------------------


def _resolve_delta(params: RBParams, delta: float | None, upper: float = 1.0) -> float:
    d = params.delta if delta is None else delta
    if not 0.0 < d < upper:
        raise ValueError(f"delta must lie in (0, {upper}), got {d}")
    return d


def markov_upper_r(params: RBParams, delta: float | None = None) -> float:
    """Exact r above which E(N) < delta, hence Pr(Sat) < delta by Markov.

    r_plus = r_cr + ln(delta)/(n*ln(n)*ln(1-p)) > r_cr; continuous-mode E(N)
    at r_plus equals delta identically.
    """
    d = _resolve_delta(params, delta)
    log1mp = math.log1p(-params.p)
    nlogn = params.n * math.log(params.n)
    return -params.alpha / log1mp + math.log(d) / (nlogn * log1mp)


def markov_upper_p(params: RBParams, delta: float | None = None) -> float:
    """Exact p above which E(N) < delta: p_plus = 1 - e^(-alpha/r + ln(delta)/(r*n*ln n))."""
    d = _resolve_delta(params, delta)
    nlogn = params.n * math.log(params.n)
    return -math.expm1(-params.alpha / params.r + math.log(d) / (params.r * nlogn))


def _cauchy_ratio_r(params: RBParams, r: float) -> float:
    return log_second_moment(replace(params, r=r), CONTINUOUS).ratio_lower_bound


def _cauchy_ratio_p(params: RBParams, p: float) -> float:
    return log_second_moment(replace(params, p=p), CONTINUOUS).ratio_lower_bound


def _bisect_lower(ratio_at, crit: float, target: float, axis: str) -> float:
    """Largest x in (0, crit] with ratio_at(x) >= target.

    A coarse downward scan (step crit/64) certifies a bracket first — the
    Cauchy ratio is not proven monotone — then plain bisection refines it to
    1e-6 absolute.  Raises BracketError when no scanned point reaches target.
    """
    if ratio_at(crit) >= target:
        return crit
    step = crit / _SCAN_STEPS
    lo = None
    hi = crit
    for j in range(1, _SCAN_STEPS):
        x = crit - j * step
        if ratio_at(x) >= target:
            lo, hi = x, crit - (j - 1) * step
            break
    if lo is None:
        raise BracketError(
            f"Cauchy lower bound stays below {target} on the scanned {axis}-range "
            f"({fmt_float(step)}, {fmt_float(crit)}]; no lower endpoint certified"
        )
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if ratio_at(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def second_moment_lower_r(params: RBParams, delta: float | None = None) -> float:
    """Largest r <= r_cr with Cauchy bound E(N)^2/E(N^2) >= 1 - delta (so Pr(Sat) >= 1-delta)."""
    d = _resolve_delta(params, delta, upper=0.5)
    r_cr = thresholds(params).r_cr
    return _bisect_lower(lambda r: _cauchy_ratio_r(params, r), r_cr, 1.0 - d, "r")


def second_moment_lower_p(params: RBParams, delta: float | None = None) -> float:
    """Mirror of second_moment_lower_r, bisecting on p in (0, p_cr]."""
    d = _resolve_delta(params, delta, upper=0.5)
    p_cr = thresholds(params).p_cr
    return _bisect_lower(lambda p: _cauchy_ratio_p(params, p), p_cr, 1.0 - d, "p")


LOWER_METHOD = "second-moment-bisection"
UPPER_METHOD = "markov-exact"


@dataclass(frozen=True)
class WindowReport:
    """A finite-n scaling window: Pr(Sat) >= 1-delta below `lower`, <= delta above `upper`."""

    axis: str
    delta: float
    lower: float
    upper: float
    width: float
    method_tags: tuple[str, str]
    thresholds: ThresholdReport


def window(params: RBParams, delta: float | None = None, axis: str = "r") -> WindowReport:
    """Bundle the certified lower endpoint and the exact Markov upper endpoint."""
    d = _resolve_delta(params, delta, upper=0.5)
    report = thresholds(params)
    if axis == "r":
        lower = second_moment_lower_r(params, d)
        upper = markov_upper_r(params, d)
    elif axis == "p":
        lower = second_moment_lower_p(params, d)
        upper = markov_upper_p(params, d)
    else:
        raise ValueError(f"axis must be 'r' or 'p', got {axis!r}")
    return WindowReport(
        axis=axis,
        delta=d,
        lower=lower,
        upper=upper,
        width=upper - lower,
        method_tags=(LOWER_METHOD, UPPER_METHOD),
        thresholds=report,
    )


# --------------------------------------------------------------------------
# Flat key=value text emitters (schema shared with the CLI)
# --------------------------------------------------------------------------


def threshold_report_text(report: ThresholdReport) -> str:
    lines = [
        f"r_cr={fmt_float(report.r_cr)}",
        f"p_cr={fmt_float(report.p_cr)}",
        f"regime_r={'true' if report.regime_r else 'false'}",
        f"regime_p={'true' if report.regime_p else 'false'}",
    ]
    if report.c is not None:
        lines.append(f"c={fmt_float(report.c)}")
        lines.append(f"epsilon={fmt_float(report.epsilon)}")
    return "\n".join(lines) + "\n"


def moment_report_text(report: MomentReport) -> str:
    lines = [
        f"log_E_N={fmt_float(report.log_EN)}",
        f"log_E_N2={fmt_float(report.log_EN2)}",
    ]
    if report.log_EN < 700.0:
        lines.append(f"E_N={fmt_float(math.exp(report.log_EN))}")
    if report.log_EN2 < 700.0:
        lines.append(f"E_N2={fmt_float(math.exp(report.log_EN2))}")
    lines.append(f"ratio_lower_bound={fmt_float(report.ratio_lower_bound)}")
    lines.append(f"markov_upper_bound={fmt_float(report.markov_upper_bound)}")
    return "\n".join(lines) + "\n"


def window_report_text(report: WindowReport) -> str:
    axis = report.axis
    lines = [
        f"axis={axis}",
        f"delta={fmt_float(report.delta)}",
        f"{axis}_minus={fmt_float(report.lower)}",
        f"{axis}_plus={fmt_float(report.upper)}",
        f"width={fmt_float(report.width)}",
        f"lower_method={report.method_tags[0]}",
        f"upper_method={report.method_tags[1]}",
    ]
    return "\n".join(lines) + "\n" + threshold_report_text(report.thresholds)


_CURVE_COLUMNS = {
    "h": "h_vals",
    "h2": "h2_vals",
    "g": "g_vals",
    "logf": "log_f_vals",
}


def overlap_column_text(curve: OverlapCurve, column: str) -> str:
    """Two-column plot-ready text '<s> <value>' for one overlap diagnostic."""
    if column not in _CURVE_COLUMNS:
        raise ValueError(f"column must be one of {sorted(_CURVE_COLUMNS)}, got {column!r}")
    vals = getattr(curve, _CURVE_COLUMNS[column])
    lines = [f"{fmt_float(s)} {fmt_float(v)}" for s, v in zip(curve.s_grid, vals)]
    return "\n".join(lines) + "\n"
