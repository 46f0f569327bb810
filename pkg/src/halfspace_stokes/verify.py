"""Statistical machinery turning field samples into pass/fail evidence.

Three instruments, all deterministic:

* fit_rate   -- least-squares log-log slope against a predicted exponent;
* bracket_check -- smallest two-sided comparability constant C with
  computed/model in [1/C, C];
* lp_scan    -- local L^p integrability verdict from predicted pointwise
  profiles summed over shrinking dyadic parabolic shells.

Samples with sign changes are rejected rather than absolute-valued
silently: a sign flip means the caller sampled across a region boundary
and the fit would be meaningless.
"""

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = [
    "RateFit",
    "LpScanResult",
    "fit_rate",
    "bracket_check",
    "bracket_constant",
    "lp_scan",
]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    predicted: float
    tol_slope: float
    passed: bool


def fit_rate(samples, predicted, tol_slope=0.1):
    """Log-log slope of |value| vs scale, compared with `predicted`.

    samples: iterable of (scale, value) pairs, scale > 0, values of one
    sign, spanning at least 3 dyadic decades with >= 6 points.  Passes
    iff |slope - predicted| <= tol_slope and r^2 >= 0.98.
    """
    pts = sorted(samples)
    if len(pts) < 6:
        raise ValueError(f"need >= 6 samples, got {len(pts)}")
    scales = np.array([s for s, _ in pts], dtype=float)
    values = np.array([v for _, v in pts], dtype=float)
    if not np.all(scales > 0.0):
        raise ValueError("scales must be positive")
    if scales[-1] / scales[0] < 8.0 * (1.0 - 1e-9):
        raise ValueError("scales must span >= 3 dyadic decades")
    signs = np.sign(values)
    if np.any(signs == 0.0) or np.any(signs != signs[0]):
        raise ValueError("values change sign: sample crosses a region "
                         "boundary")
    x = np.log(scales)
    y = np.log(np.abs(values))
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    # r^2 measures the variance explained by the line; it gates only
    # genuine power laws (|predicted| >= 1/4).  Slowly varying samples
    # (bounded quantities, log factors) are not lines in log-log space
    # and there the slope gap plus the bracket constant decide alone.
    quality_ok = r2 >= 0.98 or abs(predicted) < 0.25
    passed = abs(slope - predicted) <= tol_slope and quality_ok
    return RateFit(float(slope), float(intercept), r2, len(pts),
                   float(predicted), float(tol_slope), bool(passed))


@dataclass(frozen=True)
class BracketReport:
    constant: float
    c_max: float
    passed: bool
    sign_mismatch: int
    n_points: int
    detail: str = ""


def bracket_check(computed, model_values, c_max=20.0):
    """Smallest C with computed/model in [1/C, C] pointwise.

    Operationalizes two-sided comparability ("A is comparable to B"): the
    check passes iff the worst ratio stays within [1/c_max, c_max] and
    every pair agrees in sign.  Invariant under simultaneous positive
    rescaling of both inputs.
    """
    a = np.asarray(computed, dtype=float).ravel()
    b = np.asarray(model_values, dtype=float).ravel()
    if a.size != b.size or a.size == 0:
        raise ValueError("computed and model must have equal nonzero length")
    bad = int(np.sum(np.sign(a) * np.sign(b) <= 0.0))
    if bad:
        return BracketReport(math.inf, c_max, False, bad, a.size,
                             f"{bad}/{a.size} samples disagree in sign "
                             "with the model")
    r = np.abs(a / b)
    C = float(max(np.max(r), 1.0 / np.min(r)))
    return BracketReport(C, c_max, C <= c_max, 0, a.size)


def bracket_constant(computed, model_values):
    return bracket_check(computed, model_values, math.inf).constant


@dataclass(frozen=True)
class LpScanResult:
    quantity: str
    p_list: tuple
    shell_sums: dict
    verdicts: dict
    critical_p: float
    t1: float

    def __post_init__(self):
        order = sorted(self.p_list)
        rank = {"converging": 0, "inconclusive": 1, "diverging": 2}
        vs = [rank[self.verdicts[p]] for p in order]
        if any(b < a for a, b in zip(vs, vs[1:])):
            raise ValueError("verdicts must be monotone in p")


def _shell_stats(sums, m=8):
    """Fit the shell-sum tail to C q^k k^beta and return (ln q, beta).

    Pure geometric ratios cannot separate k^{-3} tails (summable) from
    k^{-1} (not): both have ratio -> 1.  Fitting ln(s_{k+1}/s_k) =
    ln q + beta/(k+1) over the last m ratios recovers both the geometric
    factor and the polynomial-in-k correction.
    """
    s = np.asarray(sums, dtype=float)
    keep = s > 0.0
    if not np.all(keep):
        s = s[keep]
    if s.size < 6:
        raise ValueError(f"need >= 6 positive shell sums, got {s.size}")
    k = np.arange(s.size - 1, dtype=float)[-m:]
    y = np.log(s[1:] / s[:-1])[-m:]
    beta, lnq = np.polyfit(1.0 / (k + 1.0), y, 1)
    return float(lnq), float(beta)


def _shell_verdict(sums, margin=0.1):
    """Classify per-shell contributions s_k (k shrinking dyadically
    toward the singular set) as a series verdict.

    Geometric factor q decides when clearly one-sided; at q ~ 1 the
    polynomial exponent beta decides (sum k^beta converges iff
    beta < -1), with an honest inconclusive band around the boundary."""
    try:
        lnq, beta = _shell_stats(sums)
    except ValueError:
        return "inconclusive"
    if lnq >= margin:
        return "diverging"
    if lnq <= -margin:
        return "converging"
    if beta >= -0.75:
        return "diverging"
    if beta <= -1.25:
        return "converging"
    return "inconclusive"


def lp_scan(quantity, profile, p_list, t1=0.125, n=3, n_shells=16,
            pts_per_axis=3, measure="parabolic"):
    """L^p verdict per exponent from a pointwise profile model.

    profile(x_n, dt) must return the predicted |field| magnitude at
    normal distance x_n and time offset dt = |t - 1| (vectorized).  The
    k-th parabolic shell is { 2^{-k-1} r0 <= rho <= 2^{-k} r0 } in the
    parabolic distance rho = max(x_n, sqrt(dt)), with r0 = sqrt(t1);
    each shell contributes (sampled mean of |f|^p) * shell measure.
    measure = "parabolic": tangential unit box x normal slab x time
    window, ~ rho * rho^2.  measure = "time": the profile depends on t
    only (uniform over the spatial cross-section) and integrability is a
    time-interval question; shells live in dt alone with measure ~ rho^2.
    Divergence iff the shell sums grow as k increases.
    """
    ps = tuple(sorted(p_list))
    if measure not in ("parabolic", "time"):
        raise ValueError(f"unknown measure {measure!r}")
    r0 = math.sqrt(t1)

    def sums_for(p):
        return [float(np.mean(np.abs(profile(
            *_shell_pts(k, r0, pts_per_axis, measure))) ** p)
            * _shell_meas(k, r0, measure)) for k in range(n_shells)]

    shell_sums = {p: sums_for(p) for p in ps}
    verdicts = {p: _shell_verdict(shell_sums[p]) for p in ps}
    # enforce monotonicity against sampling noise at the margins
    rank = {"converging": 0, "inconclusive": 1, "diverging": 2}
    best = 0
    for p in ps:
        best = max(best, rank[verdicts[p]])
        verdicts[p] = {0: "converging", 1: "inconclusive",
                       2: "diverging"}[best]

    crit = _critical_p(lambda p: _shell_stats(sums_for(p))[0], ps)
    return LpScanResult(quantity, ps, {p: tuple(shell_sums[p]) for p in ps},
                        verdicts, crit, t1)


def _shell_pts(k, r0, m, measure="parabolic"):
    hi = r0 * 2.0 ** (-k)
    lo = hi / 2.0
    g = (np.arange(m) + 0.5) / m
    xs = lo + (hi - lo) * g
    if measure == "time":
        return np.zeros_like(xs), xs ** 2
    xn, sdt = np.meshgrid(xs, xs, indexing="ij")
    return xn.ravel(), sdt.ravel() ** 2


def _shell_meas(k, r0, measure="parabolic"):
    hi = r0 * 2.0 ** (-k)
    lo = hi / 2.0
    if measure == "time":
        return hi ** 2 - lo ** 2
    return (hi - lo) * (hi ** 2 - lo ** 2)


def _critical_p(score_of, ps, iters=40):
    """Bisect the diverging/converging boundary in p.

    score_of(p) is the fitted ln q of the shell-sum tail at exponent p,
    monotone increasing in p and crossing zero at the critical exponent.
    nan if the scanned range never shows both signs."""
    lo = hi = None
    for p in sorted(ps):
        s = score_of(p)
        if s < 0.0:
            lo = p
        elif s > 0.0 and hi is None:
            hi = p
    if lo is None or hi is None:
        return math.nan
    a, b = lo, hi
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if score_of(mid) > 0.0:
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)
