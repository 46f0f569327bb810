"""Rate fitting, bracket constants, and shell-sum integrability verdicts
on synthetic inputs with known answers."""

import math

import numpy as np
import pytest

from halfspace_stokes.verify import (fit_rate, bracket_check,
                                     bracket_constant, lp_scan)


def test_fit_rate_exact_power_law():
    scales = 2.0 ** -np.arange(3, 11.0)
    samples = [(s, 3.0 * s ** -1.25) for s in scales]
    fit = fit_rate(samples, -1.25, tol_slope=0.01)
    assert fit.passed
    assert fit.slope == pytest.approx(-1.25, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_rate_detects_wrong_exponent():
    scales = 2.0 ** -np.arange(3, 11.0)
    samples = [(s, s ** -1.0) for s in scales]
    assert not fit_rate(samples, -1.25, tol_slope=0.1).passed


def test_fit_rate_rejects_sign_change():
    scales = 2.0 ** -np.arange(3, 11.0)
    samples = [(s, s - 0.05) for s in scales]
    with pytest.raises(ValueError, match="sign"):
        fit_rate(samples, 1.0)


def test_fit_rate_needs_range_and_count():
    with pytest.raises(ValueError):
        fit_rate([(0.5, 1.0), (0.25, 2.0)], -1.0)
    close = [(0.5 - 0.01 * k, 1.0) for k in range(8)]
    with pytest.raises(ValueError, match="dyadic"):
        fit_rate(close, 0.0)


def test_fit_rate_negative_branch():
    # uniformly negative samples fit through |value|
    scales = 2.0 ** -np.arange(3, 11.0)
    samples = [(s, -2.0 * s ** 0.5) for s in scales]
    fit = fit_rate(samples, 0.5, tol_slope=0.01)
    assert fit.passed


def test_fit_rate_curved_power_law_fails_r2():
    # a genuine power-law claim must explain the variance
    scales = 2.0 ** -np.arange(3, 11.0)
    samples = [(s, s ** -1.0 * (1.0 + 5.0 * math.sin(8.0 * math.log(s))))
               for s in scales]
    try:
        fit = fit_rate(samples, -1.0, tol_slope=2.0)
        assert not fit.passed
    except ValueError:
        pass                            # sign change is an acceptable reject


def test_bracket_check_scaling_invariance():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([1.5, 1.9, 2.0])
    r1 = bracket_check(a, b, c_max=20.0)
    r2 = bracket_check(7.0 * a, 7.0 * b, c_max=20.0)
    assert r1.constant == pytest.approx(r2.constant)
    assert r1.passed


def test_bracket_check_sign_mismatch():
    r = bracket_check([1.0, -2.0], [1.0, 2.0])
    assert not r.passed and math.isinf(r.constant)
    assert r.sign_mismatch == 1


def test_bracket_constant_exact():
    assert bracket_constant([2.0], [1.0]) == pytest.approx(2.0)
    assert bracket_constant([0.25], [1.0]) == pytest.approx(4.0)


def test_lp_scan_pure_power_profile():
    # |f| = rho^{-2} on parabolic shells with measure rho^3: critical p = 1.5
    prof = lambda xn, dt: np.maximum(xn, np.sqrt(dt)) ** -2.0
    scan = lp_scan("f", prof, [1.0, 2.0])
    assert scan.verdicts[1.0] == "converging"
    assert scan.verdicts[2.0] == "diverging"
    assert scan.critical_p == pytest.approx(1.5, rel=1e-6)


def test_lp_scan_time_measure():
    # |f| = dt^{-1} uniformly in space, time shells: critical p = 1
    prof = lambda xn, dt: np.asarray(dt, float) ** -1.0
    scan = lp_scan("f", prof, [0.5, 2.0], measure="time")
    assert scan.verdicts[0.5] == "converging"
    assert scan.verdicts[2.0] == "diverging"
    assert scan.critical_p == pytest.approx(1.0, rel=1e-6)


def test_lp_scan_log_corrections():
    # rho^{-3} |ln rho|^{-2} at p = 1 on rho^3 shells: shell sums ~ k^{-2},
    # summable despite unit geometric ratio
    prof = (lambda xn, dt: np.maximum(xn, np.sqrt(dt)) ** -3.0
            * np.abs(np.log(np.maximum(xn, np.sqrt(dt)))) ** -2.0)
    scan = lp_scan("f", prof, [1.0])
    assert scan.verdicts[1.0] == "converging"
    # |ln rho|^{+2}: shell sums ~ k^2, divergent
    prof2 = (lambda xn, dt:
             np.maximum(xn, np.sqrt(dt)) ** -3.0
             * np.abs(np.log(np.maximum(xn, np.sqrt(dt)))) ** 2.0)
    scan2 = lp_scan("f", prof2, [1.0])
    assert scan2.verdicts[1.0] == "diverging"


def test_lp_scan_verdicts_monotone():
    prof = lambda xn, dt: np.maximum(xn, np.sqrt(dt)) ** -2.0
    scan = lp_scan("f", prof, [0.5, 1.0, 2.0, 3.0])
    rank = {"converging": 0, "inconclusive": 1, "diverging": 2}
    vs = [rank[scan.verdicts[p]] for p in sorted(scan.p_list)]
    assert vs == sorted(vs)
