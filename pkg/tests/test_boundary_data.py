"""Temporal profiles, cutoff, and the spatial data bump."""

import math

import numpy as np
import pytest

from halfspace_stokes.boundary_data import (PhiSpec, SupportSetA, BumpSpec,
                                            phi, g_spatial, g_temporal,
                                            smooth_step,
                                            bump_center_halfwidth,
                                            bump_values)

FAMILIES = ("Power", "LogGrowth", "LogDecay")


def spec(family, a=0.5):
    return PhiSpec(family=family, a=a)


def test_spec_validation():
    with pytest.raises(ValueError):
        PhiSpec(family="Quadratic")
    with pytest.raises(ValueError):
        PhiSpec(family="Power", a=1.5)
    with pytest.raises(ValueError):
        PhiSpec(cutoff=(0.8, 0.7))


def test_smooth_step_plateaus_and_fd():
    assert smooth_step(-0.5) == 0.0
    assert smooth_step(1.5) == 1.0
    x = np.linspace(0.05, 0.95, 31)
    h = 1e-6
    fd = (smooth_step(x + h) - smooth_step(x - h)) / (2.0 * h)
    assert np.allclose(fd, smooth_step(x, 1), rtol=1e-6, atol=1e-8)
    fd2 = (smooth_step(x + h, 1) - smooth_step(x - h, 1)) / (2.0 * h)
    assert np.allclose(fd2, smooth_step(x, 2), rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("family", FAMILIES)
def test_phi_nonnegative_and_cutoff(family):
    sp = spec(family)
    s = np.linspace(1e-6, 0.999, 500)
    vals = phi(0, s, sp)
    assert np.all(vals >= 0.0)
    assert np.all(vals[s >= sp.cutoff[1]] == 0.0)
    # plateau region: cutoff inactive
    s_in = np.linspace(0.01, sp.cutoff[0] - 0.01, 50)
    raw = {"Power": s_in ** -0.5, "LogGrowth": -np.log(s_in),
           "LogDecay": 1.0 / -np.log(s_in)}[family]
    assert np.allclose(phi(0, s_in, sp), raw, rtol=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_phi_derivative_sign_and_fd(family):
    sp = spec(family)
    s = np.linspace(0.01, sp.cutoff[0] - 0.01, 40)
    d = phi(1, s, sp)
    if family == "LogDecay":
        assert np.all(d > 0.0)
    else:
        assert np.all(d < 0.0)
    h = 1e-7
    fd = (phi(0, s + h, sp) - phi(0, s - h, sp)) / (2.0 * h)
    assert np.allclose(fd, d, rtol=1e-5)


@pytest.mark.parametrize("family", FAMILIES)
def test_phi_continuous_across_cutoff(family):
    sp = spec(family)
    for k in (0, 1):
        for edge in sp.cutoff:
            lo = phi(k, edge - 1e-9, sp)
            hi = phi(k, min(edge + 1e-9, 1.0 - 1e-12), sp)
            assert abs(hi - lo) < 1e-6 * (1.0 + abs(lo))


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("k", [0, 1])
def test_phi_doubling(family, k):
    # phi^(k)(s) comparable to phi^(k)(2s) on (0, 1/4]
    sp = spec(family)
    s = 2.0 ** -np.arange(2, 40.0)
    r = np.abs(phi(k, s, sp) / phi(k, 2.0 * s, sp))
    assert np.all(r <= 4.0) and np.all(r >= 0.25)


def test_g_temporal_is_reversed_profile():
    sp = spec("Power", a=0.3)
    s = np.array([0.2, 0.6, 0.9])
    assert np.allclose(g_temporal(0, s, sp), phi(0, 1.0 - s, sp))
    assert np.allclose(g_temporal(1, s, sp), -phi(1, 1.0 - s, sp))
    assert g_temporal(0, 1.5, sp) == 0.0
    assert g_temporal(0, -0.1, sp) == 0.0
    sp2 = PhiSpec("Power", a=0.3, alpha_scale=2.5)
    assert g_temporal(0, 0.5, sp2) == pytest.approx(
        2.5 * g_temporal(0, 0.5, sp))


@pytest.mark.parametrize("n", [2, 3])
def test_bump_box_inside_support(n):
    bump = BumpSpec()
    A = SupportSetA(n=n)
    c, hw = bump_center_halfwidth(bump, n)
    corners = np.array(np.meshgrid(*[[c - hw, c + hw]] * (n - 1))
                       ).reshape(n - 1, -1).T
    assert np.all(A.contains(corners))


@pytest.mark.parametrize("n", [2, 3])
def test_bump_vanishes_at_edge_positive_inside(n):
    bump = BumpSpec()
    c, hw = bump_center_halfwidth(bump, n)
    center = np.full((1, n - 1), c)
    assert bump_values(center, bump, n)[(0,) * (n - 1)][0] > 0.0
    edge = center.copy()
    edge[0, 0] = c + hw
    assert bump_values(edge, bump, n)[(0,) * (n - 1)][0] == 0.0


def test_bump_derivative_fd():
    bump = BumpSpec()
    n = 3
    c, hw = bump_center_halfwidth(bump, n)
    y = np.array([[c + 0.3 * hw, c - 0.2 * hw]])
    h = 1e-6
    for axis in range(2):
        order = tuple(1 if d == axis else 0 for d in range(2))
        yp, ym = y.copy(), y.copy()
        yp[0, axis] += h
        ym[0, axis] -= h
        fd = (bump_values(yp, bump, n)[(0, 0)][0]
              - bump_values(ym, bump, n)[(0, 0)][0]) / (2.0 * h)
        an = bump_values(y, bump, n, orders=[order])[order][0]
        assert fd == pytest.approx(an, rel=1e-5, abs=1e-9)


def test_g_spatial_matches_bump_values():
    bump = BumpSpec()
    n = 3
    c, _ = bump_center_halfwidth(bump, n)
    y = np.array([[c, c]])
    a = g_spatial((0, 0), y, bump, n=n)
    b = bump_values(y, bump, n)[(0, 0)]
    assert np.allclose(a, b)
