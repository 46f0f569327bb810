"""Quadrature engine against closed-form integrals."""

import math

import numpy as np
import pytest

from halfspace_stokes.quadrature import (QuadConfig, EndpointHint,
                                         QuadratureError, integrate_1d,
                                         integrate_nd)


@pytest.fixture
def cfg():
    return QuadConfig()


def test_smooth_polynomial_exact(cfg):
    r = integrate_1d(lambda s: 3.0 * s ** 2, 0.0, 2.0, cfg)
    assert r.converged
    assert r.value == pytest.approx(8.0, rel=1e-12)


def test_algebraic_endpoint_singularity(cfg):
    hint = EndpointHint(0.0, "algebraic", -0.5)
    r = integrate_1d(lambda s: 1.0 / np.sqrt(s), 0.0, 1.0, cfg, hints=[hint])
    assert r.value == pytest.approx(2.0, rel=1e-9)
    assert abs(r.value - 2.0) <= 10.0 * max(r.err_estimate, 1e-14)


def test_log_endpoint_singularity(cfg):
    hint = EndpointHint(0.0, "log")
    r = integrate_1d(lambda s: np.log(s), 1e-300, 1.0, cfg, hints=[hint])
    assert r.value == pytest.approx(-1.0, rel=1e-8)


def test_gaussian_shutoff_hint(cfg):
    # int_0^1 exp(-c/(4u)) du = e^{-a} - a E1(a) at a = c/4 (parts after
    # w = c/4u); sharp shut-off at u ~ c
    from scipy.special import exp1
    c = 1e-4
    a = c / 4.0
    exact = math.exp(-a) - a * float(exp1(a))
    hint = EndpointHint(0.0, "gauss", scale=math.sqrt(c))
    r = integrate_1d(lambda u: np.exp(-c / (4.0 * u)), 0.0, 1.0, cfg,
                     hints=[hint])
    assert r.value == pytest.approx(exact, rel=1e-7)


def test_gaussian_integral_2d(cfg):
    r = integrate_nd(lambda z: np.exp(-np.sum(z * z, axis=1)),
                     [(-np.inf, np.inf)] * 2, cfg,
                     weight_center=[0.0, 0.0], weight_scale=math.sqrt(0.5))
    assert r.value == pytest.approx(math.pi, rel=1e-8)


def test_vector_valued_integrand_matches_scalar(cfg):
    """A vector integrand sharing the mesh must reproduce the per-component
    scalar results exactly (same nodes, same weights)."""
    bounds = [(0.0, 1.0), (0.0, 2.0)]

    def fv(z):
        return np.stack([z[:, 0] * z[:, 1], np.cos(z[:, 0]) + z[:, 1]],
                        axis=-1)

    rv = integrate_nd(fv, bounds, cfg)
    r0 = integrate_nd(lambda z: z[:, 0] * z[:, 1], bounds, cfg)
    r1 = integrate_nd(lambda z: np.cos(z[:, 0]) + z[:, 1], bounds, cfg)
    assert rv.value[0] == pytest.approx(r0.value, rel=1e-13)
    assert rv.value[1] == pytest.approx(r1.value, rel=1e-13)
    assert rv.value[0] == pytest.approx(1.0, rel=1e-10)
    assert rv.value[1] == pytest.approx(2.0 * math.sin(1.0) + 2.0, rel=1e-10)


def test_graded_mesh_point_singularity(cfg):
    # int over unit square of |z|^{-1/2} (integrable corner singularity)
    def f(z):
        return np.sum(z * z, axis=1) ** -0.25

    r = integrate_nd(f, [(0.0, 1.0)] * 2, cfg, singular_point=[0.0, 0.0])
    # reference from scipy.integrate.dblquad at 1e-12 tolerances
    assert r.value == pytest.approx(1.2499863343292485, rel=1e-5)


def test_nan_integrand_rejected(cfg):
    with pytest.raises(QuadratureError):
        integrate_nd(lambda z: np.full(z.shape[0], np.nan),
                     [(0.0, 1.0)] * 2, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadConfig(rel_tol=-1.0)
    with pytest.raises(ValueError):
        QuadConfig(tail_sigma=2.0)
    c = QuadConfig().with_tols(10.0)
    assert c.rel_tol == pytest.approx(1e-6)
