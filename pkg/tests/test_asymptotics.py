"""Model time integrals against an independent tanh-sinh oracle, the
envelope predictions, and the wedge classifier."""

import math

import mpmath
import numpy as np
import pytest

from halfspace_stokes.boundary_data import PhiSpec, phi
from halfspace_stokes.quadrature import QuadConfig
from halfspace_stokes.potentials import HalfSpacePoint
from halfspace_stokes.fields import SpaceTimePoint
from halfspace_stokes.asymptotics import (PsiQuery, RegionParams,
                                          psi_numeric, psi_predicted,
                                          classify_region, predicted_rate,
                                          wedge_ratio, eps_smallness,
                                          REGION_LABELS)

CFG = QuadConfig()


def oracle(q, tilde=False, dps=30):
    """Independent evaluation with mpmath tanh-sinh quadrature, splitting
    at the cutoff edges and any scale-transition point.  Works in the
    offset v = u - lo so endpoint singularities sit exactly at 0."""
    sp = q.phi
    shift = q.t - 1.0
    xn2 = q.x_n ** 2 if tilde else 0.0
    if q.t > 1.0:
        lo = shift if q.k == 1 else 0.0
    else:
        lo = 1.0 - q.t

    off = shift + lo            # shift + u = off + v, no cancellation

    def f(v):
        v = float(v)
        u = lo + v
        su = off + v
        if su <= 0.0 or u <= 0.0 or u >= 1.0:
            return mpmath.mpf(0)
        val = su ** -q.alpha * float(phi(q.k, u, sp))
        if tilde:
            val *= math.exp(-xn2 / (4.0 * su))
        return mpmath.mpf(val)

    pts = sorted({0.0, xn2, 1e-8, 1e-4, 1e-2,
                  sp.cutoff[0] - lo, sp.cutoff[1] - lo, 1.0 - lo})
    pts = [p for p in pts if 0.0 <= p <= 1.0 - lo]
    with mpmath.workdps(dps):
        return float(mpmath.quad(f, pts))


CELLS = [
    # (family, a, alpha, k, side, tilde)
    ("Power", 0.3, 0.5, 0, "t<1", False),
    ("Power", 0.3, 1.5, 1, "t>1", False),
    ("Power", 0.7, 0.5, 1, "t<1", True),
    ("Power", 0.7, 1.5, 0, "t>1", True),
    ("LogGrowth", None, 0.5, 0, "t>1", False),
    ("LogGrowth", None, 0.5, 1, "t<1", True),
    ("LogDecay", None, 0.5, 1, "t<1", False),
    ("LogDecay", None, 0.5, 0, "t>1", True),
]


@pytest.mark.parametrize("family,a,alpha,k,side,tilde", CELLS)
def test_psi_numeric_against_oracle(family, a, alpha, k, side, tilde):
    sp = PhiSpec(family) if a is None else PhiSpec(family, a=a)
    dt = 2.0 ** -8
    t = 1.0 - dt if side == "t<1" else 1.0 + dt
    xn = 2.0 ** -6 if tilde else None
    q = PsiQuery(k, alpha, t, sp, xn)
    num = psi_numeric(q, tilde, CFG).value
    ref = oracle(q, tilde)
    assert num == pytest.approx(ref, rel=1e-6)


def test_psi_query_validation():
    sp = PhiSpec("Power", a=0.5)
    with pytest.raises(ValueError, match="resonant"):
        PsiQuery(0, 1.0, 0.9, sp)
    with pytest.raises(ValueError, match="resonant"):
        PsiQuery(0, 0.5, 0.9, sp)       # alpha + a = 1
    with pytest.raises(ValueError):
        PsiQuery(0, 0.4, 0.5, sp)       # t outside (3/4, 5/4)
    with pytest.raises(ValueError):
        PsiQuery(2, 0.4, 0.9, sp)


def test_plain_psi_diverges_for_large_alpha_before_blowup():
    sp = PhiSpec("Power", a=0.3)
    q = PsiQuery(0, 1.5, 1.0 - 2.0 ** -8, sp, 0.01)
    with pytest.raises(ValueError, match="diverges"):
        psi_numeric(q, tilde=False, cfg=CFG)
    # the tilde variant is finite at the same parameters
    assert math.isfinite(psi_numeric(q, tilde=True, cfg=CFG).value)


def test_psi_predicted_brackets_numeric():
    sp = PhiSpec("Power", a=0.3)
    for tilde in (False, True):
        for side_t in (1.0 - 2.0 ** -10, 1.0 + 2.0 ** -10):
            q = PsiQuery(1, 1.5, side_t, sp, 2.0 ** -7)
            if not tilde and side_t < 1.0:
                continue
            num = psi_numeric(q, tilde, CFG).value
            pred, regime = psi_predicted(q, tilde)
            assert regime
            ratio = abs(num / pred)
            assert 1.0 / 20.0 <= ratio <= 20.0


def test_classifier_labels_and_boundaries():
    par = RegionParams()

    def lab(xn, t):
        return classify_region(
            SpaceTimePoint(HalfSpacePoint((0.0, 0.0), xn), t), par).label

    assert lab(0.6, 0.99) == "Outside"
    assert lab(0.1, 0.5) == "Outside"
    dt = 1e-4
    s = math.sqrt(dt)
    assert lab(0.05 * s, 1.0 - dt) == "TildeDPlus"
    assert lab(0.4 * s, 1.0 - dt) == "DPlus"
    assert lab(0.7 * s, 1.0 + dt) == "DZero"
    assert lab(3.0 * s, 1.0 - dt) == "DMinus"
    assert lab(20.0 * s, 1.0 + dt) == "TildeDMinus"


def test_region_params_validation():
    with pytest.raises(ValueError):
        RegionParams(t0=0.5)
    with pytest.raises(ValueError):
        RegionParams(eps1=0.5)


def test_rate_oracle_power_exponents():
    sp = PhiSpec("Power", a=0.3)
    par = RegionParams()

    def pred(qty, region, side):
        from halfspace_stokes.asymptotics import RegionLabel
        return predicted_rate(qty, RegionLabel(region, par), side, sp)

    assert pred("w", "TildeDMinus", "t<1").exponent == pytest.approx(-0.3)
    assert pred("dxn_w", "TildeDPlus", "t<1").exponent == pytest.approx(-0.8)
    assert pred("dxn_w", "TildeDMinus", "t<1").exponent == pytest.approx(-1.6)
    assert pred("p", "TildeDPlus", "t<1").exponent == pytest.approx(-1.3)
    assert pred("p", "DMinus", "t>1").exponent == pytest.approx(-0.3)
    # uncovered combinations refuse to guess
    nc = pred("dxn_w", "DZero", "t<1")
    assert not nc.covered
    with pytest.raises(ValueError, match="no prediction"):
        nc.model(0.01)


def test_rate_oracle_signs():
    from halfspace_stokes.asymptotics import RegionLabel
    par = RegionParams()
    sp = PhiSpec("Power", a=0.3)
    lab = RegionLabel("TildeDMinus", par)
    assert predicted_rate("w", lab, "t<1", sp).sign == 1
    assert predicted_rate("w", lab, "t>1", sp).sign == -1
    scale = 1e-3
    m = predicted_rate("w", lab, "t<1", sp).model(scale)
    assert m > 0.0


def test_wedge_ratio_and_eps_smallness_monotone():
    sp = PhiSpec("Power", a=0.3)
    assert wedge_ratio(sp, k=0) < 20.0
    vals = [eps_smallness(sp, e) for e in (5.0, 10.0, 20.0)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[1] < 0.05


def test_region_labels_frozen():
    assert set(REGION_LABELS) == {"DPlus", "DMinus", "DZero", "TildeDPlus",
                                  "TildeDMinus", "Outside"}
