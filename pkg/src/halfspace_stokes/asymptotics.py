"""Model time integrals and the parabolic geometry of the blow-up point.

The sharp rates of every field component reduce to the two scalar
integrals

    Psi_k(t)      = int_0^{min(1,t)} (t - s)^{-alpha} phi^(k)(1 - s) ds,
    TildePsi_k(t) = same integrand times exp(-x_n^2 / (4 (t - s))),

evaluated here numerically (psi_numeric) and via their closed-form
asymptotic envelopes (psi_predicted).  After the substitution u = 1 - s
both are integrals over u in (max(0, 1 - t), 1) against the kernel
(t - 1 + u)^{-alpha}.

Two domain restrictions are enforced rather than papered over:

* the plain integral with alpha >= 1 and t < 1 diverges (the kernel is
  non-integrable at s = t) -- only the tilde variant is meaningful there;
* for k = 1 and t > 1 the integral of phi'(u) u^{... } diverges at u -> 0
  for the growing families, and the asymptotic statements concern the
  version truncated at s = 2 - t (u = t - 1).  psi_numeric evaluates the
  truncated object for every family so numeric and predicted values
  always refer to the same quantity.

The module also hosts the parabolic region classifier around the
space-time point (x_n, t) = (0, 1) and the rate oracle mapping
(quantity, region, time side, profile family) to the predicted leading
behavior of the boundary-driven fields.
"""

from dataclasses import dataclass
import math

import numpy as np

from .boundary_data import phi
from .quadrature import EndpointHint, integrate_1d

__all__ = [
    "PsiQuery",
    "RegionParams",
    "RegionLabel",
    "RatePrediction",
    "psi_numeric",
    "psi_predicted",
    "classify_region",
    "predicted_rate",
    "wedge_ratio",
    "eps_smallness",
    "REGION_LABELS",
]

_RES_TOL = 1e-9
REGION_LABELS = ("DPlus", "DMinus", "DZero", "TildeDPlus", "TildeDMinus",
                 "Outside")


def _a_eff(phi_spec):
    """Power-law order of phi at 0+ (0 for the slowly varying families)."""
    return phi_spec.a if phi_spec.family == "Power" else 0.0


@dataclass(frozen=True)
class PsiQuery:
    k: int
    alpha: float
    t: float
    phi: object
    x_n: float = None

    def __post_init__(self):
        if self.k not in (0, 1):
            raise ValueError(f"k must be 0 or 1, got {self.k}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        a = _a_eff(self.phi)
        if abs(self.alpha - 1.0) < _RES_TOL or abs(self.alpha + a - 1.0) < _RES_TOL:
            raise ValueError("resonant parameters: alpha and alpha + a must "
                             "stay away from 1")
        if not 0.75 < self.t < 1.25 or self.t == 1.0:
            raise ValueError(f"t must lie in (3/4, 5/4) \\ {{1}}, got {self.t}")
        if self.x_n is not None and not 0.0 < self.x_n < 0.5:
            raise ValueError(f"x_n must lie in (0, 1/2), got {self.x_n}")


def _require_xn(q, tilde):
    if tilde and q.x_n is None:
        raise ValueError("tilde variant needs x_n")


def psi_numeric(q, tilde=False, cfg=None):
    """Direct quadrature of Psi (or TildePsi) in the variable u = 1 - s."""
    from .quadrature import QuadConfig

    _require_xn(q, tilde)
    if cfg is None:
        cfg = QuadConfig()
    if not tilde and q.t < 1.0 and q.alpha > 1.0:
        raise ValueError("plain Psi diverges for alpha > 1, t < 1; "
                         "use the tilde variant")
    al, t, sp = q.alpha, q.t, q.phi
    shift = t - 1.0
    xn2 = q.x_n ** 2 if tilde else 0.0

    def f(u):
        u = np.asarray(u, dtype=float)
        val = (shift + u) ** (-al) * phi(q.k, u, sp)
        if tilde:
            val = val * np.exp(-xn2 / (4.0 * (shift + u)))
        return val

    if t > 1.0:
        lo = shift if q.k == 1 else 0.0
        small = shift
    else:
        lo = 1.0 - t
        small = 1.0 - t
    # dyadic pre-splits resolve the kernel's scale transitions
    cuts = {lo}
    c = max(small, 1e-300)
    if c > lo:
        cuts.add(c)
    while c * 4.0 < 1.0:
        c *= 4.0
        cuts.add(c)
    if tilde and lo < xn2 - shift < 1.0:
        # Gaussian factor turns on where t - s matches x_n^2
        cuts.add(xn2 - shift)
    cuts = sorted(cuts) + [1.0]

    hints = []
    if t < 1.0:
        delta = lambda d: f(lo + d)
        if tilde:
            hints = [EndpointHint(lo, "gauss", scale=q.x_n, delta_form=delta)]
        else:
            hints = [EndpointHint(lo, "algebraic", -al, delta_form=delta)]
    elif q.k == 0:
        delta = lambda d: f(lo + d)
        if sp.family == "Power":
            hints = [EndpointHint(lo, "algebraic", -sp.a, delta_form=delta)]
        elif sp.family == "LogGrowth":
            hints = [EndpointHint(lo, "log", delta_form=delta)]

    total = None
    for j in range(len(cuts) - 1):
        piece = integrate_1d(f, cuts[j], cuts[j + 1], cfg,
                             hints=hints if j == 0 else [])
        total = piece if total is None else total + piece
    return total


def psi_predicted(q, tilde=False, delta=0.125):
    """Closed-form asymptotic envelope of Psi/TildePsi: (value, regime tag).

    Values are signed (k = 1 predictions carry the sign of phi'); delta is
    the Gaussian-band constant of the near-wall cross term, a fit
    parameter rather than a pinned constant.
    """
    _require_xn(q, tilde)
    al, sp = q.alpha, q.phi
    aeff = _a_eff(sp)

    if q.t > 1.0:
        dt = q.t - 1.0
        y = max(dt, q.x_n ** 2) if tilde else dt
        pre = "tilde," if tilde else ""
        if q.k == 1:
            return y ** (1.0 - al) * phi(1, y, sp), pre + "t>1,k1"
        if al + aeff > 1.0:
            return y ** (1.0 - al) * phi(0, y, sp), pre + "t>1,k0,singular"
        return 1.0, pre + "t>1,k0,bounded"

    dt = 1.0 - q.t
    if not tilde:
        if al > 1.0:
            raise ValueError("plain Psi diverges for alpha > 1, t < 1")
        if q.k == 1:
            return dt ** (1.0 - al) * phi(1, dt, sp), "t<1,k1"
        return max(1.0, dt ** (1.0 - al) * phi(0, dt, sp)), "t<1,k0"

    xn2 = q.x_n ** 2
    if dt < xn2:
        main = xn2 ** (1.0 - al) * phi(q.k, xn2, sp)
        if q.k == 0:
            main = max(1.0, main)
        cross = (phi(q.k, dt, sp) * dt ** (2.0 - al) / xn2
                 * math.exp(-delta * xn2 / dt))
        return main + cross, "tilde,t<1,wall"
    if al > 1.0:
        return phi(q.k, dt, sp) * q.x_n ** (2.0 - 2.0 * al), "tilde,t<1,deep"
    main = dt ** (1.0 - al) * phi(q.k, dt, sp)
    if q.k == 0:
        main = max(1.0, main)
    return main, "tilde,t<1,shallow"


# -- parabolic regions ---------------------------------------------------


@dataclass(frozen=True)
class RegionParams:
    """Calibrated margins of the parabolic wedges around (x_n, t) = (0, 1).

    t0 bounds |t - 1|, t1 the time half-width of the integrability
    window, eps0 the thin near-boundary wedge, eps1 the thick far wedge.
    """
    t0: float = 0.25
    t1: float = 0.125
    eps0: float = 0.2
    eps1: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.t0 <= 0.25:
            raise ValueError(f"t0 must lie in (0, 1/4], got {self.t0}")
        if not 0.0 < self.t1 <= self.t0:
            raise ValueError(f"t1 must lie in (0, t0], got {self.t1}")
        if not 0.0 < self.eps0 <= 0.5:
            raise ValueError(f"eps0 must lie in (0, 1/2], got {self.eps0}")
        if not self.eps1 >= 1.0:
            raise ValueError(f"eps1 must be >= 1, got {self.eps1}")


@dataclass(frozen=True)
class RegionLabel:
    label: str
    params: RegionParams

    def __post_init__(self):
        if self.label not in REGION_LABELS:
            raise ValueError(f"unknown region label {self.label!r}")


def classify_region(q, params=RegionParams()):
    """Deterministic wedge label of a space-time point.

    The ratio r = x_n / |t - 1|^{1/2} splits the parabolic neighborhood:
    r <= eps0 thin wedge, r <= 1/2 wide wedge, 1/2 < r < 1 intermediate
    band, r >= 1 far side, r >= eps1 deep far wedge.  Points with
    x_n >= 1/2 or |t - 1| >= t0 fall outside the blow-up neighborhood.
    """
    xn = q.point.x_n
    dt = abs(q.t - 1.0)
    if xn >= 0.5 or dt >= params.t0:
        return RegionLabel("Outside", params)
    r = xn / math.sqrt(dt) if dt > 0.0 else math.inf
    if r <= params.eps0:
        return RegionLabel("TildeDPlus", params)
    if r <= 0.5:
        return RegionLabel("DPlus", params)
    if r < 1.0:
        return RegionLabel("DZero", params)
    if r < params.eps1:
        return RegionLabel("DMinus", params)
    return RegionLabel("TildeDMinus", params)


# -- rate oracle ---------------------------------------------------------


@dataclass(frozen=True)
class RatePrediction:
    """Leading behavior of one field quantity in one wedge.

    variable: the scale the prediction is expressed in ("1-t", "t-1",
    "x_n", or "t-1@parabola" for sampling along x_n = sqrt(t-1)).
    exponent: log-log slope against that scale for the Power family
    (None for the slowly varying families -- use model() instead).
    sign: expected sign of the quantity (+1/-1), or None when the
    theorem does not fix it.
    covered: False means the theorem gives no two-sided prediction
    there; model() then raises.
    """
    covered: bool
    quantity: str
    variable: str = ""
    exponent: float = None
    sign: int = None
    description: str = ""
    _model: object = None

    def model(self, scale):
        """Signed predicted value at the given scale (vectorized)."""
        if not self.covered or self._model is None:
            raise ValueError(f"no prediction: {self.description}")
        return self._model(np.asarray(scale, dtype=float))


_NO = lambda qty, why: RatePrediction(False, qty, description=why)


def predicted_rate(quantity, region, side, phi_spec):
    """Theorem-level rate oracle for tangential velocity, its normal
    derivative, and the pressure.

    side is "t<1" or "t>1"; region a RegionLabel.  Combinations where
    the theorem only proves a one-sided bound (or nothing) return an
    explicit not-covered descriptor, never a guess.
    """
    if side not in ("t<1", "t>1"):
        raise ValueError(f"side must be 't<1' or 't>1', got {side!r}")
    if quantity not in ("w", "dxn_w", "p"):
        raise ValueError(f"unknown quantity {quantity!r}")
    lab = region.label
    fam = phi_spec.family
    a = phi_spec.a
    sgn_dphi = -1 if fam in ("Power", "LogGrowth") else 1

    if quantity == "w":
        if fam == "LogDecay":
            return RatePrediction(True, "w", "1-t" if side == "t<1" else "t-1",
                                  0.0, None, "bounded: sup |w| finite",
                                  lambda s: np.ones_like(s))
        if side == "t<1" and lab == "TildeDMinus":
            return RatePrediction(
                True, "w", "1-t", -a if fam == "Power" else None, 1,
                "w ~ +phi(1-t) in the deep far wedge before blow-up",
                lambda s: phi(0, s, phi_spec))
        if side == "t>1" and lab in ("TildeDMinus", "DZero"):
            return RatePrediction(
                True, "w", "t-1", -a if fam == "Power" else None, -1,
                "w ~ -phi(t-1) past blow-up",
                lambda s: -phi(0, s, phi_spec))
        return _NO("w", "only the one-sided bound |w| <~ phi(|1-t|) here")

    if quantity == "dxn_w":
        if side == "t<1" and lab == "TildeDPlus":
            return RatePrediction(
                True, "dxn_w", "1-t",
                -0.5 - a if fam == "Power" else None, sgn_dphi * -1,
                "dxn_w ~ -(1-t)^{1/2} phi'(1-t) in the thin wedge",
                lambda s: -np.sqrt(s) * phi(1, s, phi_spec))
        if side == "t<1" and lab == "TildeDMinus":
            return RatePrediction(
                True, "dxn_w", "x_n",
                -1.0 - 2.0 * a if fam == "Power" else None, sgn_dphi * -1,
                "dxn_w ~ -x_n phi'(x_n^2) in the deep far wedge",
                lambda s: -s * phi(1, s ** 2, phi_spec))
        if side == "t>1" and lab == "TildeDPlus":
            return RatePrediction(
                True, "dxn_w", "t-1",
                -0.5 - a if fam == "Power" else None, -1,
                "dxn_w ~ -(t-1)^{-1/2} phi(t-1) in the thin wedge",
                lambda s: -phi(0, s, phi_spec) / np.sqrt(s))
        if side == "t>1" and lab == "TildeDMinus":
            if fam != "Power":
                return _NO("dxn_w", "slowly varying families carry an extra "
                                    "Gaussian cross term in the far wedge "
                                    "past blow-up")
            return RatePrediction(
                True, "dxn_w", "x_n", -1.0 - 2.0 * a, 1,
                "dxn_w ~ -x_n phi'(x_n^2) in the deep far wedge",
                lambda s: -s * phi(1, s ** 2, phi_spec))
        return _NO("dxn_w", "only the one-sided bound "
                            "((|t-1|) v x_n^2)^{-1/2} phi(...) here")

    # pressure
    if lab == "Outside":
        return _NO("p", "pressure rate stated only inside the blow-up "
                        "neighborhood")
    if side == "t<1":
        return RatePrediction(
            True, "p", "1-t", -1.0 - a if fam == "Power" else None,
            -sgn_dphi,
            "p ~ -phi'(1-t) before blow-up",
            lambda s: -phi(1, s, phi_spec))
    return RatePrediction(
        True, "p", "t-1@parabola", -a if fam == "Power" else None, None,
        "|p| ~ x_n (t-1)^{-1/2} phi(t-1), sampled along x_n = sqrt(t-1)",
        lambda s: phi(0, s, phi_spec))


# -- doubling-band inequalities -----------------------------------------


def wedge_ratio(phi_spec, k=0, delta1=0.25, m=400, seed=0):
    """Largest |phi^(k)(t)| e^{-delta1 x_n^2 / t} / |phi^(k)(x_n^2)| over
    the wedge sqrt(t) < x_n < 1/4 (finite iff the band inequality holds
    with constant c = returned value)."""
    rng = np.random.default_rng(seed)
    xn = np.exp(rng.uniform(math.log(2.0 ** -10), math.log(0.25), m))
    t = xn ** 2 * np.exp(rng.uniform(math.log(1e-6), 0.0, m))
    num = np.abs(phi(k, t, phi_spec)) * np.exp(-delta1 * xn ** 2 / t)
    den = np.abs(phi(k, xn ** 2, phi_spec))
    return float(np.max(num / den))


def eps_smallness(phi_spec, eps1, delta1=0.25, m=400, seed=0):
    """Largest t^{-1/2} e^{-delta1 x_n^2 / t} phi(t) / (x_n |phi'(x_n^2)|)
    over x_n >= eps1 sqrt(t); decreases as eps1 grows (far-wedge margin)."""
    rng = np.random.default_rng(seed)
    xn = np.exp(rng.uniform(math.log(2.0 ** -10), math.log(0.25), m))
    tmax = (xn / eps1) ** 2
    t = tmax * np.exp(rng.uniform(math.log(1e-6), 0.0, m))
    num = phi(0, t, phi_spec) * np.exp(-delta1 * xn ** 2 / t) / np.sqrt(t)
    den = xn * np.abs(phi(1, xn ** 2, phi_spec))
    return float(np.max(num / den))
