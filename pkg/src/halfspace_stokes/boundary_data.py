"""Boundary velocity data: singular-in-time profile times a smooth bump.

The normal boundary component is ``g_n(y', s) = alpha * gS(y') * gT(s)``
with ``gT(s) = phi(1 - s)`` supported in s in (0, 1).  The temporal
profile ``phi`` comes in three families --

    LogGrowth : phi(u) = |ln u|          (unbounded, integrable)
    LogDecay  : phi(u) = |ln u|^(-1)     (bounded, vanishing at 0+)
    Power     : phi(u) = u^(-a), 0<a<1   (power blow-up)

-- each multiplied by a C-infinity cutoff eta equal to 1 on
(0, cutoff.inner] and 0 on [cutoff.outer, infinity), so phi vanishes at
u = 1 and is smooth up to the cutoff zone.  The spatial factor gS is a
C-infinity product bump compactly supported inside the set

    A = {1 < |y'| < 2} intersect {-2 < y_i < -1 for all i},

with hand-coded derivatives through second order.
"""

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = [
    "PhiSpec",
    "SupportSetA",
    "BumpSpec",
    "phi",
    "g_spatial",
    "g_temporal",
    "smooth_step",
    "bump_center_halfwidth",
    "bump_values",
]

_FAMILIES = ("LogGrowth", "LogDecay", "Power")


@dataclass(frozen=True)
class PhiSpec:
    family: str = "Power"
    a: float = 0.5
    cutoff: tuple = (0.5, 0.75)
    alpha_scale: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if self.family == "Power" and not 0.0 < self.a < 1.0:
            raise ValueError(f"Power exponent a must lie in (0,1), got {self.a}")
        inner, outer = self.cutoff
        if not (0.0 < inner < outer <= 1.0):
            raise ValueError(f"need 0 < inner < outer <= 1, got {self.cutoff}")
        if not self.alpha_scale > 0:
            raise ValueError("alpha_scale must be positive")


@dataclass(frozen=True)
class SupportSetA:
    """Membership test for the spatial support set A."""
    n: int = 3

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        pts = np.atleast_2d(y)
        r = np.linalg.norm(pts, axis=-1)
        ok = (r > 1.0) & (r < 2.0) & np.all((pts > -2.0) & (pts < -1.0), axis=-1)
        return bool(ok[0]) if y.ndim == 1 else ok


@dataclass(frozen=True)
class BumpSpec:
    margin: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.margin < 0.5:
            raise ValueError(f"margin must lie in (0, 1/2), got {self.margin}")


def bump_center_halfwidth(spec, n):
    """Per-coordinate center c and half-width h of the bump support box.

    The box [c-h, c+h]^(n-1) must sit strictly inside A.  For n = 3 the
    binding constraints are y_i < -1 (box side) and |y'| < 2 (annulus,
    active at the most negative corner), giving c-h > -sqrt(2) and
    c+h < -1; the margin shrinks the maximal such box.
    """
    if n == 3:
        lo, hi = -math.sqrt(2.0), -1.0
    elif n == 2:
        lo, hi = -2.0, -1.0
    else:
        raise ValueError(f"bump support implemented for n in {{2,3}}, got {n}")
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo) * (1.0 - spec.margin)
    return c, h


def _mollifier(u, k):
    """k-th derivative of e^{-1/(1-u^2)} on |u|<1, 0 outside (k <= 2)."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    out = np.zeros_like(u)
    ui = u[inside]
    w = 1.0 - ui * ui
    b = np.exp(-1.0 / w)
    if k == 0:
        out[inside] = b
    elif k == 1:
        out[inside] = b * (-2.0 * ui / (w * w))
    elif k == 2:
        out[inside] = b * (4.0 * ui * ui / w ** 4 - 2.0 / (w * w) - 8.0 * ui * ui / w ** 3)
    else:
        raise ValueError(f"mollifier derivative order {k} > 2")
    return out


def _q(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _q1(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.0
    out[pos] = np.exp(-1.0 / x[pos]) / x[pos] ** 2
    return out


def _q2(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.0
    xp = x[pos]
    out[pos] = np.exp(-1.0 / xp) * (1.0 / xp ** 4 - 2.0 / xp ** 3)
    return out


def smooth_step(x, k=0):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1; k-th derivative, k <= 2."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    q, r = _q(x), _q(1.0 - x)
    q1, r1 = _q1(x), -_q1(1.0 - x)
    q2, r2 = _q2(x), _q2(1.0 - x)
    den = q + r
    den = np.where(den == 0.0, 1.0, den)
    if k == 0:
        val = np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, q / den))
    elif k == 1:
        u = q1 * r - q * r1
        val = np.where((x <= 0.0) | (x >= 1.0), 0.0, u / den ** 2)
    elif k == 2:
        u = q1 * r - q * r1
        u1 = q2 * r - q * r2
        val = np.where((x <= 0.0) | (x >= 1.0),
                       0.0, u1 / den ** 2 - 2.0 * u * (q1 + r1) / den ** 3)
    else:
        raise ValueError(f"smooth_step derivative order {k} > 2")
    return float(val[0]) if scalar else val


def _eta(s, spec, k=0):
    """Cutoff eta(s): 1 for s <= inner, 0 for s >= outer; k-th derivative."""
    inner, outer = spec.cutoff
    width = outer - inner
    x = (outer - np.asarray(s, dtype=float)) / width
    return smooth_step(x, k) * (-1.0 / width) ** k


def _base_profile(s, spec, k):
    s = np.asarray(s, dtype=float)
    if spec.family == "Power":
        if k == 0:
            return s ** (-spec.a)
        return -spec.a * s ** (-spec.a - 1.0)
    ln = np.log(s)
    if spec.family == "LogGrowth":
        # |ln s| = -ln s on (0,1); extended smoothly (cutoff kills s >= 3/4)
        return -ln if k == 0 else -1.0 / s
    # LogDecay: (-ln s)^(-1)
    if k == 0:
        return 1.0 / (-ln)
    return 1.0 / (s * ln * ln)


def phi(k, s, spec):
    """phi^(k)(s) for k in {0, 1}, including the smooth cutoff."""
    if k not in (0, 1):
        raise ValueError(f"derivative order must be 0 or 1, got {k}")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0.0):
        raise ValueError("phi is evaluated for s > 0 only")
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    _, outer = spec.cutoff
    dead = s_arr >= outer
    # avoid evaluating the raw profile where the cutoff vanishes
    # (LogDecay blows up at s -> 1)
    safe = np.where(dead, 0.5 * outer, s_arr)
    if k == 0:
        val = _base_profile(safe, spec, 0) * _eta(safe, spec, 0)
    else:
        val = (_base_profile(safe, spec, 1) * _eta(safe, spec, 0)
               + _base_profile(safe, spec, 0) * _eta(safe, spec, 1))
    val = np.where(dead, 0.0, val)
    return float(val[0]) if scalar else val


def g_temporal(k, s, spec):
    """alpha * (d/ds)^k phi(1-s); identically 0 outside 0 < s < 1."""
    if k not in (0, 1):
        raise ValueError(f"derivative order must be 0 or 1, got {k}")
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    live = (s_arr > 0.0) & (s_arr < 1.0)
    out = np.zeros_like(s_arr)
    if np.any(live):
        out[live] = (-1.0) ** k * phi(k, 1.0 - s_arr[live], spec)
    out = out * spec.alpha_scale
    return float(out[0]) if scalar else out


def bump_values(y, spec, n, orders=None):
    """Vectorized bump gS and selected derivatives at points y (m, n-1).

    orders: iterable of multi-indices over the n-1 tangential coordinates,
    |order| <= 2; returns dict order -> array of shape (m,).
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[1] != n - 1:
        raise ValueError(f"points have dimension {y.shape[1]}, expected {n - 1}")
    if orders is None:
        orders = ((0,) * (n - 1),)
    c, h = bump_center_halfwidth(spec, n)
    u = (y - c) / h
    per = {kk: np.stack([_mollifier(u[:, d], kk) for d in range(n - 1)], axis=1)
           for kk in (0, 1, 2)}
    out = {}
    for order in orders:
        order = tuple(order)
        if len(order) != n - 1 or sum(order) > 2 or min(order) < 0:
            raise ValueError(f"bad multi-index {order}")
        v = np.ones(y.shape[0])
        for d, kk in enumerate(order):
            v = v * per[kk][:, d] / h ** kk
        out[order] = v
    return out


def g_spatial(order, y_prime, spec, n=None):
    """D^order gS(y') for |order| <= 2 (scalar interface)."""
    y_prime = np.asarray(y_prime, dtype=float).ravel()
    if n is None:
        n = y_prime.size + 1
    return float(bump_values(y_prime[None, :], spec, n, orders=(tuple(order),))[tuple(order)][0])
