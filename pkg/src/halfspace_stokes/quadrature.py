"""Adaptive quadrature engine for singular space/time integrals.

Two entry points:

``integrate_1d``
    Globally adaptive Gauss-Legendre bisection with hint-driven variable
    substitutions at singular endpoints.  The caller declares the known
    endpoint behavior (algebraic power, logarithm, or Gaussian
    ``exp(-scale^2/4(s-a))`` decay) and the engine applies a graded power
    or logarithmic substitution before adapting.

``integrate_nd``
    Tensorized composite Gauss-Legendre rule over a box (dimension <= 3),
    with Gaussian-tail truncation of unbounded directions and optional
    geometric mesh grading toward a known singular point.  Error is
    estimated by comparing successive global refinements.

Integrands must be vectorized (ndarray in, ndarray out) unless
``vectorized=False`` is passed.  NaN from an integrand is a hard error;
non-convergence is reported through the ``converged`` flag.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

__all__ = [
    "QuadConfig",
    "QuadResult",
    "EndpointHint",
    "QuadratureError",
    "integrate_1d",
    "integrate_nd",
]


class QuadratureError(Exception):
    """Raised on NaN integrand values or invalid quadrature requests."""


@dataclass
class QuadConfig:
    rel_tol: float = 1e-7
    abs_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_sigma: float = 10.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.tail_sigma < 6:
            raise ValueError("tail_sigma must be >= 6")

    def with_tols(self, factor):
        """Copy with both tolerances multiplied by ``factor``."""
        return QuadConfig(self.rel_tol * factor, self.abs_tol * factor,
                          self.max_subdivisions, self.tail_sigma)

    def tolerance(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass
class QuadResult:
    value: float
    err_estimate: float
    evaluations: int
    converged: bool

    def __add__(self, other):
        if isinstance(other, QuadResult):
            return QuadResult(self.value + other.value,
                              self.err_estimate + other.err_estimate,
                              self.evaluations + other.evaluations,
                              self.converged and other.converged)
        return NotImplemented

    def scaled(self, c):
        return QuadResult(c * self.value, abs(c) * self.err_estimate,
                          self.evaluations, self.converged)


@dataclass(frozen=True)
class EndpointHint:
    """Known integrand behavior at one endpoint of a 1-d integral.

    kind:
        "algebraic" -- f ~ (s - loc)^exponent, exponent in (-1, 0);
        "log"       -- f ~ |ln(s - loc)|^(+-1);
        "gauss"     -- f ~ exp(-scale^2 / (4 (s - loc))) near loc
                       (sharp Gaussian shut-off, log substitution applied).

    delta_form, when given, is a vectorized callable g with
    g(delta) = f(loc + delta) (lower endpoint) or f(loc - delta) (upper
    endpoint).  It lets the engine resolve the singular factor far below
    floating-point resolution of the variable s itself; without it the
    substituted variable is folded back into s and accuracy saturates
    near machine epsilon distance from the endpoint.
    """
    location: float
    kind: str
    exponent: float = 0.0
    scale: float = 0.0
    delta_form: object = None

    def __post_init__(self):
        if self.kind not in ("algebraic", "log", "gauss"):
            raise ValueError(f"unknown hint kind {self.kind!r}")
        if self.kind == "algebraic" and not (-1.0 < self.exponent <= 0.0):
            raise ValueError("algebraic hint needs exponent in (-1, 0]")


@lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


_N_LO, _N_HI = 12, 24


def _wrap_vectorized(f, vectorized):
    if vectorized:
        return f
    return lambda s: np.array([f(float(v)) for v in np.atleast_1d(s)])


def _power_order(exponent):
    # s = a + u^m removes (s-a)^p when m(1+p) - 1 >= ~1.5
    m = int(math.ceil(2.5 / (1.0 + exponent)))
    return min(max(m, 2), 12)


def _make_pieces(f, a, b, hints):
    """Split [a, b] and apply endpoint substitutions; return transformed
    integrands as (g, lo, hi) triples in the substituted variable."""
    lo_hint = hi_hint = None
    for h in hints:
        if math.isclose(h.location, a, rel_tol=0.0, abs_tol=1e-14 * max(1.0, abs(a))):
            lo_hint = h
        elif math.isclose(h.location, b, rel_tol=0.0, abs_tol=1e-14 * max(1.0, abs(b))):
            hi_hint = h
        else:
            raise QuadratureError(f"hint location {h.location} is not an endpoint of [{a}, {b}]")

    cuts = [a, 0.5 * (a + b), b] if (lo_hint and hi_hint) else [a, b]
    pieces = []
    for k in range(len(cuts) - 1):
        lo, hi = cuts[k], cuts[k + 1]
        hint = lo_hint if k == 0 and lo_hint else (hi_hint if hi == b and hi_hint else None)
        if hint is None:
            pieces.append((f, lo, hi))
            continue
        anchored_low = hint is lo_hint
        span = hi - lo
        if hint.delta_form is not None:
            fd = hint.delta_form
        elif anchored_low:
            fd = lambda delta, f=f, lo=lo: f(lo + delta)
        else:
            fd = lambda delta, f=f, hi=hi: f(hi - delta)
        if hint.kind in ("algebraic", "log"):
            m = _power_order(hint.exponent) if hint.kind == "algebraic" else 4
            um = span ** (1.0 / m)

            def g(u, fd=fd, m=m):
                return fd(u ** m) * m * u ** (m - 1)

            pieces.append((g, 0.0, um))
        else:  # gauss
            scale = max(hint.scale, 0.0)
            tau_min = scale * scale / 280.0
            if tau_min <= 0.0 or tau_min >= span:
                tau_min = span * 1e-14

            def g(v, fd=fd):
                ev = np.exp(v)
                return fd(ev) * ev

            pieces.append((g, math.log(tau_min), math.log(span)))
    return pieces


def integrate_1d(f, a, b, cfg, hints=(), vectorized=True):
    """Adaptive integral of f over (a, b) with endpoint-singularity hints."""
    if not a < b:
        raise QuadratureError(f"need a < b, got [{a}, {b}]")
    f = _wrap_vectorized(f, vectorized)
    pieces = _make_pieces(f, a, b, hints)

    x_lo, w_lo = _gl(_N_LO)
    x_hi, w_hi = _gl(_N_HI)

    n_evals = 0

    def eval_panels(panels):
        """panels: list of (g, lo, hi); returns list of (value, err)."""
        nonlocal n_evals
        out = []
        # batch per integrand function to keep one vectorized call per g
        for g, lo, hi in panels:
            mid, hw = 0.5 * (lo + hi), 0.5 * (hi - lo)
            s = np.concatenate([mid + hw * x_lo, mid + hw * x_hi])
            vals = np.asarray(g(s), dtype=float)
            n_evals += s.size
            if np.isnan(vals).any():
                raise QuadratureError(f"integrand returned NaN on [{lo}, {hi}]")
            i_lo = hw * float(w_lo @ vals[:_N_LO])
            i_hi = hw * float(w_hi @ vals[_N_LO:])
            out.append((i_hi, abs(i_hi - i_lo)))
        return out

    # initial panels: 4 per transformed piece
    panels = []
    for g, lo, hi in pieces:
        edges = np.linspace(lo, hi, 5)
        panels += [(g, edges[k], edges[k + 1]) for k in range(4)]
    stats = eval_panels(panels)

    n_subdiv = 0
    converged = True
    while True:
        total = sum(v for v, _ in stats)
        total_err = sum(e for _, e in stats)
        tol = cfg.tolerance(total)
        if total_err <= tol:
            break
        if n_subdiv >= cfg.max_subdivisions:
            converged = False
            break
        # bisect every panel holding more than its share of the budget
        thresh = max(tol / (2.0 * len(panels)), 0.25 * max(e for _, e in stats))
        refine = [k for k, (_, e) in enumerate(stats) if e > thresh]
        if not refine:
            refine = [max(range(len(stats)), key=lambda k: stats[k][1])]
        new_panels, new_idx = [], []
        for k in refine:
            g, lo, hi = panels[k]
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:   # interval exhausted by roundoff
                continue
            new_panels += [(g, lo, mid), (g, mid, hi)]
            new_idx.append(k)
        if not new_panels:
            converged = False
            break
        n_subdiv += len(new_idx)
        new_stats = eval_panels(new_panels)
        keep = [k for k in range(len(panels)) if k not in set(new_idx)]
        panels = [panels[k] for k in keep] + new_panels
        stats = [stats[k] for k in keep] + new_stats

    total = sum(v for v, _ in stats)
    total_err = sum(e for _, e in stats)
    return QuadResult(total, total_err, n_evals, converged)


def _dim_edges(lo, hi, base_width, sing, depth, window=None):
    """Panel edges on [lo, hi]: roughly uniform at base_width inside
    ``window`` (coarsening geometrically outside it), plus a geometric
    cascade toward the coordinate ``sing`` if given."""
    span = hi - lo
    if window is not None:
        wlo, whi = max(lo, window[0]), min(hi, window[1])
    else:
        wlo, whi = lo, hi
    if not wlo < whi:
        wlo, whi = lo, hi
    n_base = max(2, min(48, int(math.ceil((whi - wlo) / base_width))))
    edges = set(np.linspace(wlo, whi, n_base + 1))
    edges.update((lo, hi))
    for anchor, stop, sgn in ((whi, hi, 1.0), (wlo, lo, -1.0)):
        w, e = base_width, anchor
        while (stop - e) * sgn > 0:
            e = e + sgn * w
            if (stop - e) * sgn <= 0:
                break
            edges.add(e)
            w *= 2.0
    if sing is not None and lo - 1e-12 * span <= sing <= hi + 1e-12 * span:
        sing = min(max(sing, lo), hi)
        start = base_width
        for k in range(depth):
            d = start * 2.0 ** (-k)
            for e in (sing - d, sing + d):
                if lo < e < hi:
                    edges.add(e)
        if lo < sing < hi:
            edges.add(sing)
    return np.array(sorted(edges))


def _dim_nodes(edges, order):
    x, w = _gl(order)
    mids = 0.5 * (edges[1:] + edges[:-1])
    hws = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mids[:, None] + hws[:, None] * x[None, :]).ravel()
    wts = (hws[:, None] * w[None, :]).ravel()
    return nodes, wts


_ND_MAX_POINTS = 12 * 10 ** 7


def integrate_nd(f, bounds, cfg, weight_center=None, weight_scale=None,
                 singular_point=None, vectorized=True):
    """Tensor-product integral of f over a box of dimension <= 3.

    Infinite bounds are truncated at weight_center +- tail_sigma*weight_scale.
    ``singular_point`` marks a known integrable point singularity toward
    which the mesh is geometrically graded.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    d = len(bounds)
    if d > 3:
        raise QuadratureError(f"dimension {d} > 3 not supported")
    f = _wrap_vectorized(f, vectorized)
    if weight_center is None:
        weight_center = [0.0] * d
    box = []
    for k, (lo, hi) in enumerate(bounds):
        if not np.isfinite(lo) or not np.isfinite(hi):
            if weight_scale is None:
                raise QuadratureError("unbounded direction needs weight_scale")
            half = cfg.tail_sigma * weight_scale
            lo = weight_center[k] - half if not np.isfinite(lo) else lo
            hi = weight_center[k] + half if not np.isfinite(hi) else hi
        if not lo < hi:
            raise QuadratureError(f"empty integration range [{lo}, {hi}]")
        box.append((lo, hi))

    order = 12
    n_evals = 0
    prev = None
    value = 0.0
    err = math.inf
    converged = False
    for level in range(-1, 3):
        shrink = 1.6 ** level
        dims = []
        npts = 1
        for k, (lo, hi) in enumerate(box):
            span = hi - lo
            window = None
            if weight_scale is not None:
                base = min(span / (2.0 * shrink), 3.0 * weight_scale / shrink)
                half = cfg.tail_sigma * weight_scale
                window = (weight_center[k] - half, weight_center[k] + half)
            else:
                base = span / (4.0 * shrink)
            sing = None if singular_point is None else singular_point[k]
            edges = _dim_edges(lo, hi, base, sing, depth=11 + 4 * level, window=window)
            nodes, wts = _dim_nodes(edges, order)
            dims.append((nodes, wts))
            npts *= nodes.size
        if npts > _ND_MAX_POINTS:
            break
        # accumulate in blocks over the first dimension to bound memory
        n0 = dims[0][0].size
        block = max(1, int(2 ** 22 // max(1, npts // n0)))
        total = None
        for s0 in range(0, n0, block):
            sub = [(dims[0][0][s0:s0 + block], dims[0][1][s0:s0 + block])] + dims[1:]
            grids = np.meshgrid(*[nd for nd, _ in sub], indexing="ij")
            pts = np.stack([g.ravel() for g in grids], axis=-1)
            vals = np.asarray(f(pts), dtype=float)
            if np.isnan(vals).any():
                raise QuadratureError("integrand returned NaN")
            n_evals += pts.shape[0]
            wgrids = np.meshgrid(*[w for _, w in sub], indexing="ij")
            wt = wgrids[0]
            for g in wgrids[1:]:
                wt = wt * g
            # f may return one value per point or a vector of components
            # sharing the mesh; the weighted sum handles both shapes
            part = wt.ravel() @ vals
            total = part if total is None else total + part
        value = float(total) if np.ndim(total) == 0 else total
        if prev is not None:
            err = float(np.max(np.abs(np.subtract(value, prev))))
            if err <= cfg.tolerance(float(np.max(np.abs(value)))):
                converged = True
                break
        prev = value
    if not math.isfinite(err):
        err = float(np.max(np.abs(value)))
    return QuadResult(value, err, n_evals, converged)
