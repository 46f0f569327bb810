"""Velocity, normal derivative, and pressure of the boundary-driven flow.

The velocity generated by the normal boundary data g_n = alpha gS gT is

    w_i = wL_i + wB_i + wN_i,

    wL_i = 4 int_0^t int L_ni(x'-y', x_n, t-s) g_n(y', s) dy' ds,
    wB_i = 4 (1 - delta_in) int_0^t int B_in(...) g_n dy' ds,
    wN_i = 2 int D_i N(x'-y', x_n) g_n(y', t) dy',

where for i = n the Gaussian term of the Poisson kernel cancels exactly
against the boundary term of the vertical layer integral hidden in L_nn,
leaving the absolutely convergent profile used here (see _heatlayer).
The tangential part of the Poisson kernel is a spatial gradient,
wL_i = D_i Phi with Phi = 4 int_0^t (M *' g_n) dtau built from the
vertical layer integral M of W_h; the remaining kernel pieces (the
B term and the Gaussian half of L_nn) are caloric and vanish as
tau -> 0+ off the boundary, so they carry no pressure.  The heat
defect of the layer kernel is exact and local in the radial profile,

    (D_t - Lap) M = (2 tau)^{-1} (4 pi tau)^{-1/2} W_h,

and together with the instantaneous Newtonian term this forces

    p = -(D_t - Lap) Phi - 2 (N *' D_t g_n)
      = p1 + p21 + p22 + p3,

    p1  = -2 (D_n D_n N *' g_n)(x, t)          (instantaneous),
    p3  = -2 (N *' D_t g_n)(x, t)              (instantaneous),
    p22 = -4 int_0^t (4 pi tau)^{-1/2} (Lap' W_h) *' g_n dtau,
    p21 =  4 D_t [ (4 pi tau)^{-1/2} W_h *' g_n time-convolution ],

p21 evaluated with the time derivative moved onto the temporal profile
for t < 1 (valid since g vanishes at s = 0) and onto the kernel for
t > 1 (the kernel is then smooth on the whole data support); p1 is the
finite part left after the tau -> 0 singularities of p21 and of the
layer kernel cancel.

Every time-convolution reduces, after tensor Gauss-Legendre quadrature
over the data bump, to 1-d integrals of radial profiles P(tau) that are
interpolated once per evaluation point (Chebyshev in ln tau of the
sqrt(tau)-scaled profile, which is bounded at tau -> 0) so the adaptive
time quadrature is nearly free.
"""

import copy
import dataclasses
from dataclasses import dataclass
import math

import numpy as np

from .boundary_data import bump_center_halfwidth, bump_values, g_temporal
from .kernels import gaussian_1d_dx, gaussian_1d_dxx, gaussian_radial
from .potentials import HalfSpacePoint
from .quadrature import EndpointHint, QuadResult, integrate_1d
from . import _heatlayer

__all__ = [
    "SpaceTimePoint",
    "FieldSample",
    "FieldEvaluator",
    "ResidualReport",
    "velocity",
    "normal_derivative",
    "pressure",
    "pde_residuals",
    "weak_solution_identity",
]

_VELOCITY_PARTS = ("wL", "wB", "wN", "w")
_PRESSURE_PARTS = ("p1", "p21", "p22", "p3", "p")


@dataclass(frozen=True)
class SpaceTimePoint:
    point: HalfSpacePoint
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")

    @property
    def n(self):
        return self.point.n


@dataclass(frozen=True)
class FieldSample:
    component: str
    index: int
    value: float
    err_estimate: float


def _dedupe(cuts, rel=1e-10):
    """Drop near-coincident subdivision points (splits can collide, e.g.
    when 1 - t equals x_n^2)."""
    out = [cuts[0]]
    for c in cuts[1:]:
        if c - out[-1] > rel * max(1.0, abs(c)):
            out.append(c)
    return out


def _newton_stack(u, n):
    """N, (D_i N)_i, (D_n D_i N)_i at offsets u (rows), vectorized."""
    r2 = np.sum(u * u, axis=1)
    if n == 3:
        r = np.sqrt(r2)
        inv3 = 1.0 / (4.0 * math.pi * r2 * r)
        N = -1.0 / (4.0 * math.pi * r)
        grad = u * inv3[:, None]
        dngrad = -3.0 * u * (u[:, -1] * inv3 / r2)[:, None]
        dngrad[:, -1] += inv3
    else:
        N = np.log(r2) / (4.0 * math.pi)
        inv2 = 1.0 / (2.0 * math.pi * r2)
        grad = u * inv2[:, None]
        dngrad = -2.0 * u * (u[:, -1] * inv2 / r2)[:, None]
        dngrad[:, -1] += inv2
    return N, grad, dngrad


class FieldEvaluator:
    """All field components at one space-time point.

    Precomputes the data-bump quadrature grid and the Chebyshev-in-ln(tau)
    interpolants of the radial kernel profiles; individual components are
    then cheap 1-d time integrals sharing that cache.
    """

    def __init__(self, q, phi_spec, bump_spec, cfg, *,
                 cheb_nodes=56, grid_order=16, profile_check=True,
                 b_grid_order=None):
        self.q = q
        self.n = q.n
        self.phi = phi_spec
        self.bump = bump_spec
        self.cfg = cfg
        self._cheb_nodes = int(cheb_nodes)
        self._check = bool(profile_check)

        n = self.n
        x_prime = np.asarray(q.point.x_prime, dtype=float)
        self._xn = q.point.x_n
        self._t = q.t

        def bump_grid(order):
            # tensor Gauss-Legendre grid over the bump support box
            c, hw = bump_center_halfwidth(bump_spec, n)
            gx, gw = np.polynomial.legendre.leggauss(int(order))
            axes = [c + hw * gx] * (n - 1)
            wts1 = [hw * gw] * (n - 1)
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=1)
            wq = np.ones(pts.shape[0])
            for d in range(n - 1):
                wmesh = np.meshgrid(
                    *[wts1[k] if k == d else np.ones_like(axes[k])
                      for k in range(n - 1)], indexing="ij")[d]
                wq = wq * wmesh.ravel()
            zero = (0,) * (n - 1)
            gS = bump_values(pts, bump_spec, n, orders=(zero,))[zero]
            diff = x_prime[None, :] - pts
            R = np.maximum(np.linalg.norm(diff, axis=1), 1e-12)
            return R, diff / R[:, None], wq * gS

        self._Rq, self._dir, self._wgS = bump_grid(grid_order)
        # the B tensor is the one genuinely rotational velocity piece;
        # checks that exploit gradient structure (weak-form identities)
        # need its bump sum at a higher absolute accuracy than the rest
        if b_grid_order is not None and int(b_grid_order) != int(grid_order):
            self._Rb, self._dirb, self._wgSb = bump_grid(b_grid_order)
        else:
            self._Rb, self._dirb, self._wgSb = self._Rq, self._dir, self._wgS

        diff = self._Rq[:, None] * self._dir
        u = np.concatenate([diff, np.full((diff.shape[0], 1), self._xn)], axis=1)
        N, grad, dngrad = _newton_stack(u, n)
        self._sum_N = float(self._wgS @ N)
        self._sum_grad = self._wgS @ grad
        self._sum_dngrad = self._wgS @ dngrad

        # bump-grid error proxy: a finer tensor rule on the same sum, so the
        # difference reflects the working grid's error, not the proxy's
        c, hw = bump_center_halfwidth(bump_spec, n)
        zero = (0,) * (n - 1)
        co = int(grid_order) + 8
        cgx, cgw = np.polynomial.legendre.leggauss(co)
        cmesh = np.meshgrid(*([c + hw * cgx] * (n - 1)), indexing="ij")
        cpts = np.stack([m.ravel() for m in cmesh], axis=1)
        cwq = np.ones(cpts.shape[0])
        for d in range(n - 1):
            wmesh = np.meshgrid(*[hw * cgw if k == d else np.ones(co)
                                  for k in range(n - 1)], indexing="ij")[d]
            cwq = cwq * wmesh.ravel()
        cgS = bump_values(cpts, bump_spec, n, orders=(zero,))[zero]
        cu = np.concatenate([x_prime[None, :] - cpts,
                             np.full((cpts.shape[0], 1), self._xn)], axis=1)
        cN = _newton_stack(cu, n)[0]
        ref = (cwq * cgS) @ cN
        self._grid_rel = max(abs(ref - self._sum_N) / max(abs(self._sum_N), 1e-300),
                             1e-15)

        # active time-convolution window in tau = t - s
        inner, outer = phi_spec.cutoff
        self._tau_a = max(self._t - 1.0, 0.0)
        self._tau_b = self._t - 1.0 + outer
        self._tau_sw = min(1e-6, 1e-3 * max(self._tau_b, 1e-10))
        self._splits = [self._t - 1.0 + inner, 1.0 - self._t,
                        2.0 * (self._t - 1.0), self._xn ** 2]

        names = []
        for i in range(1, n):
            names += [f"L{i}"]
        names += ["Ln"]
        for i in range(1, n):
            names += [f"dL{i}", f"B{i}", f"dB{i}"]
        names += ["P21", "P22", "dtP21"]
        self._names = {nm: k for k, nm in enumerate(names)}

        self._cheb = None
        self._prof_err = 0.0
        self._J_cache = {}
        # adaptive-quadrature ("rough") share of each J error; the
        # remainder (interpolation bias, tail-model bias) is smooth in x
        self._J_rough = {}

        # leading tau -> 0 coefficients: every time profile approaches
        # C * tau^{-1/2} (the vertical Gaussian derivative deposits mass
        # -(4 pi tau)^{-1/2} at z_n = 0 while the radial convolution
        # collapses onto the Newtonian slice derivatives); profiles with a
        # Gamma1(x_n, .) prefactor shut off exponentially instead (C = 0).
        xn = self._xn
        rho2 = self._Rq ** 2 + xn ** 2
        if n == 3:
            rho3 = rho2 ** 1.5
            rho5 = rho2 * rho3
            rho7 = rho2 * rho5
            dh = xn / (4.0 * math.pi * rho3)
            dRdh = -3.0 * self._Rq * xn / (4.0 * math.pi * rho5)
            dhh = 1.0 / (4.0 * math.pi * rho3) - 3.0 * xn ** 2 / (4.0 * math.pi * rho5)
            dRdhh = (-3.0 * self._Rq / (4.0 * math.pi * rho5)
                     + 15.0 * self._Rq * xn ** 2 / (4.0 * math.pi * rho7))
            dhhh = (-9.0 * xn / (4.0 * math.pi * rho5)
                    + 15.0 * xn ** 3 / (4.0 * math.pi * rho7))
        else:
            rho4 = rho2 * rho2
            rho6 = rho2 * rho4
            dh = xn / (2.0 * math.pi * rho2)
            dRdh = -self._Rq * xn / (math.pi * rho4)
            dhh = 1.0 / (2.0 * math.pi * rho2) - xn ** 2 / (math.pi * rho4)
            dRdhh = -self._Rq / (math.pi * rho4) + 4.0 * self._Rq * xn ** 2 / (math.pi * rho6)
            dhhh = -3.0 * xn / (math.pi * rho4) + 4.0 * xn ** 3 / (math.pi * rho6)
        pref = (4.0 * math.pi) ** -0.5
        C = np.zeros(len(self._names))
        for i in range(1, n):
            wd = self._wgS * self._dir[:, i - 1]
            C[self._names[f"L{i}"]] = -pref * float(wd @ dRdh)
            C[self._names[f"dL{i}"]] = -pref * float(wd @ dRdhh)
        C[self._names["Ln"]] = -pref * float(self._wgS @ dhh)
        C[self._names["P21"]] = pref * float(self._wgS @ dh)
        C[self._names["P22"]] = -pref * float(self._wgS @ dhhh)
        self._tail_C = C

    # -- radial profiles ------------------------------------------------

    def _profile_values(self, tau):
        """All scalar time profiles P_name(tau) as one vector.

        Profiles carrying a vertical-Gaussian prefactor (B, dB) or
        closed-form term (the layer-jump part of dL) are stored without
        it: the prefactor varies like exp(-c / tau), which the log-time
        interpolant resolves poorly, and it is exact to reapply it at
        evaluation time (`_assemble`)."""
        n, xn, R = self.n, self._xn, self._Rq
        tail = self.cfg.tail_sigma
        lay = _heatlayer.layer_profiles(R, xn, tau, n, ["WRh", "Whh", "WRhh"],
                                        tail_sigma=tail)
        wp = _heatlayer.w_profiles(R, [xn], tau, n,
                                   ["Wh", "WRh", "WRRh"], tail_sigma=tail)
        wr0 = _heatlayer.w_profiles(self._Rb, [0.0], tau, n, ["WR"],
                                    tail_sigma=tail)["WR"][:, 0]
        ctau = (4.0 * math.pi * tau) ** -0.5

        out = np.empty(len(self._names))
        wgS, dirs = self._wgS, self._dir
        wh, wrh, wrrh = wp["Wh"][:, 0], wp["WRh"][:, 0], wp["WRRh"][:, 0]
        for i in range(1, n):
            di = dirs[:, i - 1]
            out[self._names[f"L{i}"]] = (wgS * di) @ lay["WRh"]
            out[self._names[f"dL{i}"]] = (wgS * di) @ lay["WRhh"]
            bsum = (self._wgSb * self._dirb[:, i - 1]) @ wr0
            out[self._names[f"B{i}"]] = bsum
            out[self._names[f"dB{i}"]] = bsum
        out[self._names["Ln"]] = wgS @ lay["Whh"]
        swh = wgS @ wh
        # tangential laplacian kept on the (smooth) kernel: the data-side
        # form Lap'gS needs a much finer bump grid than everything else
        slap = wgS @ (wrrh + (n - 2) * wrh / R)
        out[self._names["P21"]] = ctau * swh
        out[self._names["P22"]] = ctau * slap
        out[self._names["dtP21"]] = ctau * (-swh / (2.0 * tau) + slap)
        return out

    def _build_interp(self):
        m = self._cheb_nodes
        lam_hi = math.log(self._tau_b)
        if self._tau_a > 0.0:
            lam_lo = math.log(self._tau_a)
            # keep at least a short range so the nodes stay distinct
            lam_lo = min(lam_lo, lam_hi - 1e-6)
        else:
            # below tau_sw the analytic tau^{-1/2} tail takes over; the
            # kernel quadrature itself loses ~eps * tau^{-3/2} to
            # cancellation in the highest radial derivative, so the nodes
            # must not descend further
            lam_lo = math.log(self._tau_sw)
        j = np.arange(m)
        lam = 0.5 * (lam_lo + lam_hi) + 0.5 * (lam_hi - lam_lo) * np.cos(j * math.pi / (m - 1))
        lam = lam[::-1].copy()
        S = np.empty((m, len(self._names)))
        for k, lk in enumerate(lam):
            tau = math.exp(lk)
            S[k] = math.sqrt(tau) * self._profile_values(tau)
        bw = np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
        bw[0] *= 0.5
        bw[-1] *= 0.5
        self._lam_nodes = lam
        self._bw = bw
        self._S = S
        self._lam_lo, self._lam_hi = lam_lo, lam_hi
        self._cheb = True

        if self._check:
            scale = np.max(np.abs(S), axis=0) + 1e-300
            rel = 0.0
            for frac in (0.08, 0.27, 0.5, 0.73, 0.92):
                k0 = int(frac * (m - 1))
                lt = 0.5 * (lam[k0] + lam[min(k0 + 1, m - 1)])
                tau = math.exp(lt)
                direct = math.sqrt(tau) * self._profile_values(tau)
                approx = self._bary(np.array([lt]))[0]
                rel = max(rel, float(np.max(np.abs(direct - approx) / scale)))
            self._prof_err = rel

    def _bary(self, lam):
        """Barycentric interpolation of the scaled profile matrix."""
        d = lam[:, None] - self._lam_nodes[None, :]
        hit = np.abs(d) < 1e-13 * max(1.0, abs(self._lam_hi))
        d = np.where(hit, 1.0, d)
        c = self._bw[None, :] / d
        out = (c @ self._S) / np.sum(c, axis=1)[:, None]
        rows, cols = np.nonzero(hit)
        if rows.size:
            out[rows] = self._S[cols]
        return out

    def _interp(self, name, tau):
        if self._cheb is None:
            self._build_interp()
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        lam = np.log(np.maximum(tau, 1e-300))
        lam = np.clip(lam, self._lam_lo, self._lam_hi)
        col = self._bary(lam)[:, self._names[name]]
        return self._assemble(name, col / np.sqrt(tau), tau)

    def _assemble(self, name, val, tau):
        """Reapply the closed-form stiff parts stripped in _profile_values."""
        if name.startswith("dB"):
            return val * gaussian_1d_dxx(self._xn, tau)
        if name.startswith("B"):
            return val * gaussian_1d_dx(self._xn, tau)
        if name.startswith("dL"):
            # layer-jump contribution Gamma1'(x_n) * d/dR [Gamma'(R)/2]
            whdr = (-self._Rq[None, :] / (4.0 * tau[:, None])
                    * gaussian_radial(self.n - 1, self._Rq[None, :], tau[:, None]))
            wd = self._wgS * self._dir[:, int(name[2:]) - 1]
            return val + gaussian_1d_dx(self._xn, tau) * (whdr @ wd)
        return val

    # -- time integrals -------------------------------------------------

    def _J(self, name, k):
        """int_{tau_a}^{tau_b} P_name(tau) g_temporal^{(k)}(t - tau) dtau."""
        key = (name, k)
        if key in self._J_cache:
            return self._J_cache[key]
        a, b = self._tau_a, self._tau_b
        if b <= a + 1e-300:
            res = QuadResult(0.0, 0.0, 0, True)
            self._J_cache[key] = res
            self._J_rough[key] = 0.0
            return res

        def f(tau):
            return self._interp(name, tau) * g_temporal(k, self._t - tau, self.phi)

        total = QuadResult(0.0, 0.0, 0, True)
        rough = 0.0
        if a == 0.0:
            # analytic tau^{-1/2} tail below the quadrature switch point
            sw = self._tau_sw
            C = float(self._tail_C[self._names[name]])
            if C != 0.0:
                def f_tail(tau):
                    return C / np.sqrt(tau) * g_temporal(k, self._t - tau, self.phi)

                hint = EndpointHint(0.0, "algebraic", -0.5, delta_form=f_tail)
                tail = integrate_1d(f_tail, 0.0, sw, self.cfg, hints=[hint])
                rough += tail.err_estimate
                # next-order corrections to the tail model are O(tau^{1/2})
                gref = abs(g_temporal(k, self._t - 0.5 * sw, self.phi))
                tail = QuadResult(tail.value,
                                  tail.err_estimate + 20.0 * abs(C) * sw ** 1.5 * gref,
                                  tail.evaluations, tail.converged)
                total = total + tail
            # remaining range handled in lambda = ln(tau); the integrand is
            # smooth there and the tau^{-1/2} scale becomes harmless
            lcuts = _dedupe([math.log(sw)] + sorted(
                math.log(c) for c in self._splits
                if sw * (1 + 1e-12) < c < b * (1 - 1e-12)) + [math.log(b)])

            def g(lam):
                tau = np.exp(lam)
                return f(tau) * tau

            for kk in range(len(lcuts) - 1):
                piece = integrate_1d(g, lcuts[kk], lcuts[kk + 1], self.cfg)
                rough += piece.err_estimate
                total = total + piece
        else:
            cuts = _dedupe([a] + sorted(c for c in self._splits
                                        if a * (1 + 1e-10) + 1e-15 < c
                                        < b * (1 - 1e-12)) + [b])
            for kk in range(len(cuts) - 1):
                lo, hi = cuts[kk], cuts[kk + 1]
                hints = []
                if kk == 0:
                    delta = (lambda d, lo=lo: self._interp(name, lo + d)
                             * g_temporal(k, self._t - lo - d, self.phi))
                    # data profile blows up at the lower edge tau = t - 1
                    if self.phi.family == "Power":
                        hints = [EndpointHint(lo, "algebraic", -self.phi.a,
                                              delta_form=delta)]
                    elif self.phi.family == "LogGrowth":
                        hints = [EndpointHint(lo, "log", 0.0, delta_form=delta)]
                piece = integrate_1d(f, lo, hi, self.cfg, hints=hints)
                rough += piece.err_estimate
                total = total + piece
        total = QuadResult(total.value,
                           total.err_estimate + self._prof_err * abs(total.value),
                           total.evaluations, total.converged)
        self._J_cache[key] = total
        self._J_rough[key] = rough
        return total

    # -- public components ----------------------------------------------

    def at_time(self, t_new):
        """Evaluator at the same spatial point but an earlier time, sharing
        this instance's profile interpolant (profiles depend on (x, tau)
        only; t enters through the integration window and the data
        weight).  Requires t <= 1 on the parent so the interpolant covers
        the whole window tau in (0, t_new - 1 + outer)."""
        if not 0.0 < t_new <= self._t:
            raise ValueError(f"t_new must lie in (0, {self._t}], got {t_new}")
        if self._tau_a > 0.0:
            raise ValueError("time reuse needs a parent window starting "
                             "at tau = 0 (t <= 1)")
        if self._cheb is None:
            self._build_interp()
        clone = copy.copy(self)
        clone.q = SpaceTimePoint(self.q.point, t_new)
        clone._t = t_new
        clone._tau_a = 0.0
        clone._tau_b = t_new - 1.0 + self.phi.cutoff[1]
        clone._splits = [t_new - 1.0 + self.phi.cutoff[0], 1.0 - t_new,
                         2.0 * (t_new - 1.0), self._xn ** 2]
        clone._J_cache = {}
        clone._J_rough = {}
        return clone

    def velocity(self, i):
        n = self.n
        if not 1 <= i <= n:
            raise ValueError(f"component index must lie in 1..{n}, got {i}")
        if i < n:
            wL = self._J(f"L{i}", 0).scaled(4.0)
            wB = self._J(f"B{i}", 0).scaled(4.0)
        else:
            wL = self._J("Ln", 0).scaled(4.0)
            wB = QuadResult(0.0, 0.0, 0, True)
        gT = g_temporal(0, self._t, self.phi)
        wN_val = 2.0 * gT * float(self._sum_grad[i - 1])
        wN_err = abs(wN_val) * self._grid_rel
        out = {
            "wL": FieldSample("wL", i, wL.value, wL.err_estimate),
            "wB": FieldSample("wB", i, wB.value, wB.err_estimate),
            "wN": FieldSample("wN", i, wN_val, wN_err),
        }
        out["w"] = FieldSample("w", i, wL.value + wB.value + wN_val,
                               wL.err_estimate + wB.err_estimate + wN_err)
        return out

    def normal_derivative(self, i):
        n = self.n
        if not 1 <= i <= n - 1:
            raise ValueError(f"tangential index required, got i={i}")
        dL = self._J(f"dL{i}", 0).scaled(4.0)
        dB = self._J(f"dB{i}", 0).scaled(4.0)
        gT = g_temporal(0, self._t, self.phi)
        inst = 2.0 * gT * float(self._sum_dngrad[i - 1])
        val = dL.value + dB.value + inst
        err = dL.err_estimate + dB.err_estimate + abs(inst) * self._grid_rel
        return FieldSample("dxn_w", i, val, err)

    def pressure(self):
        n = self.n
        gT = g_temporal(0, self._t, self.phi)
        dgT = g_temporal(1, self._t, self.phi)
        p1_val = -2.0 * gT * float(self._sum_dngrad[n - 1])
        p3_val = -2.0 * dgT * self._sum_N
        if self._t < 1.0:
            p21 = self._J("P21", 1).scaled(4.0)
        else:
            p21 = self._J("dtP21", 0).scaled(4.0)
        p22 = self._J("P22", 0).scaled(-4.0)
        out = {
            "p1": FieldSample("p1", 0, p1_val, abs(p1_val) * self._grid_rel),
            "p21": FieldSample("p21", 0, p21.value, p21.err_estimate),
            "p22": FieldSample("p22", 0, p22.value, p22.err_estimate),
            "p3": FieldSample("p3", 0, p3_val, abs(p3_val) * self._grid_rel),
        }
        out["p"] = FieldSample(
            "p", 0,
            sum(out[k].value for k in ("p1", "p21", "p22", "p3")),
            sum(out[k].err_estimate for k in ("p1", "p21", "p22", "p3")))
        return out

    def sample(self, component, index=1):
        if component in _VELOCITY_PARTS:
            return self.velocity(index)[component]
        if component == "dxn_w":
            return self.normal_derivative(index)
        if component in _PRESSURE_PARTS:
            return self.pressure()[component]
        raise ValueError(f"unknown component {component!r}")


def velocity(i, q, phi_spec, bump_spec, cfg, **kwargs):
    return FieldEvaluator(q, phi_spec, bump_spec, cfg, **kwargs).velocity(i)


def normal_derivative(i, q, phi_spec, bump_spec, cfg, **kwargs):
    return FieldEvaluator(q, phi_spec, bump_spec, cfg, **kwargs).normal_derivative(i)


def pressure(q, phi_spec, bump_spec, cfg, **kwargs):
    return FieldEvaluator(q, phi_spec, bump_spec, cfg, **kwargs).pressure()


_FAST_KW = dict(cheb_nodes=40, grid_order=10, profile_check=False)


@dataclass(frozen=True)
class ResidualReport:
    momentum: np.ndarray
    divergence: float
    momentum_budget: np.ndarray
    divergence_budget: float
    scale: float

    @property
    def conclusive(self):
        """Residuals vanish within budget, and the budget itself is small
        (<= 1e-2) next to the largest term of the momentum balance."""
        tight = 1e-2 * self.scale
        return bool(np.all(np.abs(self.momentum) <= self.momentum_budget)
                    and abs(self.divergence) <= self.divergence_budget
                    and np.all(self.momentum_budget <= tight)
                    and self.divergence_budget <= tight)


def pde_residuals(q, phi_spec, bump_spec, cfg, h, *, fast=True):
    """Momentum and divergence residuals by central differences.

    Residuals are computed at steps h and h/2; the reported value is the
    h/2 stencil.  The budget has three parts: the Richardson difference
    between the two stencils (finite-difference truncation plus any
    stencil-to-stencil evaluation noise), the smooth evaluation bias
    (bump-grid and profile-interpolation error, which is a relative
    error shared by the field and its derivatives, so it is *not*
    amplified by the second difference), and the rough adaptive-
    quadrature error propagated worst-case through 1/h^2.  The rough
    part is driven below the other two by running the time quadratures
    at tightened tolerances."""
    n = q.n
    x_prime = np.asarray(q.point.x_prime, dtype=float)
    xn, t = q.point.x_n, q.t
    if xn < 5 * h or abs(t - 1.0) < (5 * h) ** 2 or t < (5 * h) ** 2:
        raise ValueError("stencil too close to the boundary or to t in {0, 1}")
    kw = dict(cheb_nodes=40, grid_order=12, profile_check=True) if fast else {}
    tcfg = dataclasses.replace(cfg, rel_tol=min(cfg.rel_tol, 1e-11),
                               abs_tol=min(cfg.abs_tol, 1e-14))
    cache = {}
    bias = [0.0]     # max over evaluators of grid_rel + prof_err
    rough = [0.0]    # max over evaluators of summed adaptive-quad error

    def ev(xp, z, tt):
        key = (tuple(np.round(xp, 14)), round(z, 14), round(tt, 14))
        if key not in cache:
            cache[key] = FieldEvaluator(
                SpaceTimePoint(HalfSpacePoint(tuple(xp), z), tt),
                phi_spec, bump_spec, tcfg, **kw)
        return cache[key]

    def w_of(e):
        out = np.array([e.velocity(i + 1)["w"].value for i in range(n)])
        bias[0] = max(bias[0], e._grid_rel + e._prof_err)
        rough[0] = max(rough[0], 4.0 * sum(e._J_rough.values()))
        return out

    def p_of(e):
        val = e.pressure()["p"].value
        bias[0] = max(bias[0], e._grid_rel + e._prof_err)
        rough[0] = max(rough[0], 4.0 * sum(e._J_rough.values()))
        return val

    def stencil(hh):
        w0 = w_of(ev(x_prime, xn, t))
        lap = np.zeros(n)
        gradp = np.zeros(n)
        div = 0.0
        for d in range(n):
            shift = np.zeros(n)
            shift[d] = hh
            ep = ev(x_prime + shift[:-1], xn + shift[-1], t)
            em = ev(x_prime - shift[:-1], xn - shift[-1], t)
            wp_, wm_ = w_of(ep), w_of(em)
            lap += (wp_ - 2.0 * w0 + wm_) / hh ** 2
            gradp[d] = (p_of(ep) - p_of(em)) / (2.0 * hh)
            div += (wp_[d] - wm_[d]) / (2.0 * hh)
        dt = (w_of(ev(x_prime, xn, t + hh)) - w_of(ev(x_prime, xn, t - hh))) / (2.0 * hh)
        mom = dt - lap + gradp
        scale = max(np.max(np.abs(dt)), np.max(np.abs(lap)), np.max(np.abs(gradp)))
        norm1 = np.abs(dt) + np.abs(lap) + np.abs(gradp)
        return mom, div, scale, norm1

    mom_h, div_h, _, _ = stencil(h)
    mom, div, scale, norm1 = stencil(h / 2)
    hh = h / 2
    rough_prop = rough[0] * (4.0 * n / hh ** 2 + (n + 1) / hh)
    mom_budget = ((4.0 / 3.0) * np.abs(mom - mom_h)
                  + bias[0] * norm1 + rough_prop)
    div_budget = ((4.0 / 3.0) * abs(div - div_h)
                  + bias[0] * float(np.sum(norm1)) + rough[0] * n / hh)
    return ResidualReport(mom, div, mom_budget, div_budget, scale)


def _poly_bump(u, k):
    """(1 - u^2)^4 on |u| < 1 (0 outside) and derivatives k <= 3."""
    u = np.asarray(u, dtype=float)
    w = np.where(np.abs(u) < 1.0, 1.0 - u * u, 0.0)
    if k == 0:
        return w ** 4
    if k == 1:
        return -8.0 * u * w ** 3
    if k == 2:
        return -8.0 * w ** 3 + 48.0 * u * u * w ** 2
    return 144.0 * u * w ** 2 - 192.0 * u ** 3 * w


def weak_solution_identity(phi_spec, bump_spec, cfg, *, n=3, grid=6,
                           grid_t=None, fast=True,
                           center=(0.15, 0.15, 0.28, 0.65),
                           radius=(0.12, 0.12, 0.12, 0.2)):
    """Space-time weak-form identity against one divergence-free test field.

    The test field is Phi = curl(psi, 0, 0) (n = 3) or the rotated stream
    field (d2 psi, -d1 psi) (n = 2), with psi a compactly supported
    polynomial bump in space and time; Phi vanishes on the boundary and at
    both time endpoints, and D_n Phi_n is identically zero on {x_n = 0}
    because psi vanishes near it.  Returns the three integrals

        I1 = int int w . dPhi/dt,  I2 = int int w . Lap Phi,
        I3 = int_0^1 int g_n D_n Phi_n dx' ds,

    whose sum vanishes for a weak solution.
    """
    if n == 2:
        center = (center[0], center[2], center[3])
        radius = (radius[0], radius[2], radius[3])
    dims = n + 1                     # n space + 1 time
    grid_t = int(grid) if grid_t is None else int(grid_t)
    gx, gw = np.polynomial.legendre.leggauss(int(grid))
    gxt, gwt = np.polynomial.legendre.leggauss(grid_t)
    axes = [np.asarray(center[d]) + radius[d] * gx for d in range(n)]
    wts = [radius[d] * gw for d in range(n)]
    axes.append(np.asarray(center[n]) + radius[n] * gxt)
    wts.append(radius[n] * gwt)
    # gradient-structured velocity pieces integrate to zero against the
    # divergence-free test field, so their bump-grid bias cancels; only the
    # rotational B part needs absolute accuracy, via its dedicated grid.
    # profile-interpolation error must sit below the gradient-cancellation
    # floor of the identity: the n = 2 profiles are rougher in ln(tau) and
    # need 56 interpolation nodes, while 28 already reaches ~1e-6 at n = 3
    kw = (dict(cheb_nodes=56 if n == 2 else 28, grid_order=16,
               profile_check=False, b_grid_order=40) if fast
          else dict(b_grid_order=48))
    if center[-1] + radius[-1] >= 1.0:
        raise ValueError("test support must end before t = 1 so profile "
                         "builds can be shared across time nodes")

    # separable factors of psi = prod_d b((x_d - c_d)/r_d) * b((t-c)/r)
    def fac(d, k, v):
        return _poly_bump((v - center[d]) / radius[d], k) / radius[d] ** k

    I1 = I2 = 0.0
    err = 0.0
    for smulti in np.ndindex(*([grid] * n)):
        xsp = [axes[d][smulti[d]] for d in range(n)]
        # one profile build at the last time node serves the whole column
        parent = FieldEvaluator(
            SpaceTimePoint(HalfSpacePoint(tuple(xsp[:-1]), xsp[-1]),
                           float(axes[-1][-1])),
            phi_spec, bump_spec, cfg, **kw)
        sweight = math.prod(wts[d][smulti[d]] for d in range(n))
        for kt in range(grid_t):
            tt = float(axes[-1][kt])
            coords = xsp + [tt]
            weight = sweight * wts[-1][kt]
            b = [fac(d, 0, coords[d]) for d in range(dims)]
            b1 = [fac(d, 1, coords[d]) for d in range(dims)]
            b2 = [fac(d, 2, coords[d]) for d in range(dims)]
            b3 = [fac(d, 3, coords[d]) for d in range(dims)]
            ev = parent.at_time(tt)
            if n == 3:
                # Phi = (0, d3 psi, -d2 psi); needs w_2, w_3
                s2 = ev.velocity(2)["w"]
                s3 = ev.velocity(3)["w"]
                lap_d3 = (b2[0] * b[1] * b1[2] + b[0] * b2[1] * b1[2]
                          + b[0] * b[1] * b3[2]) * b[3]
                lap_d2 = (b2[0] * b1[1] * b[2] + b[0] * b3[1] * b[2]
                          + b[0] * b1[1] * b2[2]) * b[3]
                dt_d3 = b[0] * b[1] * b1[2] * b1[3]
                dt_d2 = b[0] * b1[1] * b[2] * b1[3]
                I1 += weight * (s2.value * dt_d3 - s3.value * dt_d2)
                I2 += weight * (s2.value * lap_d3 - s3.value * lap_d2)
                err += weight * ((s2.err_estimate * (abs(dt_d3) + abs(lap_d3)))
                                 + (s3.err_estimate * (abs(dt_d2) + abs(lap_d2))))
            else:
                # Phi = (d2 psi, -d1 psi); needs w_1, w_2
                s1 = ev.velocity(1)["w"]
                s2 = ev.velocity(2)["w"]
                lap_d2 = (b2[0] * b1[1] + b[0] * b3[1]) * b[2]
                lap_d1 = (b3[0] * b[1] + b1[0] * b2[1]) * b[2]
                dt_d2 = b[0] * b1[1] * b1[2]
                dt_d1 = b1[0] * b[1] * b1[2]
                I1 += weight * (s1.value * dt_d2 - s2.value * dt_d1)
                I2 += weight * (s1.value * lap_d2 - s2.value * lap_d1)
                err += weight * ((s1.err_estimate * (abs(dt_d2) + abs(lap_d2)))
                                 + (s2.err_estimate * (abs(dt_d1) + abs(lap_d1))))

    # boundary term: D_n Phi_n vanishes identically on {x_n = 0} because the
    # test potential is supported strictly inside the half space; evaluated
    # anyway over the data support for the record.
    c, hw = bump_center_halfwidth(bump_spec, n)
    I3 = 0.0
    for multi in np.ndindex(*([grid] * (n - 1)), grid):
        yp = [c + hw * gx[multi[d]] for d in range(n - 1)]
        ss = 0.5 + 0.5 * gx[multi[-1]]
        if n == 3:
            dnphin = -(fac(0, 0, yp[0]) * fac(1, 1, yp[1]) * fac(2, 1, 0.0)
                       * fac(3, 0, ss))
        else:
            dnphin = -(fac(0, 1, yp[0]) * fac(1, 1, 0.0) * fac(2, 0, ss))
        wgt = math.prod(hw * gw[multi[d]] for d in range(n - 1)) * 0.5 * gw[multi[-1]]
        gval = (g_temporal(0, ss, phi_spec)
                * bump_values(np.array([yp]), bump_spec, n)[(0,) * (n - 1)][0])
        I3 += wgt * gval * dnphin

    residual = I1 + I2 + I3
    scale = max(abs(I1), abs(I2), abs(I3), 1e-300)
    return {"I1": I1, "I2": I2, "I3": I3, "residual": residual,
            "scale": scale, "err_estimate": err}
