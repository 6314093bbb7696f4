"""Support endpoints of mu [x] nu and square-root coefficients at them.

Outside the support both subordination functions are real.  Writing
Omega = Omega_mu(E) and w = Omega_nu(E), the pair lies on the real curve

    M_mu(w) = M_nu(Omega),    E = Omega * w / M_nu(Omega),

so E is a function z~(Omega) along each branch (Omega below the support of
nu, or above it).  The edges are the critical points of z~, which is where
f = E^2 Ihat_mu(w) Ihat_nu(Omega) reaches 1.  Along the curve
f = (A - 1)(B - 1) with A = w M_mu'(w)/M and B = Omega M_nu'(Omega)/M.

All of this runs on the mean-one rescaled pair; results are mapped back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .density import density_at
from .errors import (BoundaryError, DegenerateEdgeError, DomainError, FreeConvError,
                     StructureError)
from .measures import Measure, dilate, validate
from .subordination import default_ladder, solve_boundary
from .transforms import M_derivatives, cauchy_sums, ihat

SCAN_POINTS = 300
OMEGA_TOL = 1e-14
SCAN_DENSITY = 200
DENSITY_FLOOR = 1e-10
DENSITY_TOL = 1e-9
DETECTOR_TOL = 1e-6
DEGENERATE = 1e-10
WINDOW = 1e-3


@dataclass(frozen=True)
class SupportInfo:
    E_minus: float
    E_plus: float
    omega_mu_at: tuple
    omega_nu_at: tuple
    gamma_mu: tuple = (math.nan, math.nan)
    gamma_nu: tuple = (math.nan, math.nan)
    residuals: tuple = (math.nan, math.nan)
    scan_edges: tuple = (math.nan, math.nan)
    zpp: tuple = (math.nan, math.nan)

    @property
    def width(self) -> float:
        return self.E_plus - self.E_minus

    def swapped(self) -> "SupportInfo":
        return replace(self, omega_mu_at=self.omega_nu_at, omega_nu_at=self.omega_mu_at,
                       gamma_mu=self.gamma_nu, gamma_nu=self.gamma_mu)

    def to_dict(self) -> dict:
        return {
            "E_minus": self.E_minus,
            "E_plus": self.E_plus,
            "omega_mu": list(self.omega_mu_at),
            "omega_nu": list(self.omega_nu_at),
            "gamma": {
                "mu_minus": self.gamma_mu[0],
                "mu_plus": self.gamma_mu[1],
                "nu_minus": self.gamma_nu[0],
                "nu_plus": self.gamma_nu[1],
            },
            "residuals": list(self.residuals),
            "scan_edges": list(self.scan_edges),
        }


def _require_edge_ready(mu: Measure, nu: Measure):
    for name, m in (("mu", mu), ("nu", nu)):
        rep = validate(m)
        if not rep.edge_ready:
            raise StructureError(f"{name} violates the edge assumptions: " + "; ".join(rep.edge_reasons))


def _mean_one(m: Measure):
    a = m.mean
    return dilate(m, 1.0 / a), a


def _M(m, x):
    return M_derivatives(m, complex(x), 0)[0].real


def _bounds(m: Measure):
    c = m.components[0]
    return c.lo, c.hi


class _Branch:
    """Real curve of the rescaled pair on one side of the supports."""

    def __init__(self, mu, nu, upper):
        self.mu, self.nu, self.upper = mu, nu, upper
        self.lo_mu, self.hi_mu = _bounds(mu)
        self.lo_nu, self.hi_nu = _bounds(nu)
        # range of M_mu on its branch; the limit at the support may be finite
        if upper:
            self.w_edge = self.hi_mu * (1 + 1e-15)
            self.M_edge = _M(mu, self.w_edge)
        else:
            self.w_edge = self.lo_mu * (1 - 1e-15)
            self.M_edge = _M(mu, self.w_edge)

    def w_of(self, om):
        """Omega_nu paired with Omega_mu = om, or None when it does not exist."""
        target = _M(self.nu, om)
        if self.upper:
            if target <= self.M_edge:
                return None
            hi = 2 * self.hi_mu
            while _M(self.mu, hi) < target:
                hi *= 2
            return brentq(lambda w: _M(self.mu, w) - target, self.w_edge, hi, xtol=1e-300, rtol=1e-15, maxiter=400)
        if not 0 < target < self.M_edge:
            return None
        return brentq(lambda w: _M(self.mu, w) - target, 0.0, self.w_edge, xtol=1e-300, rtol=1e-15, maxiter=400)

    def point(self, om):
        """(w, E, f) at Omega_mu = om."""
        w = self.w_of(om)
        if w is None:
            return None
        Mb, dMb = (v.real for v in M_derivatives(self.nu, complex(om), 1))
        _, dMa = (v.real for v in M_derivatives(self.mu, complex(w), 1))
        A = w * dMa / Mb
        B = om * dMb / Mb
        return w, om * w / Mb, (A - 1) * (B - 1)

    def h(self, om):
        p = self.point(om)
        return 1.0 if p is None else p[2] - 1.0

    def omegas(self):
        """Scan points, ordered from the physical side toward the support."""
        n = SCAN_POINTS
        if self.upper:
            span = self.hi_nu - self.lo_nu
            gaps = np.geomspace(1e3 * (self.hi_nu + span), 1e-12 * self.hi_nu, n)
            return self.hi_nu + gaps
        gaps = np.geomspace(0.5, 1e-12, n)
        inner = self.lo_nu * (1 - gaps)
        outer = self.lo_nu * np.geomspace(1e-4, 0.5, n // 3)
        return np.unique(np.concatenate([outer, inner]))


def _branch_root(br: _Branch):
    oms = br.omegas()
    prev = None
    for om in oms:
        g = br.h(float(om))
        if g >= 0:
            if prev is None:
                raise StructureError("edge function is not below 1 on the outer side")
            a, b = prev, float(om)
            break
        prev = float(om)
    else:
        raise StructureError("no sign change of f - 1 along the real branch")
    ga = br.h(a)
    while abs(b - a) > OMEGA_TOL * max(1.0, abs(a)):
        c = 0.5 * (a + b)
        if c in (a, b):
            break
        gc = br.h(c)
        if gc < 0:
            a, ga = c, gc
        else:
            b = c
    om = a
    p = br.point(om)
    if p is None:
        raise StructureError("edge image sits where the real branch ends")
    w, E, f = p
    return om, w, E, abs(f - 1.0)


def z_tilde(mu: Measure, nu: Measure, om: float, upper: bool):
    """E = z~(Omega_mu) on one real branch of the (rescaled) pair, or None."""
    br = _Branch(mu, nu, upper)
    p = br.point(om)
    return None if p is None else p[1]


def edge_function(mu: Measure, nu: Measure, E: float, state=None) -> float:
    """f(E) = E^2 Ihat_mu(Omega_nu(E)) Ihat_nu(Omega_mu(E)) at a real point outside the support."""
    if not E > 0:
        raise DomainError("E must be positive")
    st = state if state is not None else solve_boundary(mu, nu, E)
    om_mu, om_nu = st.omega_mu, st.omega_nu
    tol = 1e-9 * (1 + abs(om_mu) + abs(om_nu))
    if not st.converged or abs(om_mu.imag) > tol or abs(om_nu.imag) > tol:
        raise DomainError(f"E = {E} lies inside the support (subordination values are not real)")
    return E * E * ihat(mu, om_nu.real) * ihat(nu, om_mu.real)


def _positive(mu, nu, x):
    try:
        return density_at(mu, nu, x) > DENSITY_FLOOR
    except BoundaryError:
        return True


def density_scan_edges(mu: Measure, nu: Measure):
    """Second detector: bisection on the predicate f(x) > floor from a coarse scan."""
    lo = _bounds(mu)[0] * _bounds(nu)[0]
    hi = _bounds(mu)[1] * _bounds(nu)[1]
    xs = np.linspace(lo, hi, SCAN_DENSITY)[1:-1]
    pos = [x for x in xs if _positive(mu, nu, float(x))]
    if not pos:
        raise StructureError("density scan found no positive point")
    x0, x1 = float(pos[0]), float(pos[-1])
    step = xs[1] - xs[0]

    def refine(inside, outside):
        while abs(inside - outside) > DENSITY_TOL * max(1.0, abs(inside)):
            c = 0.5 * (inside + outside)
            if _positive(mu, nu, c):
                inside = c
            else:
                outside = c
        return 0.5 * (inside + outside)

    return refine(x0, max(x0 - step, lo)), refine(x1, min(x1 + step, hi))


def _zpp(mu, nu, om_mu, om_nu):
    """Second derivative of z~ at the edge from M', M'' of both measures."""
    Mn, dMn, ddMn = (v.real for v in M_derivatives(nu, complex(om_mu), 2))
    _, dMm, ddMm = (v.real for v in M_derivatives(mu, complex(om_nu), 2))
    return (2 * dMn / (Mn * dMm)
            - om_nu * ddMn / (Mn * dMn)
            - om_mu * dMn ** 2 * ddMm / (Mn * dMm ** 3))


def find_support(mu: Measure, nu: Measure, cross_check: bool = True) -> SupportInfo:
    """Edges E-, E+ with the subordination values there.

    The edge equation is solved by bisection in Omega_mu along each real
    branch; a density-positivity scan provides the independent cross-check.
    """
    _require_edge_ready(mu, nu)
    mu1, a = _mean_one(mu)
    nu1, b = _mean_one(nu)
    s = a * b
    om_l, w_l, E_l, r_l = _branch_root(_Branch(mu1, nu1, upper=False))
    om_u, w_u, E_u, r_u = _branch_root(_Branch(mu1, nu1, upper=True))
    lo_mu, hi_mu = _bounds(mu1)
    lo_nu, hi_nu = _bounds(nu1)
    if not (0 < om_l < lo_nu and 0 < w_l < lo_mu and om_u > hi_nu and w_u > hi_mu):
        raise StructureError("edge images violate the ordering chain")
    if not 0 < E_l < E_u:
        raise StructureError("edges are not ordered")
    info = SupportInfo(E_l * s, E_u * s, (om_l * b, om_u * b), (w_l * a, w_u * a),
                       residuals=(r_l, r_u))
    if cross_check:
        scan = density_scan_edges(mu, nu)
        info = replace(info, scan_edges=scan)
        gap = max(abs(scan[0] - info.E_minus), abs(scan[1] - info.E_plus))
        if gap > DETECTOR_TOL * max(1.0, info.E_plus):
            raise StructureError(f"edge detectors disagree by {gap:.3e}")
    return info


def sqrt_coefficients(mu: Measure, nu: Measure, info: SupportInfo) -> SupportInfo:
    """Fill gamma: Omega(z) ~ Omega(E) + gamma * sqrt(+-(E - z)) at each edge."""
    mu1, a = _mean_one(mu)
    nu1, b = _mean_one(nu)
    gm, gn, zz = [], [], []
    for k, sign in ((0, -1), (1, 1)):
        om = info.omega_mu_at[k] / b
        w = info.omega_nu_at[k] / a
        zpp_mu = _zpp(mu1, nu1, om, w)
        zpp_nu = _zpp(nu1, mu1, w, om)
        for v in (zpp_mu, zpp_nu):
            if abs(v) < DEGENERATE:
                raise DegenerateEdgeError(f"second derivative {v:.3e} vanishes at the edge")
            if v * sign <= 0:
                raise StructureError("second derivative has the wrong sign at the edge")
        gm.append(math.sqrt(2 / abs(zpp_mu)) * math.sqrt(b / a))
        gn.append(math.sqrt(2 / abs(zpp_nu)) * math.sqrt(a / b))
        zz.append(zpp_mu)
    return replace(info, gamma_mu=tuple(gm), gamma_nu=tuple(gn), zpp=tuple(zz))


def _I_real(m: Measure, x: float) -> float:
    return cauchy_sums(m, complex(x), 0, want_I=True).I


def near_edge_density(info: SupportInfo, mu: Measure, nu: Measure, x: float,
                      window: Optional[float] = None) -> float:
    """Square-root model of the density within ``window`` of either edge."""
    if window is None:
        window = WINDOW * info.width
    if abs(x - info.E_minus) <= window:
        k, d = 0, x - info.E_minus
    elif abs(x - info.E_plus) <= window:
        k, d = 1, info.E_plus - x
    else:
        raise DomainError(f"x = {x} is outside the near-edge windows")
    if d <= 0:
        return 0.0
    return info.gamma_mu[k] * _I_real(nu, info.omega_mu_at[k]) * math.sqrt(d) / (math.pi * x)
