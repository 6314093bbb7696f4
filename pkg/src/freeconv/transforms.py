"""Stieltjes, M-, eta- and psi-transforms with their derivatives.

All quantities are assembled from two families of Cauchy sums

    K_k(z) = int dmu(x) / (x - z)^(k+1),   U_k(z) = int x dmu(x) / (x - z)^(k+1),

so that m = K_0, z m + 1 = U_0 and M = 1 - 1/U_0 without cancellation at
large |z|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, PoleError, SingularityError
from .measures import Measure
from .quadrature import node_count, placement


@dataclass(frozen=True)
class CauchySums:
    z: complex
    K: tuple
    U: tuple
    I: Optional[float] = None


@dataclass(frozen=True)
class TransformValue:
    z: complex
    m: complex
    m1: complex
    m2: complex
    M: complex
    Mp: complex
    Mpp: complex
    I: float
    Ihat: float
    eta: Optional[complex] = None
    psi: Optional[complex] = None


def cauchy_sums(mu: Measure, z: complex, kmax: int = 2, side: int = 0,
                want_I: bool = False, n_override: Optional[int] = None) -> CauchySums:
    """Evaluate K_0..K_kmax and U_0..U_kmax at ``z``.

    ``side`` (+1/-1) requests the boundary value from above/below at real
    points of a component's support.  ``n_override`` fixes the node count.
    """
    z = complex(z)
    K = np.zeros(kmax + 1, dtype=complex)
    U = np.zeros(kmax + 1, dtype=complex)
    I = 0.0
    for a in mu.atoms:
        d = a.location - z
        if d == 0:
            raise SingularityError(f"z = {z} is an atom location")
        p = a.weight / d ** np.arange(1, kmax + 2)
        K += p
        U += a.location * p
        if want_I:
            I += a.weight * a.location / abs(d) ** 2
    for c in mu.components:
        kappa, dist = placement(z, c.lo, c.hi, side)
        if dist == 0.0:
            raise SingularityError(f"z = {z} lies on the support [{c.lo}, {c.hi}]")
        n = n_override or node_count(dist, 0.5 * (c.hi - c.lo))
        x, w = c.rule(n, kappa)
        r = 1.0 / (x - z)
        wr = w * r
        xwr = x * wr
        for k in range(kmax + 1):
            K[k] += wr.sum()
            U[k] += xwr.sum()
            if k < kmax:
                wr = wr * r
                xwr = xwr * r
        if want_I:
            if kappa == 0.0:
                I += float(np.dot(w, x * np.abs(r) ** 2).real)
            else:
                # path integrals are analytic only; use Im(int x/(x-z)) = Im z * I
                I += float((w * x * r).sum().imag / z.imag)
    return CauchySums(z, tuple(K), tuple(U), I if want_I else None)


def stieltjes(mu: Measure, z: complex, order: int = 0):
    """Return ``(m, m', m'')[:order+1]`` at ``z``."""
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1 or 2")
    s = cauchy_sums(mu, z, order)
    return tuple(math.factorial(k) * s.K[k] for k in range(order + 1))


def _check_pole(U0: complex, z: complex):
    if U0 == 0 or abs(U0) < 1e-15:
        raise PoleError(f"z*m(z) + 1 vanishes near z = {z}", location=z)


def M_derivatives(mu: Measure, z: complex, order: int = 1, side: int = 0):
    """(M, M', M'')[:order+1] at ``z``; the fast path used by the solvers."""
    s = cauchy_sums(mu, z, order, side)
    U = s.U
    _check_pole(U[0], z)
    u0 = U[0]
    out = [1.0 - 1.0 / u0]
    if order >= 1:
        out.append(U[1] / u0 ** 2)
    if order >= 2:
        out.append(2.0 * U[2] / u0 ** 2 - 2.0 * U[1] ** 2 / u0 ** 3)
    return tuple(out)


def M_over_z(mu: Measure, z: complex, side: int = 0) -> complex:
    """M(z)/z = m/(z m + 1) computed without cancellation."""
    s = cauchy_sums(mu, z, 0, side)
    _check_pole(s.U[0], z)
    return s.K[0] / s.U[0]


def ihat(mu: Measure, z: complex) -> float:
    """Integral of 1/|x - z|^2 against the measure representing M(z)/z - 1."""
    z = complex(z)
    if z == 0:
        raise DomainError("Ihat is not defined at 0")
    s = cauchy_sums(mu, z, 1)
    _check_pole(s.U[0], z)
    return _ihat_from(s)


def _ihat_from(s: CauchySums) -> float:
    K, U, z = s.K, s.U, s.z
    if z.imag != 0:
        return float((K[0] / U[0]).imag / z.imag)
    return float(((K[1] * U[0] - K[0] * U[1]) / U[0] ** 2).real)


def m_transform(mu: Measure, z: complex) -> TransformValue:
    """Stieltjes and M-transform values with derivatives, I and Ihat at ``z``."""
    z = complex(z)
    s = cauchy_sums(mu, z, 2, want_I=True)
    K, U = s.K, s.U
    _check_pole(U[0], z)
    u0, u1, u2 = U
    M = 1.0 - 1.0 / u0
    Mp = u1 / u0 ** 2
    Mpp = 2.0 * u2 / u0 ** 2 - 2.0 * u1 ** 2 / u0 ** 3
    Ihat = _ihat_from(s) if z != 0 else math.nan
    return TransformValue(z, K[0], K[1], 2.0 * K[2], M, Mp, Mpp, s.I, Ihat)


def eta_psi(mu: Measure, z: complex):
    """(eta(z), psi(z)) with eta(z) = 1/M(1/z) and psi(z) = -1 - m(1/z)/z."""
    z = complex(z)
    if z == 0:
        raise DomainError("eta/psi evaluated at 0")
    w = 1.0 / z
    s = cauchy_sums(mu, w, 0)
    _check_pole(s.U[0], w)
    M = 1.0 - 1.0 / s.U[0]
    if M == 0:
        raise PoleError(f"M(1/z) vanishes at z = {z}", location=z)
    psi = -1.0 - s.K[0] / z
    return 1.0 / M, psi
