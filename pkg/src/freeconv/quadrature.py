"""Gauss-Jacobi rules and contour placement for Jacobi-weighted Cauchy integrals.

A component with density C (x-lo)^a (hi-x)^b is integrated either along the
real segment or, when the evaluation point sits close to the interior of the
segment, along a parabolic arc pushed into the opposite half-plane.  On the
arc the weight factorises as t^a (1-t)^b times a smooth complex factor, so the
same Gauss-Jacobi nodes apply and the pole stays far from the path.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln

MIN_NODES = 64
MAX_NODES = 4096
NODE_SCALE = 40.0
# depth parameter of the deformed path: Im(zeta) = -kappa * L * t (1 - t)
PATH_KAPPA = 0.5
_PATH_PROBE = np.linspace(0.0, 1.0, 513)


@lru_cache(maxsize=None)
def jacobi_rule(n: int, t_lo: float, t_hi: float):
    """Nodes/weights on [-1, 1] for the weight (1-s)^t_hi (1+s)^t_lo.

    Golub-Welsch on the Jacobi matrix; scipy's ``roots_jacobi`` drifts to
    ~1e-10 relative error at a few thousand nodes for unequal exponents.
    """
    a, b = float(t_hi), float(t_lo)
    ab = a + b
    k = np.arange(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2))
    diag[0] = (b - a) / (ab + 2)
    k = np.arange(1, n, dtype=float)
    ratio = np.ones_like(k)
    # (k+a+b)/(2k+a+b-1) is 0/0 at k=1 when a+b=-1; its limit is 1
    ratio[1:] = (k[1:] + ab) / (2 * k[1:] + ab - 1)
    off = np.sqrt(4 * k * (k + a) * (k + b) / ((2 * k + ab) ** 2 * (2 * k + ab + 1)) * ratio)
    s, vec = eigh_tridiagonal(diag, off)
    mass = math.exp((ab + 1) * math.log(2.0) + betaln(a + 1, b + 1))
    w = vec[0] ** 2
    w *= mass / w.sum()
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


def node_count(dist: float, half_length: float) -> int:
    """Adaptive node count, rounded up to a power of two.

    ``dist`` is measured in units of the half-length of the segment so that
    the rule is scale invariant.
    """
    rel = dist / half_length if half_length > 0 else math.inf
    if rel <= 0:
        return MAX_NODES
    n = max(MIN_NODES, math.ceil(NODE_SCALE / rel))
    if n >= MAX_NODES:
        return MAX_NODES
    return 1 << (n - 1).bit_length()


def _segment_distance(z: complex, lo: float, hi: float) -> float:
    x = min(max(z.real, lo), hi)
    return abs(z - x)


def _path(lo: float, hi: float, kappa: float, t):
    L = hi - lo
    return lo + L * t - 1j * kappa * L * t * (1.0 - t)


def placement(z: complex, lo: float, hi: float, side: int = 0):
    """Choose the integration path for the point ``z``.

    Returns ``(kappa, dist)`` where ``kappa`` is 0 for the real segment and
    ``dist`` is the distance from ``z`` to the chosen path.  ``side`` selects
    the boundary value (+1 from above, -1 from below) when ``z`` is real and
    lies on the segment; with ``side=0`` such points have ``dist == 0``.
    """
    d_real = _segment_distance(z, lo, hi)
    sgn = 1 if z.imag > 0 else (-1 if z.imag < 0 else side)
    if sgn == 0 or not (lo < z.real < hi):
        return 0.0, d_real
    kappa = PATH_KAPPA * sgn
    d_path = float(np.min(np.abs(z - _path(lo, hi, kappa, _PATH_PROBE))))
    if d_path > d_real:
        return kappa, d_path
    return 0.0, d_real


@lru_cache(maxsize=256)
def _path_rule(n: int, t_lo: float, t_hi: float, kappa: float):
    """Unit-interval arc rule: returns t-nodes, complex weight factors."""
    s, w = jacobi_rule(n, t_lo, t_hi)
    t = 0.5 * (1.0 + s)
    # (zeta-lo)^a (hi-zeta)^b = L^(a+b) t^a (1-t)^b * phi(t);  dzeta = L * dphi
    phi = (1.0 - 1j * kappa * (1.0 - t)) ** t_lo * (1.0 + 1j * kappa * t) ** t_hi
    dz = 1.0 - 1j * kappa * (1.0 - 2.0 * t)
    cw = w * phi * dz
    t.setflags(write=False)
    cw.setflags(write=False)
    return t, cw


def component_rule(lo, hi, t_lo, t_hi, scale, n, kappa=0.0):
    """Nodes and weights integrating ``scale * (x-lo)^t_lo (hi-x)^t_hi h(x)``.

    ``scale`` is the normalising constant of the component.  With
    ``kappa == 0`` the nodes are real.
    """
    L = hi - lo
    pref = scale * (0.5 * L) ** (t_lo + t_hi + 1.0)
    if kappa == 0.0:
        s, w = jacobi_rule(n, t_lo, t_hi)
        return lo + 0.5 * L * (1.0 + s), pref * w
    t, cw = _path_rule(n, t_lo, t_hi, kappa)
    return _path(lo, hi, kappa, t), pref * cw
