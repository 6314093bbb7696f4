"""Atoms and absolutely continuous density of mu [x] nu."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BoundaryError, DomainError, FreeConvError
from .measures import Measure
from .subordination import (EpsLadder, SubordinationState, default_ladder, solve_boundary,
                            stability_check)

CLIP = 1e-12
NEG_TOL = 1e-8
NEAR_EDGE = 1e-4
# rungs used for points close to a known edge
NEAR_EDGE_RUNGS = 20
ATOM_STRICT = 1e-14
# larger fitted exponents mean the assumed edge is far from the real one
MAX_TAIL_POWER = 4.0


@dataclass(frozen=True)
class AtomReport:
    entries: tuple  # (c, mass, (u, v) or "zero")

    @property
    def total(self) -> float:
        return math.fsum(e[1] for e in self.entries)

    def mass_at(self, c: float) -> float:
        return math.fsum(e[1] for e in self.entries if e[0] == c)

    def to_list(self):
        return [{"x": c, "mass": w, "witness": wit if wit == "zero" else list(wit)}
                for c, w, wit in self.entries]


def atoms(mu: Measure, nu: Measure) -> AtomReport:
    """Atoms of mu [x] nu: max of the masses at 0, and uv when mu{u} + nu{v} > 1."""
    out = []
    w0 = max(mu.atom_weight(0.0), nu.atom_weight(0.0))
    if w0 > 0:
        out.append((0.0, w0, "zero"))
    for a in mu.atoms:
        if a.location <= 0:
            continue
        for b in nu.atoms:
            if b.location <= 0:
                continue
            s = a.weight + b.weight
            if s > 1.0 + ATOM_STRICT:
                out.append((a.location * b.location, s - 1.0, (a.location, b.location)))
    out.sort(key=lambda e: e[0])
    return AtomReport(tuple(out))


def _density_from(state: SubordinationState, x: float) -> float:
    f = state.m_rho.imag / math.pi
    if f < -NEG_TOL * (1 + abs(state.m_rho)):
        raise BoundaryError(f"negative density {f} at x = {x}", state)
    return f if f >= CLIP else 0.0


def _near(x, edges, width=NEAR_EDGE):
    return edges is not None and any(abs(x - e) <= width for e in edges)


def density_at(mu: Measure, nu: Measure, x: float, ladder: Optional[EpsLadder] = None,
               init: Optional[SubordinationState] = None, edges=None) -> float:
    """f(x) = Im m_rho(x + i0) / pi."""
    return density_point(mu, nu, x, ladder, init, edges)[0]


def density_point(mu, nu, x, ladder=None, init=None, edges=None):
    """``(f, state)`` at ``x``; raises BoundaryError when extrapolation fails."""
    if not x > 0:
        raise DomainError("density is evaluated on (0, inf)")
    if atoms(mu, nu).mass_at(float(x)) > 0:
        raise DomainError(f"x = {x} is an atom of the convolution")
    if ladder is None:
        ladder = default_ladder(rungs=NEAR_EDGE_RUNGS) if _near(x, edges) else default_ladder()
    st = solve_boundary(mu, nu, x, ladder, init)
    if not st.converged:
        raise BoundaryError(f"boundary value failed at x = {x}: {st.message}", st)
    return _density_from(st, x), st


@dataclass
class DensityGrid:
    xs: np.ndarray
    fs: np.ndarray
    xf_max: float
    residuals: np.ndarray
    d_mu: np.ndarray
    d_nu: np.ndarray
    ok: np.ndarray
    states: list = field(default_factory=list, repr=False)
    support: Optional[tuple] = None

    @property
    def failures(self) -> int:
        return int(np.count_nonzero(~self.ok))


def density(mu: Measure, nu: Measure, xs: Sequence[float], ladder: Optional[EpsLadder] = None,
            edges=None) -> DensityGrid:
    """Density on arbitrary sorted points, continuing the solution along ``xs``."""
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    fs = np.zeros(n)
    res = np.full(n, np.nan)
    dmu = np.full(n, np.nan)
    dnu = np.full(n, np.nan)
    ok = np.zeros(n, dtype=bool)
    states = []
    prev = None
    for i, x in enumerate(xs):
        st = None
        try:
            f, st = density_point(mu, nu, float(x), ladder, prev, edges)
            fs[i] = f
            ok[i] = True
        except BoundaryError as exc:
            fs[i] = np.nan
            st = exc.state
        except FreeConvError:
            fs[i] = np.nan
        if st is not None:
            res[i] = st.residual
            dmu[i], dnu[i] = stability_check(st, mu, nu)
        states.append(st)
        prev = st if (st is not None and st.converged) else None
    good = ok & np.isfinite(fs)
    xf_max = float(np.max(xs[good] * fs[good])) if good.any() else float("nan")
    support = tuple(edges) if edges is not None else support_bound(mu, nu)
    return DensityGrid(xs, fs, xf_max, res, dmu, dnu, ok, states, support)


def density_grid(mu: Measure, nu: Measure, lo: float, hi: float, n: int,
                 ladder: Optional[EpsLadder] = None, edges=None) -> DensityGrid:
    if not (0 < lo < hi):
        raise DomainError("need 0 < lo < hi")
    if n < 2:
        raise DomainError("need n >= 2")
    return density(mu, nu, np.linspace(lo, hi, n), ladder, edges)


def _tail(x0, x1, x2, f0, f1, f2, e):
    """Mass between the edge ``e`` and ``x0`` under a fitted power law c|x-e|^p.

    The exponent comes from the two points closest to the edge; the third
    point only guards against non-power behaviour (then no correction).
    """
    d0, d1, d2 = abs(x0 - e), abs(x1 - e), abs(x2 - e)
    if min(f0, f1, f2) <= 0 or d0 <= 0 or d1 == d0:
        return 0.0
    p = math.log(f1 / f0) / math.log(d1 / d0)
    p2 = math.log(f2 / f1) / math.log(d2 / d1) if d2 != d1 else p
    if not -1 < p <= MAX_TAIL_POWER or abs(p - p2) > 0.5 * (1 + abs(p)):
        return 0.0
    c = f0 / d0 ** p
    return c * d0 ** (p + 1) / (p + 1)


def _panel(x0, x1, f0, f1, e):
    """Integral over the panel next to an edge using the power law through both ends."""
    d0, d1 = abs(x0 - e), abs(x1 - e)
    if f0 <= 0 or f1 <= 0 or d0 <= 0:
        return 0.5 * (x1 - x0) * (f0 + f1)
    p = math.log(f1 / f0) / math.log(d1 / d0)
    if not -1 < p <= MAX_TAIL_POWER:
        return 0.5 * (x1 - x0) * (f0 + f1)
    c = f0 / d0 ** p
    return abs(c * (d1 ** (p + 1) - d0 ** (p + 1)) / (p + 1))


def mass_check(grid: DensityGrid, atom_report: AtomReport, support=None):
    """``(mass, defect)``: trapezoid of the grid plus atoms, with edge tails.

    ``support`` gives the density edges (defaults to ``grid.support``).
    Between the outermost positive grid point and the edge the density is
    modelled by a power law fitted to the nearest samples.
    """
    if support is None:
        support = grid.support
    xs = np.asarray(grid.xs, dtype=float)
    fs = np.nan_to_num(np.asarray(grid.fs, dtype=float))
    mass = float(np.trapezoid(fs, xs)) if hasattr(np, "trapezoid") else float(np.trapz(fs, xs))
    if support is not None and xs.size >= 4:
        lo_e, hi_e = support
        pos = np.nonzero(fs > 0)[0]
        if pos.size >= 3:
            i, j = pos[0], pos[-1]
            if i == 0 and xs[0] > lo_e:
                mass += _tail(xs[0], xs[1], xs[2], fs[0], fs[1], fs[2], lo_e)
                mass += _panel(xs[0], xs[1], fs[0], fs[1], lo_e) - 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1])
            if j == xs.size - 1 and xs[-1] < hi_e:
                mass += _tail(xs[-1], xs[-2], xs[-3], fs[-1], fs[-2], fs[-3], hi_e)
                mass += _panel(xs[-2], xs[-1], fs[-2], fs[-1], hi_e) - 0.5 * (xs[-1] - xs[-2]) * (fs[-1] + fs[-2])
    mass += atom_report.total
    return mass, abs(mass - 1.0)


def support_bound(mu: Measure, nu: Measure):
    """A priori hull of supp(mu [x] nu): product of the endpoint hulls."""
    a0, a1 = mu.support_hull
    b0, b1 = nu.support_hull
    return a0 * b0, a1 * b1
