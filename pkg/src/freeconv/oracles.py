"""Independent reference results: closed-form laws, S-transform moments, fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .density import AtomReport, DensityGrid, mass_check
from .errors import DomainError
from .measures import Measure, moment

FC_EDGE = 27.0 / 4.0


def bernoulli_square_density(x):
    """Density of the square of the symmetric Bernoulli law on {0, 2}; atom 1/2 at 0 not included."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 4)
    xi = x[inside]
    out[inside] = 1.0 / (2 * math.pi) / np.sqrt(xi * (4 - xi))
    return out if out.ndim else float(out)


def _mp(x):
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 4)
    xi = x[inside]
    out[inside] = np.sqrt((4 - xi) / xi) / (2 * math.pi)
    return out


def _fuss_catalan(x):
    out = np.zeros_like(x)
    inside = (x > 0) & (x < FC_EDGE)
    xi = x[inside]
    r = 27 + 3 * np.sqrt(81 - 12 * xi)
    c = 2 ** (1 / 3) * math.sqrt(3) / (12 * math.pi)
    out[inside] = c * (2 ** (1 / 3) * r ** (2 / 3) - 6 * xi ** (1 / 3)) / (xi ** (2 / 3) * r ** (1 / 3))
    return out


_TABLE = {"marchenko_pastur": _mp, "fuss_catalan": _fuss_catalan}


def table_density(name: str, x):
    try:
        fn = _TABLE[name]
    except KeyError:
        raise DomainError(f"unknown closed form {name!r}") from None
    x = np.asarray(x, dtype=float)
    out = fn(np.atleast_1d(x)).reshape(x.shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ClosedForm:
    name: str
    density: Callable
    atoms: tuple
    support: tuple
    # power-law exponents of the density at the two ends of the support
    edge_exponents: tuple = (0.0, 0.0)

    def ac_mass(self) -> float:
        lo, hi = self.support
        a, b = self.edge_exponents
        # the rule samples the end points, where the limit of the regular factor is needed
        d_lo = 1e-300 if lo == 0 else float(np.spacing(lo))
        d_hi = float(np.spacing(hi))

        def g(x):
            x = min(max(x, lo + d_lo), hi - d_hi)
            return self.density(x) / ((x - lo) ** a * (hi - x) ** b)

        val, _ = quad(g, lo, hi, weight="alg", wvar=(a, b), epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def total_mass(self) -> float:
        return self.ac_mass() + math.fsum(w for _, w in self.atoms)

    def atom_report(self) -> AtomReport:
        return AtomReport(tuple((c, w, "zero" if c == 0 else (c, 1.0)) for c, w in self.atoms))


BERNOULLI_SQUARE = ClosedForm("bernoulli_square", bernoulli_square_density, ((0.0, 0.5),), (0.0, 4.0), (-0.5, -0.5))
MARCHENKO_PASTUR = ClosedForm("marchenko_pastur", lambda x: table_density("marchenko_pastur", x), (),
                              (0.0, 4.0), (-0.5, 0.5))
FUSS_CATALAN = ClosedForm("fuss_catalan", lambda x: table_density("fuss_catalan", x), (),
                          (0.0, FC_EDGE), (-2.0 / 3.0, 0.5))
CLOSED_FORMS = {c.name: c for c in (BERNOULLI_SQUARE, MARCHENKO_PASTUR, FUSS_CATALAN)}


# ---- formal power series (coefficient lists, index = power of z) ----

def series_mul(a, b, n):
    out = [0.0] * n
    for i, ai in enumerate(a[:n]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: n - i]):
            out[i + j] += ai * bj
    return out


def series_compose(f, g, n):
    """f(g(z)) truncated to n terms; needs g[0] == 0."""
    if g and g[0] != 0:
        raise DomainError("inner series must vanish at 0")
    out = [0.0] * n
    power = [1.0] + [0.0] * (n - 1)
    for k, fk in enumerate(f[:n]):
        if k > 0:
            power = series_mul(power, g, n)
        if fk:
            out = [o + fk * p for o, p in zip(out, power)]
    return out


def series_revert(f, n):
    """Compositional inverse g with f(g(z)) = z; needs f[0] == 0, f[1] != 0."""
    if f[0] != 0 or len(f) < 2 or f[1] == 0:
        raise DomainError("series is not invertible (zero linear term)")
    g = [0.0, 1.0 / f[1]] + [0.0] * (n - 2)
    for k in range(2, n):
        c = series_compose(f, g, k + 1)[k]
        g[k] = -c / f[1]
    return g


def _psi_series(m: Measure, n):
    return [0.0] + [moment(m, k) for k in range(1, n)]


def s_series_moments(mu: Measure, nu: Measure, k_max: int):
    """Moments 1..k_max of mu [x] nu from S_rho = S_mu S_nu on truncated series."""
    if not 1 <= k_max <= 6:
        raise DomainError("k_max must be in 1..6")
    if mu.mean == 0 or nu.mean == 0:
        raise DomainError("zero mean: the S-transform is not defined")
    n = k_max + 3  # two guard terms beyond the last coefficient used
    chi_mu = series_revert(_psi_series(mu, n), n)
    chi_nu = series_revert(_psi_series(nu, n), n)
    # chi_rho = chi_mu chi_nu (1 + z) / z
    prod = series_mul(chi_mu, chi_nu, n + 1)
    over_z = prod[1:] + [0.0]
    chi_rho = series_mul(over_z, [1.0, 1.0], n)
    psi_rho = series_revert(chi_rho, n)
    return psi_rho[1 : k_max + 1]


def grid_moments(grid: DensityGrid, atoms: AtomReport, k_max: int, weights=None):
    """Moments 1..k_max of grid density plus atoms (trapezoid unless ``weights`` given)."""
    xs = np.asarray(grid.xs, dtype=float)
    fs = np.nan_to_num(np.asarray(grid.fs, dtype=float))
    out = []
    for k in range(1, k_max + 1):
        if weights is None:
            ac = float(np.trapezoid(xs ** k * fs, xs))
        else:
            ac = float(np.dot(weights, xs ** k * fs))
        out.append(ac + math.fsum(c ** k * w for c, w, _ in atoms.entries))
    return out


def compare(grid: DensityGrid, oracle: ClosedForm, exclusion: float):
    """``(max_rel_err, mass_err)`` of a density grid against a closed form."""
    xs = np.asarray(grid.xs, dtype=float)
    fs = np.asarray(grid.fs, dtype=float)
    lo, hi = oracle.support
    ref = np.asarray(oracle.density(xs), dtype=float)
    keep = (xs > lo + exclusion) & (xs < hi - exclusion) & (ref > 0)
    if not keep.any():
        max_rel = 0.0
    else:
        rel = np.abs(fs[keep] - ref[keep]) / ref[keep]
        max_rel = float(np.max(np.nan_to_num(rel, nan=np.inf)))
    mass, _ = mass_check(grid, oracle.atom_report(), support=oracle.support)
    return max_rel, abs(mass - oracle.total_mass())


def sqrt_fit(ds, values):
    """Log-log fit ``values ~ c * ds^p``; returns ``(p, c_half)`` with c_half fitted at p = 1/2."""
    ld = np.log(np.asarray(ds, dtype=float))
    lv = np.log(np.asarray(values, dtype=float))
    p = float(np.polyfit(ld, lv, 1)[0])
    c_half = float(np.exp(np.mean(lv - 0.5 * ld)))
    return p, c_half
