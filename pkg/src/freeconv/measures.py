"""Probability measures on [0, inf): point masses plus Jacobi-type densities."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import beta as beta_fn

from .errors import DomainError
from .quadrature import component_rule

MASS_TOL = 1e-12
LOAD_MASS_TOL = 1e-9
# Gauss-Jacobi with this many nodes is exact for polynomials of degree < 2*N
_MOMENT_NODES = 16


@dataclass(frozen=True)
class Atom:
    location: float
    weight: float


@dataclass(frozen=True)
class JacobiComponent:
    """Density ``norm_const * (x-lo)^t_lo * (hi-x)^t_hi`` on ``[lo, hi]``."""

    lo: float
    hi: float
    t_lo: float
    t_hi: float
    weight: float = 1.0
    norm_const: float = field(init=False)

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise DomainError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        for t in (self.t_lo, self.t_hi):
            if not (-1.0 < t < 1.0):
                raise DomainError(f"exponent {t} outside (-1, 1)")
        L = self.hi - self.lo
        raw = L ** (self.t_lo + self.t_hi + 1.0) * beta_fn(self.t_lo + 1.0, self.t_hi + 1.0)
        object.__setattr__(self, "norm_const", self.weight / raw)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x > self.lo) & (x < self.hi)
        xi = x[inside]
        out[inside] = self.norm_const * (xi - self.lo) ** self.t_lo * (self.hi - xi) ** self.t_hi
        return out

    def rule(self, n: int, kappa: float = 0.0):
        return component_rule(self.lo, self.hi, self.t_lo, self.t_hi, self.norm_const, n, kappa)

    def scaled(self, a: float) -> "JacobiComponent":
        return JacobiComponent(a * self.lo, a * self.hi, self.t_lo, self.t_hi, self.weight)


@dataclass(frozen=True)
class Measure:
    atoms: tuple = ()
    components: tuple = ()
    mean: float = field(init=False)
    variance: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "components", tuple(self.components))
        m1 = moment(self, 1)
        object.__setattr__(self, "mean", m1)
        object.__setattr__(self, "variance", moment(self, 2) - m1 * m1)

    @property
    def total_mass(self) -> float:
        return math.fsum([a.weight for a in self.atoms] + [c.weight for c in self.components])

    def support_intervals(self):
        """Closed intervals (degenerate for atoms) making up the support."""
        out = [(a.location, a.location) for a in self.atoms]
        out += [(c.lo, c.hi) for c in self.components]
        return sorted(out)

    @property
    def support_hull(self):
        iv = self.support_intervals()
        return min(i[0] for i in iv), max(i[1] for i in iv)

    def atom_weight(self, x: float) -> float:
        return sum(a.weight for a in self.atoms if a.location == x)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in self.components:
            out = out + c.density(x)
        return out

    def to_dict(self) -> dict:
        return {
            "atoms": [{"x": a.location, "w": a.weight} for a in self.atoms],
            "jacobi": [
                {"lo": c.lo, "hi": c.hi, "t_lo": c.t_lo, "t_hi": c.t_hi, "weight": c.weight}
                for c in self.components
            ],
        }


@dataclass(frozen=True)
class MeasureStats:
    mean: float
    variance: float
    moments: tuple


def moment(m: Measure, k: int) -> float:
    """k-th raw moment; exact for atoms and for Jacobi components."""
    terms = [a.weight * a.location ** k for a in m.atoms]
    n = max(_MOMENT_NODES, k // 2 + 2)
    for c in m.components:
        x, w = c.rule(n)
        terms.append(float(np.dot(w, x ** k)))
    return math.fsum(terms)


def measure_stats(m: Measure) -> MeasureStats:
    moms = tuple(moment(m, k) for k in range(1, 7))
    return MeasureStats(m.mean, m.variance, moms)


def make_jacobi(lo: float, hi: float, t_lo: float, t_hi: float) -> Measure:
    """Unit-mass Jacobi measure C (x-lo)^t_lo (hi-x)^t_hi on [lo, hi]."""
    if lo < 0:
        raise DomainError(f"support must lie in [0, inf), got lo={lo}")
    return Measure(components=(JacobiComponent(lo, hi, t_lo, t_hi, 1.0),))


def point_mass(x: float) -> Measure:
    if x < 0:
        raise DomainError("atom location must be nonnegative")
    return Measure(atoms=(Atom(float(x), 1.0),))


def dilate(m: Measure, a: float) -> Measure:
    """Push-forward of ``m`` under x -> a x."""
    if not a > 0:
        raise DomainError(f"dilation factor must be positive, got {a}")
    return Measure(
        atoms=tuple(Atom(a * t.location, t.weight) for t in m.atoms),
        components=tuple(c.scaled(a) for c in m.components),
    )


@dataclass
class ValidationReport:
    violations: list
    edge_ready: bool
    edge_reasons: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "valid": self.ok,
            "violations": list(self.violations),
            "edge_ready": self.edge_ready,
            "edge_reasons": list(self.edge_reasons),
        }


def validate(m: Measure) -> ValidationReport:
    """Collect every structural violation; never raises."""
    bad = []
    mass = m.total_mass
    if abs(mass - 1.0) > MASS_TOL:
        bad.append(f"total mass {mass!r} differs from 1")
    locs = [a.location for a in m.atoms]
    if len(set(locs)) != len(locs):
        bad.append("atom locations are not distinct")
    for a in m.atoms:
        if a.location < 0:
            bad.append(f"atom at negative location {a.location}")
        if not (0 < a.weight <= 1):
            bad.append(f"atom weight {a.weight} outside (0, 1]")
    for c in m.components:
        if c.lo < 0:
            bad.append(f"component support [{c.lo}, {c.hi}] leaves [0, inf)")
        if not (0 < c.weight <= 1):
            bad.append(f"component weight {c.weight} outside (0, 1]")
        for t in (c.t_lo, c.t_hi):
            if not (-1 < t < 1):
                bad.append(f"exponent {t} outside (-1, 1)")
    if not m.atoms and not m.components:
        bad.append("empty measure")

    why = []
    if m.atoms:
        why.append("atoms present")
    if len(m.components) != 1:
        why.append("edge machinery needs exactly one Jacobi component")
    elif m.components[0].lo <= 0:
        why.append("support touches 0")
    if bad:
        why.append("measure is invalid")
    # means are normalised by dilation before the edge solver runs
    return ValidationReport(bad, not why, why)


def measure_from_dict(spec: dict) -> Measure:
    """Build a measure from the JSON spec schema; rejects bad total mass."""
    if not isinstance(spec, dict):
        raise DomainError("measure spec must be a JSON object")
    unknown = set(spec) - {"atoms", "jacobi"}
    if unknown:
        raise DomainError(f"unknown keys in measure spec: {sorted(unknown)}")
    try:
        atoms = [Atom(float(a["x"]), float(a["w"])) for a in spec.get("atoms", [])]
        comps = [
            JacobiComponent(float(c["lo"]), float(c["hi"]), float(c["t_lo"]),
                            float(c["t_hi"]), float(c["weight"]))
            for c in spec.get("jacobi", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed measure spec: {exc}") from exc
    for a in atoms:
        if a.location < 0 or not (0 < a.weight <= 1):
            raise DomainError(f"bad atom {a}")
    for c in comps:
        if c.lo < 0 or not (0 < c.weight <= 1):
            raise DomainError(f"bad component {c}")
    total = math.fsum([a.weight for a in atoms] + [c.weight for c in comps])
    if abs(total - 1.0) > LOAD_MASS_TOL:
        raise DomainError(f"weights sum to {total}, expected 1")
    locs = [a.location for a in atoms]
    if len(set(locs)) != len(locs):
        raise DomainError("atom locations are not distinct")
    return Measure(tuple(atoms), tuple(comps))


def load_measure(path) -> Measure:
    with open(Path(path)) as fh:
        spec = json.load(fh)
    return measure_from_dict(spec)
