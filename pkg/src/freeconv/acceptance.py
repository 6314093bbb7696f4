"""Acceptance criteria shared by the ``validate`` command and the test suite.

Each criterion returns a CriterionResult; ``render`` produces the
tab-separated report.  Reports contain no timings so that repeated runs are
byte-identical.
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .density import atoms, density, density_grid, mass_check
from .edges import find_support, sqrt_coefficients
from .measures import Atom, Measure, dilate, make_jacobi, moment, point_mass
from .oracles import (BERNOULLI_SQUARE, FUSS_CATALAN, bernoulli_square_density, compare,
                      grid_moments, s_series_moments, sqrt_fit)
from .subordination import solve_boundary, solve_point
from .transforms import M_derivatives, cauchy_sums, ihat

# test measures
JAC_A = make_jacobi(1.0, 3.0, -0.5, 0.5)
JAC_B = make_jacobi(0.5, 2.0, 0.3, -0.4)
UNIFORM = make_jacobi(1.0, 3.0, 0.0, 0.0)
ARCSINE = make_jacobi(1.0, 3.0, -0.5, -0.5)
MP = make_jacobi(0.0, 4.0, -0.5, 0.5)
BERNOULLI = Measure(atoms=(Atom(0.0, 0.5), Atom(2.0, 0.5)), components=())
DELTA1 = point_mass(1.0)

MOMENT_PAIRS = (("A,A", JAC_A, JAC_A), ("A,B", JAC_A, JAC_B), ("U,arcsine", UNIFORM, ARCSINE))
EDGE_PAIRS = (("A,A", JAC_A, JAC_A), ("A,B", JAC_A, JAC_B))
INVARIANT_PAIRS = (("A,A", JAC_A, JAC_A), ("A,B", JAC_A, JAC_B), ("U,arcsine", UNIFORM, ARCSINE),
                   ("MP,MP", MP, MP), ("Bernoulli,A", BERNOULLI, JAC_A))

SEED = 20240611
RUNTIME_LIMIT = 30.0


@dataclass
class CriterionResult:
    key: str
    name: str
    passed: bool
    detail: str


@dataclass
class Context:
    """Shared state of one validation run; ``perturb`` scales pipeline densities."""

    perturb: float = 0.0
    cache: dict = field(default_factory=dict)

    def scaled(self, fs):
        return np.asarray(fs) * (1.0 + self.perturb)

    def edges(self, label, mu, nu):
        key = ("edges", label)
        if key not in self.cache:
            info = find_support(mu, nu)
            self.cache[key] = sqrt_coefficients(mu, nu, info)
        return self.cache[key]


def _fmt(v) -> str:
    return f"{v:.3e}"


def _perturbed(grid, ctx):
    grid.fs = ctx.scaled(grid.fs)
    return grid


def c01_bernoulli(ctx: Context) -> CriterionResult:
    t0 = time.perf_counter()
    rep = atoms(BERNOULLI, BERNOULLI)
    grid = _perturbed(density_grid(BERNOULLI, BERNOULLI, 0.05, 3.95, 512), ctx)
    elapsed = time.perf_counter() - t0
    max_rel, _ = compare(grid, BERNOULLI_SQUARE, 0.0)
    ok_atoms = len(rep.entries) == 1 and rep.entries[0][0] == 0.0
    atom_err = abs(rep.entries[0][1] - 0.5) if ok_atoms else math.inf
    passed = ok_atoms and atom_err <= 1e-12 and max_rel <= 1e-3 and grid.failures == 0
    passed = passed and elapsed <= RUNTIME_LIMIT
    detail = f"atom_err={_fmt(atom_err)} max_rel={_fmt(max_rel)} failures={grid.failures} runtime_ok={elapsed <= RUNTIME_LIMIT}"
    return CriterionResult("1", "bernoulli", passed, detail)


def c02_identity(ctx: Context) -> CriterionResult:
    grid = _perturbed(density_grid(UNIFORM, DELTA1, 1.05, 2.95, 128), ctx)
    rel = np.max(np.abs(grid.fs - 0.5) / 0.5)
    passed = bool(rel <= 1e-6) and grid.failures == 0
    return CriterionResult("2", "identity", passed, f"max_rel={_fmt(rel)}")


def _mass_grid():
    """Grid for the MP [x] MP mass: geometric towards the x^(-2/3) end at 0."""
    return np.concatenate([np.geomspace(1e-6, 0.5, 200, endpoint=False), np.linspace(0.5, 6.75, 800)])


def c03_fuss_catalan(ctx: Context) -> CriterionResult:
    grid = _perturbed(density_grid(MP, MP, 0.5, 6.0, 512), ctx)
    max_rel, _ = compare(grid, FUSS_CATALAN, 0.0)
    full = _perturbed(density(MP, MP, _mass_grid()), ctx)
    mass, defect = mass_check(full, atoms(MP, MP), support=FUSS_CATALAN.support)
    oracle_defect = abs(FUSS_CATALAN.total_mass() - 1.0)
    passed = max_rel <= 1e-3 and defect <= 1e-3 and oracle_defect <= 1e-3
    detail = f"max_rel={_fmt(max_rel)} mass_defect={_fmt(defect)} oracle_mass_defect={_fmt(oracle_defect)}"
    return CriterionResult("3", "fuss_catalan", passed, detail)


def chebyshev_grid(lo, hi, n):
    """Second-kind Chebyshev nodes on [lo, hi] and weights for densities with square-root ends."""
    j = np.arange(1, n + 1)
    th = j * math.pi / (n + 1)
    c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    xs = c - h * np.cos(th)
    w = h * math.pi / (n + 1) * np.sin(th)
    return xs, w


def _edge_moments(ctx, label, mu, nu, k_max=4, n=96):
    info = ctx.edges(label, mu, nu) if ("edges", label) in ctx.cache else find_support(mu, nu, cross_check=False)
    xs, w = chebyshev_grid(info.E_minus, info.E_plus, n)
    grid = _perturbed(density(mu, nu, xs), ctx)
    return grid_moments(grid, atoms(mu, nu), k_max, weights=w), grid


def c04_moments(ctx: Context) -> CriterionResult:
    worst = 0.0
    fails = 0
    for label, mu, nu in MOMENT_PAIRS:
        got, grid = _edge_moments(ctx, label, mu, nu)
        fails += grid.failures
        ref = s_series_moments(mu, nu, 4)
        worst = max(worst, max(abs(g - r) / abs(r) for g, r in zip(got, ref)))
    # second moment rule for mean-one inputs
    mu1, nu1 = dilate(JAC_A, 1 / JAC_A.mean), dilate(JAC_B, 1 / JAC_B.mean)
    expect = moment(mu1, 2) + moment(nu1, 2) - 1.0
    series_m2 = s_series_moments(mu1, nu1, 2)[1]
    grid_m2 = _edge_moments(ctx, "A1,B1", mu1, nu1, 2)[0][1]
    m2_err = max(abs(series_m2 - expect), abs(grid_m2 - expect))
    passed = worst <= 1e-3 and m2_err <= 1e-6 and fails == 0
    return CriterionResult("4", "moments", passed, f"max_rel={_fmt(worst)} m2_err={_fmt(m2_err)}")


def random_points(n, rng):
    xs = rng.uniform(-2.0, 10.0, n)
    ys = 10 ** rng.uniform(-2.0, 1.0, n)
    return xs + 1j * ys


def invariant_defects(mu, nu, z):
    """Worst normalised defect of each invariant at one point (values <= 1 pass)."""
    st = solve_point(mu, nu, z)
    a, b = st.omega_mu, st.omega_nu
    scale = 1 + abs(z) ** 2
    res = max(st.defect_eq, st.defect_prod) / (1e-12 * scale)
    th = cmath.phase(z)
    arg = max(th - cmath.phase(a), th - cmath.phase(b), 0.0) / 1e-10
    prod = abs(z) ** 2 * ihat(mu, b) * ihat(nu, a)
    bound = max(prod - 1.0, 0.0) / 1e-10
    lhs = (z * st.m_rho + 1).imag
    I_nu = cauchy_sums(nu, a, 0, want_I=True).I
    ident = abs(lhs - I_nu * a.imag) / (1e-10 * max(1.0, abs(lhs)))
    return res, arg, bound, ident


def c05_invariants(ctx: Context) -> CriterionResult:
    rng = np.random.default_rng(SEED)
    pts = random_points(1000, rng)
    worst = np.zeros(4)
    for k, z in enumerate(pts):
        _, mu, nu = INVARIANT_PAIRS[k % len(INVARIANT_PAIRS)]
        worst = np.maximum(worst, invariant_defects(mu, nu, complex(z)))
    passed = bool(np.all(worst <= 1.0))
    names = ("residual", "arg", "product_bound", "im_identity")
    detail = " ".join(f"{n}={_fmt(v)}" for n, v in zip(names, worst))
    return CriterionResult("5", "invariants", passed, detail + " (normalised, pass <= 1)")


def c06_variance(ctx: Context) -> CriterionResult:
    eta = 1e4
    z = 1j * eta
    worst = 0.0
    for mu, nu in ((JAC_A, JAC_B), (MP, MP), (UNIFORM, ARCSINE)):
        mu1, nu1 = dilate(mu, 1 / mu.mean), dilate(nu, 1 / nu.mean)
        st = solve_point(mu1, nu1, z)
        for om, m in ((st.omega_mu, mu1), (st.omega_nu, nu1)):
            var = m.variance
            worst = max(worst, abs(om - z + var) / max(1.0, var))
            M = M_derivatives(m, z, 0)[0]
            worst = max(worst, abs(M - z + var) / max(1.0, var))
    return CriterionResult("6", "variance", worst <= 1e-2, f"max_rel={_fmt(worst)}")


def edge_fit(mu, nu, info, k, which="mu"):
    """Fit of Im Omega just inside edge ``k`` over distances up to 1e-3."""
    E = (info.E_minus, info.E_plus)[k]
    sign = 1.0 if k == 0 else -1.0
    ds = np.geomspace(1e-8, 1e-3, 11)
    vals = []
    for d in ds:
        st = solve_boundary(mu, nu, E + sign * d)
        vals.append((st.omega_mu if which == "mu" else st.omega_nu).imag)
    return sqrt_fit(ds, vals)


def c07_edges(ctx: Context) -> CriterionResult:
    res = det = 0.0
    order_ok = True
    slope_err = gamma_err = 0.0
    for label, mu, nu in EDGE_PAIRS:
        info = ctx.edges(label, mu, nu)
        res = max(res, *info.residuals)
        det = max(det, abs(info.scan_edges[0] - info.E_minus), abs(info.scan_edges[1] - info.E_plus))
        lo_mu, hi_mu = mu.support_hull
        lo_nu, hi_nu = nu.support_hull
        order_ok &= info.omega_nu_at[0] < lo_mu and info.omega_nu_at[1] > hi_mu
        order_ok &= info.omega_mu_at[0] < lo_nu and info.omega_mu_at[1] > hi_nu
        for k in (0, 1):
            p, c = edge_fit(mu, nu, info, k)
            slope_err = max(slope_err, abs(p - 0.5))
            gamma_err = max(gamma_err, abs(c / info.gamma_mu[k] - 1.0))
    passed = res <= 1e-8 and det <= 1e-6 and order_ok and slope_err <= 0.02 and gamma_err <= 0.01
    detail = (f"residual={_fmt(res)} detector_gap={_fmt(det)} ordering={order_ok} "
              f"slope_err={_fmt(slope_err)} gamma_rel={_fmt(gamma_err)}")
    return CriterionResult("7", "edges", passed, detail)


def _ratio_field(ctx, info, mu, nu, n):
    W = info.width
    xs = np.linspace(info.E_minus + 0.005 * W, info.E_plus - 0.005 * W, n)
    grid = _perturbed(density(mu, nu, xs), ctx)
    return grid.fs / np.sqrt((xs - info.E_minus) * (info.E_plus - xs)), grid.failures


def c08_sqrt_ratio(ctx: Context) -> CriterionResult:
    spread = change = 0.0
    fails = 0
    for label, mu, nu in EDGE_PAIRS:
        info = ctx.edges(label, mu, nu)
        r1, f1 = _ratio_field(ctx, info, mu, nu, 201)
        r2, f2 = _ratio_field(ctx, info, mu, nu, 401)
        fails += f1 + f2
        spread = max(spread, r2.max() / r2.min())
        change = max(change, float(np.max(np.abs(r2[::2] / r1 - 1.0))))
    passed = spread <= 10 and change <= 0.02 and fails == 0
    return CriterionResult("8", "sqrt_ratio", passed, f"max_over_min={_fmt(spread)} doubling_change={_fmt(change)}")


def c09_boundedness(ctx: Context) -> CriterionResult:
    drift = 0.0
    values = []
    for mu, nu, lo, hi in ((BERNOULLI, BERNOULLI, 0.01, 3.99), (JAC_A, JAC_B, 0.5, 5.2)):
        g1 = _perturbed(density_grid(mu, nu, lo, hi, 512), ctx)
        g2 = _perturbed(density_grid(mu, nu, lo, hi, 1023), ctx)
        x1 = float(np.max(g1.xs * g1.fs))
        x2 = float(np.max(g2.xs * g2.fs))
        values.append(x2)
        drift = max(drift, abs(x2 - x1) / x1)
    passed = drift <= 0.05 and all(math.isfinite(v) for v in values)
    return CriterionResult("9", "boundedness", passed,
                           f"xf_max_bernoulli={_fmt(values[0])} xf_max_jacobi={_fmt(values[1])} drift={_fmt(drift)}")


_DETERMINISM_PROBES = ("2", "6")


def c10_determinism(ctx: Context) -> CriterionResult:
    a = render([CRITERIA[k][1](Context(ctx.perturb)) for k in _DETERMINISM_PROBES])
    b = render([CRITERIA[k][1](Context(ctx.perturb)) for k in _DETERMINISM_PROBES])
    return CriterionResult("10", "determinism", a == b, f"identical={a == b} probes={','.join(_DETERMINISM_PROBES)}")


# key -> (tags, function)
CRITERIA: Dict[str, tuple] = {
    "1": (("bernoulli", "density", "oracles"), c01_bernoulli),
    "2": (("identity", "density"), c02_identity),
    "3": (("fuss_catalan", "density", "oracles"), c03_fuss_catalan),
    "4": (("moments", "oracles"), c04_moments),
    "5": (("invariants", "subordination"), c05_invariants),
    "6": (("variance", "subordination"), c06_variance),
    "7": (("edges",), c07_edges),
    "8": (("sqrt_ratio", "edges"), c08_sqrt_ratio),
    "9": (("boundedness", "density"), c09_boundedness),
    "10": (("determinism",), c10_determinism),
}


def select(filter_name: Optional[str] = None) -> List[str]:
    if not filter_name:
        return list(CRITERIA)
    keys = [k for k, (tags, _) in CRITERIA.items() if k == filter_name or filter_name in tags]
    return keys


def run(keys=None, perturb: float = 0.0) -> List[CriterionResult]:
    ctx = Context(perturb)
    out = []
    for k in keys or list(CRITERIA):
        try:
            out.append(CRITERIA[k][1](ctx))
        except Exception as exc:  # a crashing criterion is a failing criterion
            out.append(CriterionResult(k, CRITERIA[k][1].__name__[4:], False, f"error={type(exc).__name__}: {exc}"))
    return out


def render(results) -> str:
    lines = ["criterion\tname\tresult\tdetail"]
    for r in results:
        lines.append(f"{r.key}\t{r.name}\t{'PASS' if r.passed else 'FAIL'}\t{r.detail}")
    return "\n".join(lines) + "\n"
