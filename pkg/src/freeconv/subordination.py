"""Subordination functions of the free multiplicative convolution.

For rho = mu [x] nu the pair (Omega_mu, Omega_nu) solves

    M_mu(Omega_nu) = M_nu(Omega_mu) = M_rho(z),   Omega_mu * Omega_nu = z * M_rho(z).

Interior points are found by a damped fixed-point iteration of
Omega -> z H_mu(z H_nu(Omega)) with H(w) = M(w)/w, polished by Newton on the
2x2 system.  Boundary values on the real axis come from an epsilon ladder with
Richardson extrapolation, refined by continuing the ladder towards 0 and a
final Newton solve at real z.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence


from .errors import ConvergenceError, DomainError, FreeConvError
from .measures import Measure
from .transforms import cauchy_sums

MAX_FP_ITERS = 500
MAX_NEWTON = 20
DAMPING = (1.0, 0.5, 0.25, 0.1)
NEWTON_SWITCH = 1e-6
NEWTON_PROBE = 10
TOL = 1e-12
DEEP_STEPS = 6
DEGENERATE = 1e-9
REAL_SNAP = 1e-6
ATOM_FLOOR = 1e-8
ATOM_RATIO = 0.9
BOUNDARY_TOL = 1e-6


@dataclass(frozen=True)
class SubordinationState:
    z: complex
    omega_mu: complex
    omega_nu: complex
    M_rho: complex
    m_rho: complex
    residual: float
    iters: int
    defect_eq: float = 0.0
    defect_prod: float = 0.0
    converged: bool = True
    message: str = ""
    extrapolation_error: float = 0.0
    method: str = "interior"
    # first-rung pair of a boundary solve; seeds the neighbour's ladder
    seed: tuple = ()

    def swapped(self) -> "SubordinationState":
        return replace(self, omega_mu=self.omega_nu, omega_nu=self.omega_mu)


@dataclass(frozen=True)
class EpsLadder:
    eps_values: tuple
    extrapolation_order: int = 2

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_values)
        object.__setattr__(self, "eps_values", eps)
        if not eps or any(e <= 0 for e in eps):
            raise DomainError("ladder values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError("ladder must be strictly decreasing")
        if not 0 <= self.extrapolation_order < len(eps):
            raise DomainError("extrapolation order needs more rungs than its value")


def default_ladder(start: float = 1e-2, rungs: int = 14, order: int = 2) -> EpsLadder:
    """Halving ladder start, start/2, ... with ``rungs`` entries."""
    return EpsLadder(tuple(start * 0.5 ** k for k in range(rungs)), order)


def _is_delta0(m: Measure) -> bool:
    return not m.components and len(m.atoms) == 1 and m.atoms[0].location == 0.0


def _H(m: Measure, w: complex, side: int = 0) -> complex:
    s = cauchy_sums(m, w, 0, side)
    if s.U[0] == 0:
        raise ConvergenceError(f"z m(z) + 1 vanished at {w}")
    return s.K[0] / s.U[0]


def _M1(m: Measure, w: complex, side: int = 0):
    s = cauchy_sums(m, w, 1, side)
    u0, u1 = s.U[0], s.U[1]
    if u0 == 0:
        raise ConvergenceError(f"z m(z) + 1 vanished at {w}")
    return 1.0 - 1.0 / u0, u1 / u0 ** 2


def _defects(z, a, b, Mmu_b, Mnu_a):
    Mr = 0.5 * (Mmu_b + Mnu_a)
    return abs(Mmu_b - Mnu_a), abs(a * b - z * Mr), Mr


def _tolerances(z):
    return TOL * (1 + abs(z)), TOL * (1 + abs(z) ** 2)


def _finish(z, a, b, Mmu_b, Mnu_a, iters, method="interior", converged=None, message=""):
    d1, d2, Mr = _defects(z, a, b, Mmu_b, Mnu_a)
    t1, t2 = _tolerances(z)
    ok = d1 <= t1 and d2 <= t2
    # Omega_mu = Omega_nu = 0 solves the system for every z; never accept it
    if abs(Mr) < DEGENERATE * abs(z):
        ok = False
        message = message or "degenerate root Omega = 0"
    if converged is None:
        converged = ok
    if z != 0 and Mr != 1:
        mr = Mr / (z * (1.0 - Mr))
    else:
        mr = complex("nan")
    res = max(d1, d2 / (1 + abs(z)))
    msg = message or ("" if ok else "residual above tolerance")
    return SubordinationState(complex(z), complex(a), complex(b), complex(Mr), complex(mr),
                              float(res), iters, float(d1), float(d2), bool(converged), msg,
                              0.0, method)


def _newton(mu, nu, z, a, b, side=0, max_steps=MAX_NEWTON, keep_upper=True):
    """Guarded Newton on G = (M_mu(b) - M_nu(a), a b - z M_nu(a)).

    Returns ``(a, b, Mmu_b, Mnu_a, steps)`` or ``None`` when the Jacobian is
    singular or no step reduces the defect.
    """
    t1, t2 = _tolerances(z)
    Mb, dMb = _M1(mu, b, side)
    Ma, dMa = _M1(nu, a, side)
    g1, g2 = Mb - Ma, a * b - z * Ma
    norm = max(abs(g1) / t1, abs(g2) / t2)
    steps = 0
    for steps in range(1, max_steps + 1):
        if norm <= 0.1:
            break
        j11, j12, j21, j22 = -dMa, dMb, b - z * dMa, a
        det = j11 * j22 - j12 * j21
        scale = max(abs(j11 * j22), abs(j12 * j21), 1e-300)
        if abs(det) <= 1e-14 * scale:
            return None
        da = (g1 * j22 - j12 * g2) / det
        db = (j11 * g2 - j21 * g1) / det
        lam = 1.0
        accepted = False
        while lam >= 1.0 / 64:
            na, nb = a - lam * da, b - lam * db
            if keep_upper and (na.imag < -1e-14 * abs(na) or nb.imag < -1e-14 * abs(nb)):
                lam *= 0.5
                continue
            try:
                nMb, ndMb = _M1(mu, nb, side)
                nMa, ndMa = _M1(nu, na, side)
            except FreeConvError:
                lam *= 0.5
                continue
            ng1, ng2 = nMb - nMa, na * nb - z * nMa
            nnorm = max(abs(ng1) / t1, abs(ng2) / t2)
            if nnorm < norm or nnorm <= 1.0:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if norm <= 1.0:
                break
            return None
        a, b, Mb, dMb, Ma, dMa = na, nb, nMb, ndMb, nMa, ndMa
        g1, g2, norm = ng1, ng2, nnorm
    return a, b, Mb, Ma, steps


def _try_newton(mu, nu, z, a, b):
    try:
        out = _newton(mu, nu, z, a, b)
    except FreeConvError:
        return None
    if out is None:
        return None
    a, b, Mb, Ma, steps = out
    st = _finish(z, a, b, Mb, Ma, steps)
    if st.converged and a.imag > 0 and b.imag > 0 and _arg_ok(z, a, b):
        return st
    return None


def _fixed_point(mu, nu, z, om, trace):
    """Damped iteration of Omega_mu -> z H_mu(z H_nu(Omega_mu)).

    Near the real axis the map contracts slowly, so every ``NEWTON_PROBE``
    iterations a guarded Newton solve is attempted from the current iterate.
    Returns ``(state, None, it)`` when a probe lands, else ``(Omega_mu, Omega_nu, it)``.
    """
    scale = 1 + abs(z)

    def T(o):
        w = z * _H(nu, o)
        return z * _H(mu, w), w

    new, w = T(om)
    res = abs(new - om) / scale
    level = 0
    it = 0
    for it in range(1, MAX_FP_ITERS + 1):
        if res < NEWTON_SWITCH:
            break
        if it % NEWTON_PROBE == 0:
            st = _try_newton(mu, nu, z, new, w)
            if st is not None:
                return st, None, it
        while True:
            lam = DAMPING[level]
            cand = (1 - lam) * om + lam * new
            ok = cand.imag > 0
            if ok:
                try:
                    cnew, cw = T(cand)
                except FreeConvError:
                    ok = False
            if ok:
                cres = abs(cnew - cand) / scale
                ok = cres <= 10 * res and cnew.imag > 0
            if ok or level == len(DAMPING) - 1:
                break
            level += 1
        if not ok:
            trace.append((it, om, res))
            raise ConvergenceError(f"fixed-point iteration left C+ at z = {z}", trace)
        om, new, w, res = cand, cnew, cw, cres
        if it % 50 == 0:
            trace.append((it, om, res))
    else:
        raise ConvergenceError(f"no convergence after {MAX_FP_ITERS} iterations at z = {z}", trace)
    # the last map evaluation is the better pair
    return new, w, it


def _arg_ok(z, a, b, tol=1e-8):
    th = cmath.phase(z)
    return cmath.phase(a) >= th - tol and cmath.phase(b) >= th - tol


def solve_point(mu: Measure, nu: Measure, z: complex,
                init: Optional[complex] = None, init_nu: Optional[complex] = None) -> SubordinationState:
    """Subordination pair at ``z`` in the upper half-plane.

    ``init`` seeds Omega_mu (and ``init_nu`` Omega_nu); seeded solves go
    straight to Newton and fall back to the cold iteration from Omega = z.
    """
    z = complex(z)
    if _is_delta0(mu) or _is_delta0(nu):
        raise DomainError("subordination is undefined when a factor is delta_0")
    if not z.imag > 0:
        raise DomainError(f"solve_point needs Im z > 0, got {z}")

    if init is not None:
        a = complex(init)
        b = complex(init_nu) if init_nu is not None else z * _H(nu, a)
        if a.imag > 0 and b.imag > 0:
            st = _try_newton(mu, nu, z, a, b)
            if st is not None:
                return st

    trace: list = []
    a, b, it = _fixed_point(mu, nu, z, z, trace)
    if b is None:
        return replace(a, iters=a.iters + it)
    out = _newton(mu, nu, z, a, b)
    if out is None:
        Mb, _ = _M1(mu, b)
        Ma, _ = _M1(nu, a)
        return _finish(z, a, b, Mb, Ma, it, message="Newton polish unavailable")
    a, b, Mb, Ma, steps = out
    return _finish(z, a, b, Mb, Ma, it + steps)


def _failed(z, message):
    nan = complex("nan")
    return SubordinationState(complex(z), nan, nan, nan, nan, math.inf, 0,
                              math.inf, math.inf, False, message)


def solve_grid(mu: Measure, nu: Measure, xs: Sequence[float], eps: float):
    """States at x + i eps along ``xs``, each seeded from its neighbour."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    out = []
    prev = None
    for x in xs:
        z = complex(x, eps)
        try:
            if prev is not None and prev.converged:
                st = solve_point(mu, nu, z, prev.omega_mu, prev.omega_nu)
            else:
                st = solve_point(mu, nu, z)
        except FreeConvError as exc:
            st = _failed(z, str(exc))
        out.append(st)
        prev = st
    return out


def _neville(eps, vals):
    """Value at 0 of the interpolating polynomial through (eps, vals)."""
    p = list(vals)
    n = len(eps)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (eps[i + k] * p[i] - eps[i] * p[i + 1]) / (eps[i + k] - eps[i])
    return p[0]


def richardson(eps, vals, order):
    """Extrapolate to 0 from the finest ``order+1`` rungs; error from the next window."""
    eps = list(eps)
    vals = list(vals)
    k = order + 1
    best = _neville(eps[-k:], vals[-k:])
    if len(eps) > k:
        alt = _neville(eps[-k - 1:-1], vals[-k - 1:-1])
        err = abs(best - alt)
    else:
        err = math.inf
    return best, err


def solve_boundary(mu: Measure, nu: Measure, x: float, ladder: Optional[EpsLadder] = None,
                   init: Optional[SubordinationState] = None) -> SubordinationState:
    """Boundary values of the subordination pair at ``x + i0``.

    Non-convergence is reported through ``converged=False`` and ``message``.
    """
    if not x > 0:
        raise DomainError("boundary point must be positive")
    ladder = ladder or default_ladder()
    x = float(x)
    states = []
    prev = init
    if init is not None and init.seed:
        prev = replace(init, omega_mu=init.seed[0], omega_nu=init.seed[1])
    for e in ladder.eps_values:
        z = complex(x, e)
        if prev is not None and prev.converged:
            st = solve_point(mu, nu, z, prev.omega_mu, prev.omega_nu)
        else:
            st = solve_point(mu, nu, z)
        states.append(st)
        prev = st
    eps = ladder.eps_values
    order = ladder.extrapolation_order
    seed = (states[0].omega_mu, states[0].omega_nu)
    ext = {}
    err = 0.0
    for name in ("omega_mu", "omega_nu", "M_rho", "m_rho"):
        v, e = richardson(eps, [getattr(s, name) for s in states], order)
        ext[name] = v
        if name.startswith("omega"):
            err = max(err, e / (1 + abs(v)))

    # an atom at x shows up as eps * Im m_rho(x + i eps) -> mass along the ladder;
    # regular points halve it per rung and integrable singularities still shrink it
    q_last = eps[-1] * states[-1].m_rho.imag
    q_prev = eps[-2] * states[-2].m_rho.imag if len(states) > 1 else 0.0
    if q_last > ATOM_FLOOR and q_prev > 0 and q_last / q_prev >= ATOM_RATIO:
        last = states[-1]
        return replace(last, z=complex(x, 0.0), converged=False, method="richardson", seed=seed,
                       extrapolation_error=math.inf,
                       message=f"ladder values disagree (possible atom of mass ~{q_last:.3g} at x = {x})")

    # continue the chain towards the axis; each rung is seeded by the previous
    deepest = states[-1]
    e = eps[-1]
    for _ in range(DEEP_STEPS):
        e *= 0.1
        try:
            st = solve_point(mu, nu, complex(x, e), deepest.omega_mu, deepest.omega_nu)
        except FreeConvError:
            break
        if not st.converged:
            break
        deepest = st

    z = complex(x, 0.0)
    try:
        out = _newton(mu, nu, z, deepest.omega_mu, deepest.omega_nu)
    except FreeConvError:
        out = None
    if out is not None and max(abs(out[0].imag), abs(out[1].imag)) < REAL_SNAP * (1 + abs(out[0])):
        # near an edge, outside the support, Newton keeps a spurious small
        # imaginary part; a real root takes precedence when one exists
        try:
            real = _newton(mu, nu, z, complex(out[0].real), complex(out[1].real))
        except FreeConvError:
            real = None
        if real is not None and _finish(z, *real[:4], real[4]).converged:
            out = real
    if out is not None:
        a, b, Mb, Ma, steps = out
        st = _finish(z, a, b, Mb, Ma, steps, method="polish")
        tol_im = 1e-10 * (1 + abs(a) + abs(b))
        if st.converged and a.imag >= -tol_im and b.imag >= -tol_im:
            gap = abs(a - ext["omega_mu"]) / (1 + abs(a))
            return replace(st, extrapolation_error=float(max(err, gap)), seed=seed)

    if deepest.z.imag <= 1e-10 * (1 + x) and deepest.converged:
        return replace(deepest, z=z, method="deep", extrapolation_error=float(err),
                       residual=max(deepest.residual, deepest.z.imag), seed=seed)

    ok = err <= BOUNDARY_TOL
    msg = "" if ok else "ladder values disagree (possible atom or edge)"
    d1 = abs(ext["M_rho"]) * 0  # defects are not defined for extrapolated values
    return SubordinationState(z, complex(ext["omega_mu"]), complex(ext["omega_nu"]),
                              complex(ext["M_rho"]), complex(ext["m_rho"]), float(err),
                              sum(s.iters for s in states), d1, d1, ok, msg, float(err),
                              "richardson", seed)


def _dist_to_support(w: complex, m: Measure) -> float:
    return min(abs(w - min(max(w.real, lo), hi)) for lo, hi in m.support_intervals())


def stability_check(state: SubordinationState, mu: Measure, nu: Measure):
    """``(d_mu, d_nu)``: distances of Omega_nu to supp mu and Omega_mu to supp nu."""
    return _dist_to_support(state.omega_nu, mu), _dist_to_support(state.omega_mu, nu)


def small_omegas(mu: Measure, nu: Measure, w: complex):
    """(omega_mu(w), omega_nu(w)) = 1/Omega(1/w) in the eta-transform convention."""
    w = complex(w)
    if w == 0:
        raise DomainError("w must be nonzero")
    z = 1.0 / w
    conj = z.imag < 0
    st = solve_point(mu, nu, z.conjugate() if conj else z)
    a, b = st.omega_mu, st.omega_nu
    if conj:
        a, b = a.conjugate(), b.conjugate()
    return 1.0 / a, 1.0 / b
