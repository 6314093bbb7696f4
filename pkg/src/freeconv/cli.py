"""Command-line front end: convolve, transform, edges, validate.

Exit codes: 0 clean, 2 partial results (per-point failures), 1 fatal.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .density import atoms, density, support_bound
from .edges import find_support, near_edge_density, sqrt_coefficients
from .errors import FreeConvError
from .measures import load_measure, validate
from .subordination import EpsLadder, default_ladder, solve_boundary
from .transforms import eta_psi, m_transform

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2
CSV_HEADER = "x,f,re_m,im_m,re_omega_mu,im_omega_mu,re_omega_nu,im_omega_nu,residual"
FIT_HEADER = "edge,d,x,im_omega_mu,gamma_sqrt_d,f,f_model"


def num(v) -> str:
    """Full-precision decimal (17 significant digits)."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def to_json(obj, indent=2, _level=0) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    v = float(obj)
    return num(v) if math.isfinite(v) else "null"


def _complex_json(z) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _ladder(args) -> EpsLadder:
    return default_ladder(args.eps_start, args.eps_rungs)


def _write(path, text):
    Path(path).write_text(text)


def _fail(msg) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_FATAL


def _load_pair(args):
    return load_measure(args.mu), load_measure(args.nu)


def _grid(args, mu, nu):
    if args.grid_n < 2:
        raise ValueError("--grid-n must be at least 2")
    if args.grid_lo is not None or args.grid_hi is not None:
        lo0, hi0 = support_bound(mu, nu)
        lo = args.grid_lo if args.grid_lo is not None else lo0
        hi = args.grid_hi if args.grid_hi is not None else hi0
        if not 0 < lo < hi:
            raise ValueError("grid needs 0 < lo < hi")
        return np.linspace(lo, hi, args.grid_n)
    # midpoints of the a priori support hull keep away from its ends
    lo, hi = support_bound(mu, nu)
    if not hi > lo:
        raise ValueError("the convolution has no continuous part to grid")
    h = (hi - lo) / args.grid_n
    return lo + h * (np.arange(args.grid_n) + 0.5)


def cmd_convolve(args) -> int:
    try:
        mu, nu = _load_pair(args)
        ladder = _ladder(args)
        xs = _grid(args, mu, nu)
    except (OSError, ValueError, FreeConvError) as exc:
        return _fail(exc)
    grid = density(mu, nu, xs, ladder)
    rows = [CSV_HEADER]
    for x, f, st in zip(grid.xs, grid.fs, grid.states):
        if st is None:
            rows.append(",".join([num(x), num(f)] + ["nan"] * 6 + ["inf"]))
            continue
        rows.append(",".join(num(v) for v in (x, f, st.m_rho.real, st.m_rho.imag, st.omega_mu.real,
                                                st.omega_mu.imag, st.omega_nu.real, st.omega_nu.imag,
                                                st.residual)))
    rep = atoms(mu, nu)
    out = Path(args.out)
    _write(out, "\n".join(rows) + "\n")
    atoms_out = args.atoms_out or str(out.with_suffix(".atoms.json"))
    _write(atoms_out, to_json({"atoms": rep.to_list(), "total_atom_mass": rep.total}) + "\n")
    if args.edges_out:
        _write(args.edges_out, to_json(_edges_report(mu, nu)) + "\n")
    if grid.failures:
        print(f"warning: {grid.failures} of {len(xs)} points failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _edges_report(mu, nu) -> dict:
    reasons = validate(mu).edge_reasons + validate(nu).edge_reasons
    if reasons:
        return {"available": False, "reasons": reasons}
    info = sqrt_coefficients(mu, nu, find_support(mu, nu))
    return dict(available=True, **info.to_dict())


def cmd_transform(args) -> int:
    try:
        mu = load_measure(args.mu)
        z = complex(args.z.replace(" ", ""))
        tv = m_transform(mu, z)
    except (OSError, ValueError, FreeConvError) as exc:
        return _fail(exc)
    report = {
        "z": _complex_json(z),
        "m": _complex_json(tv.m),
        "m_prime": _complex_json(tv.m1),
        "m_second": _complex_json(tv.m2),
        "M": _complex_json(tv.M),
        "M_prime": _complex_json(tv.Mp),
        "M_second": _complex_json(tv.Mpp),
        "I": tv.I,
        "I_hat": tv.Ihat,
    }
    try:
        eta, psi = eta_psi(mu, z)
        report["eta"] = _complex_json(eta)
        report["psi"] = _complex_json(psi)
    except FreeConvError:
        report["eta"] = report["psi"] = None
    text = to_json(report) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _fit_rows(mu, nu, info, ladder):
    rows = [FIT_HEADER]
    window = 1e-3 * info.width
    for k, E, sign in ((0, info.E_minus, 1.0), (1, info.E_plus, -1.0)):
        for d in np.geomspace(1e-6 * info.width, window, 13):
            x = E + sign * d
            st = solve_boundary(mu, nu, x, ladder)
            model = near_edge_density(info, mu, nu, x, window * (1 + 1e-9))
            rows.append(",".join([("minus", "plus")[k], num(d), num(x), num(st.omega_mu.imag),
                                  num(info.gamma_mu[k] * math.sqrt(d)), num(st.m_rho.imag / math.pi),
                                  num(model)]))
    return rows


def cmd_edges(args) -> int:
    try:
        mu, nu = _load_pair(args)
        ladder = _ladder(args)
    except (OSError, ValueError, FreeConvError) as exc:
        return _fail(exc)
    reasons = [f"mu: {r}" for r in validate(mu).edge_reasons] + [f"nu: {r}" for r in validate(nu).edge_reasons]
    if reasons:
        print("error: inputs violate the edge Assumption (one Jacobi component on (0, inf), no atoms)",
              file=sys.stderr)
        print(to_json({"mu": validate(mu).to_dict(), "nu": validate(nu).to_dict()}), file=sys.stderr)
        return EXIT_FATAL
    try:
        info = sqrt_coefficients(mu, nu, find_support(mu, nu))
    except FreeConvError as exc:
        return _fail(exc)
    try:
        fit = None if args.json_only else _fit_rows(mu, nu, info, ladder)
    except FreeConvError as exc:
        return _fail(exc)
    text = to_json(info.to_dict()) + "\n"
    if args.edges_out:
        _write(args.edges_out, text)
    else:
        sys.stdout.write(text)
    if fit is not None:
        _write(args.out, "\n".join(fit) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    keys = acceptance.select(args.filter)
    if not keys:
        return _fail(f"no criterion matches filter {args.filter!r}")
    results = acceptance.run(keys, perturb=args.perturb)
    text = acceptance.render(results)
    if args.out:
        _write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FATAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freeconv", description="Free multiplicative convolution of measures on (0, inf).")
    sub = p.add_subparsers(dest="command", required=True)

    def ladder_flags(sp):
        sp.add_argument("--eps-start", type=float, default=1e-2)
        sp.add_argument("--eps-rungs", type=int, default=14)

    c = sub.add_parser("convolve", help="density, atoms and optional edges of mu [x] nu")
    c.add_argument("--mu", required=True)
    c.add_argument("--nu", required=True)
    c.add_argument("--grid-lo", type=float)
    c.add_argument("--grid-hi", type=float)
    c.add_argument("--grid-n", type=int, default=512)
    ladder_flags(c)
    c.add_argument("--out", default="density.csv")
    c.add_argument("--atoms-out")
    c.add_argument("--edges-out")
    c.set_defaults(func=cmd_convolve)

    t = sub.add_parser("transform", help="transforms of one measure at a point")
    t.add_argument("--mu", required=True)
    t.add_argument("--z", required=True, help="complex point, e.g. 2+0.5j")
    t.add_argument("--out")
    t.set_defaults(func=cmd_transform)

    e = sub.add_parser("edges", help="support edges and square-root coefficients")
    e.add_argument("--mu", required=True)
    e.add_argument("--nu", required=True)
    ladder_flags(e)
    e.add_argument("--edges-out")
    e.add_argument("--out", default="edges_fit.csv", help="near-edge fit CSV")
    e.add_argument("--json-only", action="store_true")
    e.set_defaults(func=cmd_edges)

    v = sub.add_parser("validate", help="run the acceptance criteria")
    v.add_argument("--filter")
    v.add_argument("--out")
    v.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FreeConvError as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
