import math

import numpy as np
import pytest

from freeconv.density import (AtomReport, atoms, density, density_at, density_grid, mass_check,
                              support_bound)
from freeconv.errors import BoundaryError, DomainError
from freeconv.measures import Atom, JacobiComponent, Measure, dilate, make_jacobi, point_mass
from freeconv.oracles import bernoulli_square_density, s_series_moments

# Fuss-Catalan closed form at x = 1, evaluated symbolically to 20 digits
FUSS_CATALAN_AT_1 = 0.17897912748802846296


def test_atoms_examples(measures):
    b = measures["bernoulli"]
    rep = atoms(b, b)
    assert rep.entries == ((0.0, 0.5, "zero"),)
    mu = Measure(atoms=(Atom(1.0, 0.7),), components=(JacobiComponent(2, 3, 0, 0, 0.3),))
    nu = Measure(atoms=(Atom(3.0, 0.6),), components=(JacobiComponent(2, 3, 0, 0, 0.4),))
    rep = atoms(mu, nu)
    assert len(rep.entries) == 1
    c, w, wit = rep.entries[0]
    assert c == 3.0 and w == pytest.approx(0.3, abs=1e-15) and wit == (1.0, 3.0)
    assert atoms(measures["A"], measures["B"]).entries == ()


def test_atoms_exhaustive_and_bounded():
    mu = Measure(atoms=(Atom(0.0, 0.2), Atom(1.0, 0.8)))
    nu = Measure(atoms=(Atom(2.0, 0.9), Atom(5.0, 0.1)))
    rep = atoms(mu, nu)
    # zero atom from mu, and 1*2 with 0.8 + 0.9 - 1
    assert [e[0] for e in rep.entries] == [0.0, 2.0]
    assert rep.mass_at(2.0) == pytest.approx(0.7)
    assert rep.total <= 1.0
    assert atoms(point_mass(1.0), point_mass(1.0)).entries == ((1.0, 1.0, (1.0, 1.0)),)


def test_density_examples(measures):
    b = measures["bernoulli"]
    assert density_at(b, b, 2.0) == pytest.approx(1 / (4 * math.pi), rel=1e-12)
    assert density_at(measures["uniform"], point_mass(1.0), 2.0) == pytest.approx(0.5, rel=1e-10)
    assert density_at(measures["mp"], measures["mp"], 1.0) == pytest.approx(FUSS_CATALAN_AT_1, rel=1e-10)


def test_density_at_atom_rejected(measures):
    with pytest.raises(DomainError):
        density_at(point_mass(1.0), point_mass(2.0), 2.0)
    with pytest.raises(DomainError):
        density_at(measures["A"], measures["A"], -1.0)


def test_grid_marks_atom_points():
    mu = Measure(atoms=(Atom(1.0, 0.7),), components=(JacobiComponent(2, 3, 0, 0, 0.3),))
    g = density(mu, mu, [0.5, 1.0, 1.5])
    assert g.ok.tolist() == [True, False, True]
    assert g.failures == 1 and math.isnan(g.fs[1])


def test_ladder_catches_atom_missed_by_rounding():
    # 0.1 * 3 != 0.3 in floating point, so only the boundary ladder sees this atom
    mu = Measure(atoms=(Atom(0.1, 0.8),), components=(JacobiComponent(2, 3, 0, 0, 0.2),))
    nu = Measure(atoms=(Atom(3.0, 0.8),), components=(JacobiComponent(2, 3, 0, 0, 0.2),))
    assert atoms(mu, nu).mass_at(0.3) == 0.0
    with pytest.raises(BoundaryError) as info:
        density_at(mu, nu, 0.3)
    assert "atom" in str(info.value) and info.value.state is not None


def test_grid_outside_support_is_zero(measures):
    g = density_grid(measures["A"], measures["B"], 5.5, 8.0, 20)
    assert np.all(g.fs == 0.0)
    g = density_grid(measures["A"], measures["B"], 0.05, 0.6, 20)
    assert np.all(g.fs == 0.0)


def test_grid_symmetry(measures):
    a = density_grid(measures["A"], measures["B"], 0.7, 5.0, 64)
    b = density_grid(measures["B"], measures["A"], 0.7, 5.0, 64)
    assert np.allclose(a.fs, b.fs, rtol=0, atol=1e-9)


def test_grid_argument_checks(measures):
    with pytest.raises(DomainError):
        density_grid(measures["A"], measures["A"], 0.0, 1.0, 10)
    with pytest.raises(DomainError):
        density_grid(measures["A"], measures["A"], 1.0, 2.0, 1)


def test_bernoulli_grid_and_mass(measures):
    b = measures["bernoulli"]
    g = density_grid(b, b, 0.01, 3.99, 512)
    assert g.failures == 0
    assert np.allclose(g.fs, bernoulli_square_density(g.xs), rtol=1e-10)
    mass, defect = mass_check(g, atoms(b, b))
    assert defect <= 2e-3
    # the tail correction is what makes that budget: the plain trapezoid misses ~3%
    plain, _ = mass_check(g, atoms(b, b), support=(0.01, 3.99))
    assert abs(plain - 1) > 0.02


def test_mass_of_single_atom():
    d = point_mass(1.0)
    from freeconv.density import DensityGrid
    empty = DensityGrid(np.array([0.5, 2.0]), np.zeros(2), 0.0, np.zeros(2), np.zeros(2), np.zeros(2),
                        np.ones(2, bool))
    mass, defect = mass_check(empty, atoms(d, d))
    assert mass == 1.0 and defect == 0.0


@pytest.mark.slow
def test_jacobi_mass_at_2048(measures):
    mu, nu = measures["A"], measures["B"]
    lo, hi = support_bound(mu, nu)
    g = density_grid(mu, nu, lo + 1e-9, hi - 1e-9, 2048)
    _, defect = mass_check(g, atoms(mu, nu))
    assert defect <= 5e-4
    assert np.all(g.fs >= 0)


def test_trapezoid_moments(measures):
    # trapezoid moments on a fine grid agree with the series oracle
    mu, nu = measures["uniform"], measures["arcsine"]
    lo, hi = support_bound(mu, nu)
    g = density_grid(mu, nu, lo, hi, 1500)
    ref = s_series_moments(mu, nu, 4)
    for k in range(1, 5):
        got = np.trapezoid(g.xs ** k * g.fs, g.xs)
        assert got == pytest.approx(ref[k - 1], rel=1e-3)


def test_mean_multiplicativity(measures):
    from freeconv.acceptance import chebyshev_grid
    from freeconv.edges import find_support
    for mu, nu in ((measures["A"], measures["B"]), (measures["uniform"], measures["arcsine"])):
        info = find_support(mu, nu, cross_check=False)
        xs, w = chebyshev_grid(info.E_minus, info.E_plus, 128)
        g = density(mu, nu, xs)
        assert np.dot(w, g.fs) == pytest.approx(1.0, abs=1e-8)
        assert np.dot(w, xs * g.fs) == pytest.approx(mu.mean * nu.mean, rel=1e-6)


def test_support_consistency(measures):
    from freeconv.edges import find_support
    mu, nu = measures["A"], measures["B"]
    info = find_support(mu, nu, cross_check=False)
    outside = np.concatenate([np.linspace(0.05, info.E_minus - 1e-6, 15), np.linspace(info.E_plus + 1e-6, 12, 15)])
    g = density(mu, nu, outside)
    assert np.all(g.fs <= 1e-9)


def test_singular_end_is_not_clipped(measures):
    # the atom at 0 leaves an x^(-1/2) density near 0; it is reported as is
    b = measures["bernoulli"]
    xs = np.geomspace(1e-6, 1e-2, 6)
    g = density(b, b, xs)
    assert np.allclose(g.fs, bernoulli_square_density(xs), rtol=1e-9)
    assert g.fs[0] > 70


def test_xf_max_recorded(measures):
    b = measures["bernoulli"]
    g = density_grid(b, b, 0.5, 3.5, 16)
    assert g.xf_max == pytest.approx(np.max(g.xs * g.fs))
