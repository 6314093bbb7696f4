import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeconv.errors import PoleError, SingularityError
from freeconv.measures import Atom, Measure, make_jacobi, point_mass
from freeconv.transforms import (M_derivatives, M_over_z, cauchy_sums, eta_psi, ihat, m_transform,
                                 stieltjes)

from conftest import upper_points


def m_uniform(z):
    return 0.5 * cmath.log((3 - z) / (1 - z))


def m_arcsine(z):
    return -1 / (cmath.sqrt(z - 1) * cmath.sqrt(z - 3))


def m_mp(z):
    # root of z m^2 + z m + 1 = 0 with the Stieltjes branch (m ~ -1/z at infinity)
    r = cmath.sqrt(z) * cmath.sqrt(z - 4)
    return (-z + r) / (2 * z)


def test_point_mass_and_bernoulli_examples(measures):
    assert stieltjes(point_mass(1.0), 1j)[0] == pytest.approx(0.5 + 0.5j, abs=1e-16)
    assert stieltjes(measures["bernoulli"], 1 + 1j)[0] == pytest.approx(0.5j, abs=1e-16)
    assert m_transform(measures["bernoulli"], 1 + 1j).M == pytest.approx(1j, abs=1e-15)


def test_mp_at_minus_one(measures):
    # derived oracle: positive root of 1 - m - m^2 = 0
    assert stieltjes(measures["mp"], -1.0)[0].real == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-14)


@pytest.mark.parametrize("name,ref", [("uniform", m_uniform), ("arcsine", m_arcsine), ("mp", m_mp)])
def test_closed_forms(measures, rng, name, ref):
    mu = measures[name]
    for z in upper_points(rng, 60, x=(-1, 6), logy=(-6, 1)):
        assert stieltjes(mu, z)[0] == pytest.approx(ref(z), rel=1e-9, abs=1e-12)


def test_mp_self_consistency(measures, rng):
    for z in upper_points(rng, 40):
        m = stieltjes(measures["mp"], z)[0]
        assert abs(z * m * m + z * m + 1) <= 1e-11 * (1 + abs(z))


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_point_mass_M_is_dilation(a, rng):
    d = point_mass(a)
    for z in upper_points(rng, 10):
        assert M_derivatives(d, z, 0)[0] == pytest.approx(z / a, rel=1e-14)


def test_singularities(measures):
    with pytest.raises(SingularityError):
        stieltjes(measures["uniform"], 2.0)
    with pytest.raises(SingularityError):
        stieltjes(measures["bernoulli"], 2.0)
    # boundary value from above is available on request
    s = cauchy_sums(measures["uniform"], 2.0, 0, side=1)
    assert s.K[0] == pytest.approx(1j * math.pi / 2, abs=1e-12)


def test_pole_reported():
    # z m + 1 = (1/2)/(1 - z) + (3/2)/(3 - z) vanishes at z = 3/2 for (delta_1 + delta_3)/2
    two = Measure(atoms=(Atom(1.0, 0.5), Atom(3.0, 0.5)))
    with pytest.raises(PoleError) as info:
        M_derivatives(two, 1.5, 0)
    assert info.value.location == 1.5


def test_derivatives_against_finite_differences(measures, rng):
    # second differences need a larger step to stay clear of roundoff
    h, h2 = 1e-5, 1e-3
    for name in ("A", "B", "mp", "bernoulli"):
        mu = measures[name]
        for z in upper_points(rng, 8, logy=(-0.5, 1)):
            M, Mp, Mpp = M_derivatives(mu, z, 2)
            Mf = lambda w: M_derivatives(mu, w, 0)[0]
            fd1 = (Mf(z + h) - Mf(z - h)) / (2 * h)
            fd2 = (Mf(z + h2) - 2 * M + Mf(z - h2)) / h2 ** 2
            assert abs(Mp - fd1) <= 1e-6 * abs(Mp)
            assert abs(Mpp - fd2) <= 1e-5 * max(abs(Mpp), 1.0)
            m, m1, m2 = stieltjes(mu, z, 2)
            assert Mp == pytest.approx((m + z * m1) / (z * m + 1) ** 2, rel=1e-12)


def test_stieltjes_derivatives(measures):
    z = 2 + 0.3j
    m, m1, m2 = stieltjes(measures["uniform"], z, 2)
    assert m1 == pytest.approx(0.5 * (1 / (1 - z) - 1 / (3 - z)), rel=1e-12)
    assert m2 == pytest.approx(0.5 * (1 / (1 - z) ** 2 - 1 / (3 - z) ** 2), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-3, 12), logy=st.floats(-3, 2))
def test_self_map_and_positivity(measures, x, logy):
    z = complex(x, 10 ** logy)
    for name in ("A", "B", "uniform", "mp", "bernoulli"):
        tv = m_transform(measures[name], z)
        assert tv.m.imag > 0
        assert M_over_z(measures[name], z).imag > 0
        assert tv.Ihat >= 0


def test_conjugate_symmetry(measures, rng):
    for z in upper_points(rng, 20):
        for name in ("A", "mp"):
            mu = measures[name]
            assert stieltjes(mu, z.conjugate())[0] == pytest.approx(stieltjes(mu, z)[0].conjugate(), rel=1e-13)
            Mc = M_derivatives(mu, z.conjugate(), 0)[0]
            assert Mc == pytest.approx(M_derivatives(mu, z, 0)[0].conjugate(), rel=1e-13)


def test_I_direct_vs_analytic(measures):
    # I by direct quadrature on real nodes and via Im(z m + 1)/Im z on the arc
    mu = measures["A"]
    for z in (5 + 0.5j, 0.2 + 0.1j, 2 + 0.5j):
        s = cauchy_sums(mu, z, 0, want_I=True)
        assert s.I == pytest.approx(s.U[0].imag / z.imag, rel=1e-12)


def test_ihat_real_point_is_derivative_of_M_over_z(measures):
    mu = measures["B"]
    for x in (0.2, 3.0, -1.0):
        h = 1e-5
        fd = ((M_over_z(mu, x + h) - M_over_z(mu, x - h)) / (2 * h)).real
        assert ihat(mu, x) == pytest.approx(fd, rel=1e-8)
        # the limit from C+ agrees
        assert ihat(mu, complex(x, 1e-7)) == pytest.approx(ihat(mu, x), rel=1e-6)


def test_hat_mass_asymptotics(measures):
    for name in ("A", "mp", "bernoulli"):
        mu = measures[name]
        mu1 = mu if abs(mu.mean - 1) < 1e-12 else None
        if mu1 is None:
            continue
        z = -1e3
        assert z * z * ihat(mu1, z) == pytest.approx(mu1.variance, rel=1e-2)


def test_M_variance_asymptotics(measures):
    from freeconv.measures import dilate
    for name in ("A", "B", "mp", "bernoulli"):
        mu = dilate(measures[name], 1 / measures[name].mean)
        z = 1e4j
        M = M_derivatives(mu, z, 0)[0]
        assert abs(M - z + mu.variance) <= 1e-3 * max(1.0, mu.variance)


def test_eta_psi(measures, rng):
    for z in upper_points(rng, 10):
        assert eta_psi(point_mass(1.0), z)[0] == pytest.approx(z, rel=1e-14)
        assert eta_psi(point_mass(2.5), z)[0] == pytest.approx(2.5 * z, rel=1e-14)
    eta, psi = eta_psi(measures["mp"], -0.1)
    assert abs(eta - (1 - 1 / (psi + 1))) <= 1e-12


def test_quadrature_converged(measures):
    from freeconv.quadrature import MAX_NODES
    mu = measures["B"]
    for z in (2.0 + 0.05j, 0.45 + 0j, 1.0 + 0.5j, -0.5 + 0j):
        base = cauchy_sums(mu, z, 0).K[0]
        for n in (512, 2048):
            assert abs(cauchy_sums(mu, z, 0, n_override=n).K[0] - base) <= 1e-12
