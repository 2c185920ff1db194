import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from suctionflow.errors import PreconditionError
from suctionflow.greens import (
    KernelParams,
    c_coefficient,
    c_zero,
    capital_f,
    d_coefficient,
    mn_integrands,
    sigma,
)
from suctionflow.spaces import RadialGrid, RadialProfile
from suctionflow.specfun import bessel_i, bessel_k

G = RadialGrid()
F_GOLDEN = 0.44431918317892405  # gamma=3, zeta=1; agrees with mpmath.quad to 1e-16
QUAD_RTOL = 1e-8  # grid quadrature tolerance

radii = st.floats(1.0, 30.0)
zetas = st.floats(1e-3, 5.0)  # keeps e^{-zeta |r - s|} above the float range floor
gammas = st.floats(2.05, 8.0)


def test_zero_branch_values():
    p = KernelParams(3.0, 0.0)
    assert sigma(2, 2.0, 1.5, p) == pytest.approx(0.5625)
    assert sigma(3, 3.0, 10.0, p) == pytest.approx(1.5)


@pytest.mark.parametrize("zeta", [0.0, 1e-3, 0.7, 5.0, 300.0])
@given(s=st.floats(1.0, 50.0), gamma=gammas)
def test_boundary_cancellation(zeta, s, gamma):
    p = KernelParams(gamma, zeta)
    for a, b in ((1, 3), (7, 9)):
        total = sigma(a, 1.0, s, p) + sigma(b, 1.0, s, p)
        assert abs(total) <= 1e-12 * max(abs(sigma(b, 1.0, s, p)), 1e-300)


@given(r=radii, s=radii, zeta=st.one_of(st.just(0.0), zetas), gamma=gammas)
def test_reciprocity(r, s, zeta, gamma):
    p = KernelParams(gamma, zeta)
    assert r * sigma(2, r, s, p) == pytest.approx(s * sigma(3, s, r, p), rel=1e-12)


@given(r=st.floats(1.001, 30.0), s=st.floats(1.001, 30.0), zeta=zetas, gamma=gammas)
def test_positivity(r, s, zeta, gamma):
    p = KernelParams(gamma, zeta)
    for idx in (2, 3, 4, 5, 6, 8, 9):
        assert sigma(idx, r, s, p) > 0
    assert sigma(1, r, s, p) < 0 and sigma(7, r, s, p) < 0


@pytest.mark.parametrize("idx", [1, 2, 3, 5, 6, 7, 8, 9])
def test_continuity_first_order(idx):
    pts = ((2.0, 1.5), (1.5, 3.0), (4.0, 2.0))
    for k in range(4, 9):
        zeta = 10.0**-k
        p = KernelParams(3.0, zeta)
        for r, s in pts:
            zero = sigma(idx, r, s, p, branch="zero")
            assert abs(sigma(idx, r, s, p, branch="bessel") - zero) <= 10 * zeta * abs(zero)


def test_continuity_sigma4_normalized():
    # the Bessel form of the homogeneous vorticity kernel is defined up to a constant
    for k in range(4, 9):
        p = KernelParams(3.0, 10.0**-k)
        for r in (1.5, 2.0, 4.0):
            ratio = sigma(4, r, 1.0, p, branch="bessel") / sigma(4, 1.0, 1.0, p, branch="bessel")
            assert ratio == pytest.approx(sigma(4, r, 1.0, p, branch="zero"), rel=10 * 10.0**-k)


def test_kernel_errors():
    with pytest.raises(ValueError, match="gamma must exceed 2"):
        KernelParams(1.5, 0.0)
    with pytest.raises(PreconditionError):
        sigma(2, 0.5, 1.0, KernelParams(3.0, 1.0))
    with pytest.raises(ValueError):
        sigma(10, 2.0, 1.0, KernelParams(3.0, 1.0))


def test_large_zeta_no_overflow():
    p = KernelParams(3.0, 400.0)
    vals = [sigma(i, 1.2, 1.1, p) for i in range(1, 10)]
    assert all(np.isfinite(vals))


def test_capital_f_golden():
    assert capital_f(1.0, 3.0) == pytest.approx(F_GOLDEN, rel=1e-10)


def test_capital_f_matches_direct_quadrature():
    ref = integrate.quad(lambda s: s**-0.5 * bessel_k(1, 2 * s) * bessel_k(2.5, 2 * s), 1, np.inf,
                         epsabs=0, epsrel=1e-12)[0]
    assert capital_f(2.0, 3.0) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("gamma", [2.5, 3.0, 4.0])
def test_capital_f_scaling_bands(gamma):
    small = np.geomspace(1e-3, 1.0, 25)
    large = np.linspace(1.0, 10.0, 19)
    a = np.array([capital_f(z, gamma) * z ** (gamma / 2 + 2) for z in small])
    b = np.array([capital_f(z, gamma) * z**2 * np.exp(2 * z) for z in large])
    for band in (a, b):
        assert np.all(band > 0)
        assert band.max() / band.min() < 10


def test_capital_f_needs_nonzero_zeta():
    with pytest.raises(PreconditionError):
        capital_f(0.0, 3.0)


def test_d_coefficient_examples():
    assert d_coefficient(RadialProfile.power_law(G, 4.0), 0.0, "atom") == pytest.approx(1 / 6, rel=QUAD_RTOL)
    assert d_coefficient(RadialProfile.zeros(G), 0.7) == 0.0
    b0 = RadialProfile(G, G.nodes**-3.0 - 1.5 * G.nodes**-4.0, 3.0)
    # the two terms are +1/4 and -1/4
    assert abs(d_coefficient(b0, 0.0, "atom")) <= QUAD_RTOL * 0.25


def test_d_coefficient_continuous_matches_quad():
    k = 0.9
    h = RadialProfile.power_law(G, 3.5)
    ref = bessel_i(1, k) / bessel_k(1, k) * integrate.quad(lambda s: bessel_k(1, k * s) * s**-2.5, 1, np.inf,
                                                           epsabs=0, epsrel=1e-12)[0]
    assert d_coefficient(h, k) == pytest.approx(ref, rel=QUAD_RTOL)


def test_c_zero_example():
    assert c_zero(RadialProfile.power_law(G, 4.0)) == pytest.approx(-0.5, rel=QUAD_RTOL)
    assert c_coefficient(RadialProfile.zeros(G), 0.7, 3.0) == 0.0


def test_mn_integrands_pure_gz():
    m, n = mn_integrands(0.0, 1.0, 2.0, 0.8, 3.0)
    assert m.imag == 0 and n.imag == 0
    assert m.real > 0 > n.real
    assert mn_integrands(0.0, 0.0, 2.0, 0.8, 3.0) == (0, 0)
    with pytest.raises(PreconditionError):
        mn_integrands(1.0, 1.0, 2.0, 0.0, 3.0)


# smooth compact force for the integration-by-parts and construction checks
def gr(s):
    return 0.4 * np.exp(-(((s - 2.5) / 0.35) ** 2))


def gz(s):
    return np.exp(-(((s - 3.0) / 0.4) ** 2))  # g_z(1) ~ 1e-11: no boundary term


def dgz(s):
    return -2 * (s - 3.0) / 0.16 * gz(s)


def phi_from_mn(r, zeta, gamma):
    k, nu = abs(zeta), gamma / 2 + 1
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
    cplx = lambda f, a, b: (integrate.quad(lambda s: f(s).real, a, b, **opts)[0]
                            + 1j * integrate.quad(lambda s: f(s).imag, a, b, **opts)[0])
    a = cplx(lambda s: mn_integrands(gr, gz, s, zeta, gamma)[0], 1.0, r)
    b = cplx(lambda s: mn_integrands(gr, gz, s, zeta, gamma)[1], r, 8.0)
    return r ** (-gamma / 2) * (bessel_k(nu, k * r) * a + bessel_i(nu, k * r) * b)


def phi_from_rot(r, zeta, gamma):
    k, nu = abs(zeta), gamma / 2 + 1
    rot = lambda s: 1j * zeta * gr(s) - dgz(s)
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
    cplx = lambda f, a, b: (integrate.quad(lambda s: f(s).real, a, b, **opts)[0]
                            + 1j * integrate.quad(lambda s: f(s).imag, a, b, **opts)[0])
    a = cplx(lambda s: s**nu * bessel_i(nu, k * s) * rot(s), 1.0, r)
    b = cplx(lambda s: s**nu * bessel_k(nu, k * s) * rot(s), r, 8.0)
    return r ** (-gamma / 2) * (bessel_k(nu, k * r) * a + bessel_i(nu, k * r) * b)


@pytest.mark.parametrize("r", [1.0, 2.2, 3.0, 4.5])
def test_integration_by_parts_equivalence(r):
    lhs, rhs = phi_from_mn(r, 0.7, 3.0), phi_from_rot(r, 0.7, 3.0)
    assert abs(lhs - rhs) <= 1e-8 * max(abs(rhs), 1e-3)


def test_c_coefficient_enforces_d_zero():
    zeta, gamma = 0.7, 3.0
    k, nu = zeta, gamma / 2 + 1
    # phi from (M, N) by dense Simpson sums on [1, 8], where the force lives
    s = np.linspace(1.0, 8.0, 70001)
    m, n = mn_integrands(gr, gz, s, zeta, gamma)
    def cum(y, x):  # cumulative_simpson is real-only
        return (integrate.cumulative_simpson(y.real, x=x, initial=0.0)
                + 1j * integrate.cumulative_simpson(y.imag, x=x, initial=0.0))

    a = cum(m, s)
    b = cum(n[::-1], -s[::-1])[::-1]
    dense = s ** (-gamma / 2) * (bessel_k(nu, k * s) * a + bessel_i(nu, k * s) * b)
    r = G.nodes
    inside = r <= 8.0
    vals = np.zeros(G.n, dtype=complex)
    vals[inside] = np.interp(r[inside], s, dense.real) + 1j * np.interp(r[inside], s, dense.imag)
    vals[~inside] = r[~inside] ** (-gamma / 2) * bessel_k(nu, k * r[~inside]) * a[-1]
    phi = RadialProfile(G, vals)
    c = c_coefficient(phi, zeta, gamma)
    homog = RadialProfile(G, r ** (-gamma / 2) * bessel_k(nu, k * r))
    omega = homog * c + phi
    assert abs(d_coefficient(omega, zeta)) <= 1e-8 * abs(d_coefficient(phi, zeta))
