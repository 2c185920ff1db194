import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from suctionflow.errors import GridMismatchError, OutOfGridError
from suctionflow.spaces import (
    AxiVectorField,
    RadialGrid,
    RadialProfile,
    SpectralMeasure,
    ZetaGrid,
    convolve,
    fornberg_weights,
    fx_norm,
    project_atoms,
    read_measure,
    read_profile_csv,
    reconstruct,
    weighted_sup_norm,
    write_measure,
    write_profile_csv,
    x_norm,
    z_derivative,
)

G = RadialGrid()
ZG = ZetaGrid()


def gauss_density(center, width, prof):
    z = ZG.nodes
    shape = np.exp(-0.5 * ((z - center) / width) ** 2)
    return SpectralMeasure(G, {}, ZG, shape[:, None] * prof.values[None, :], prof.tail_exponent)


class TestGrids:
    def test_radial_nodes(self):
        r = G.nodes
        assert r[0] == 1.0 and r[-1] == G.r_max
        np.testing.assert_allclose(np.diff(np.log(r)), G.dt, rtol=1e-10)

    def test_locate_rejects_outside(self):
        with pytest.raises(OutOfGridError):
            G.locate(0.5)
        with pytest.raises(OutOfGridError):
            G.locate(2e3)

    @pytest.mark.parametrize("kw", [{"n": 10}, {"r_max": 1.0}])
    def test_bad_radial_grid(self, kw):
        with pytest.raises(ValueError):
            RadialGrid(**kw)

    def test_zeta_grid(self):
        assert ZG.nodes[ZG.n // 2] == 0.0
        assert ZG.spacing == 0.125
        assert ZG.weights.sum() == pytest.approx(32.0)
        with pytest.raises(ValueError):
            ZetaGrid(n=256)

    def test_fornberg_first_derivative(self):
        x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        np.testing.assert_allclose(fornberg_weights(0.0, x, 1), [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], atol=1e-14)


class TestProfiles:
    def test_interpolation_and_derivative(self):
        p = RadialProfile.from_function(G, lambda r: np.sin(r) / r**2)
        r = np.array([1.3, 2.7, 15.0])
        np.testing.assert_allclose(p(r).real, np.sin(r) / r**2, atol=1e-7)
        dp = p.derivative()
        exact = np.cos(G.nodes) / G.nodes**2 - 2 * np.sin(G.nodes) / G.nodes**3
        sel = G.nodes < 20
        assert np.max(np.abs(dp.values[sel] - exact[sel])) < 1e-5

    def test_tail_rules(self):
        a, b = RadialProfile.power_law(G, 3.0), RadialProfile.power_law(G, 4.0)
        assert (a + b).tail_exponent == 3.0
        assert (a * b).tail_exponent == 7.0
        assert a.times_power(1.0).tail_exponent == 2.0
        assert a.derivative().tail_exponent == 4.0

    def test_immutable_and_checks(self):
        p = RadialProfile.power_law(G, 3.0)
        with pytest.raises(ValueError):
            p.values[0] = 2.0
        with pytest.raises(ValueError):
            RadialProfile(G, np.ones(3))
        with pytest.raises(GridMismatchError):
            p + RadialProfile.power_law(RadialGrid(256), 3.0)

    def test_weighted_sup_norm_examples(self):
        assert weighted_sup_norm(RadialProfile.power_law(G, 2.0), 2.0) == pytest.approx(1.0)
        assert weighted_sup_norm(RadialProfile.power_law(G, 1.0), 2.5) == np.inf

    def test_weighted_sup_norm_interior_max(self):
        # r^-3 (1 - 1/r) weighted by r^3 -> 1 - 1/r; the max sits at R_max for this tail.
        # Use r^-3(1-1/r) * exp(-r/50) so the max is interior, and compare with a dense oracle.
        fn = lambda r: r**-3 * (1 - 1 / r) * np.exp(-r / 50)
        got = weighted_sup_norm(RadialProfile.from_function(RadialGrid(4096), fn), 3.0)
        r = np.geomspace(1, 1e3, 2_000_001)
        assert got == pytest.approx(np.max(r**3 * fn(r)), rel=1e-6)


class TestMeasures:
    def test_x_norm_examples(self):
        assert x_norm(SpectralMeasure.atom(0, RadialProfile.power_law(G, 2.7)), 2.7) == pytest.approx(1.0)
        two = SpectralMeasure(G, {1: RadialProfile.power_law(G, 2.0, 0.25), -1: RadialProfile.power_law(G, 2.0, 0.25)})
        assert x_norm(two, 2.0) == pytest.approx(0.5)

    def test_x_norm_gaussian_density(self):
        mu = gauss_density(0.0, 1.0, RadialProfile.power_law(G, 3.0))
        assert x_norm(mu, 3.0) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-8)

    def test_atom_convolution_example(self):
        a = SpectralMeasure.atom(1, RadialProfile.power_law(G, 3.0))
        b = SpectralMeasure.atom(2, RadialProfile.power_law(G, 2.0))
        c = convolve(a, b)
        assert list(c.atoms) == [3]
        np.testing.assert_allclose(c.atoms[3].values, G.nodes**-5.0, rtol=1e-14)
        assert c.atoms[3].tail_exponent == 5.0

    def test_unit_atom_is_identity(self):
        mu = gauss_density(1.0, 0.7, RadialProfile.power_law(G, 3.0)) + SpectralMeasure.atom(
            2, RadialProfile.power_law(G, 4.0))
        one = SpectralMeasure.atom(0, RadialProfile.from_function(G, np.ones_like))
        out = convolve(mu, one)
        np.testing.assert_array_equal(out.density, mu.density)
        np.testing.assert_array_equal(out.atoms[2].values, mu.atoms[2].values)

    def test_convolution_is_physical_product(self):
        p1 = RadialProfile.from_function(G, lambda r: r**-3.0, 3.0)
        p2 = RadialProfile.from_function(G, lambda r: np.exp(-r) * r, None)
        mu1 = gauss_density(0.0, 0.8, p1) + SpectralMeasure.cosine(1, p2)
        mu2 = gauss_density(0.5, 0.6, p2) + SpectralMeasure.atom(-2, p1)
        r, z = G.nodes[[0, 40, 150]], np.linspace(0, 2 * np.pi, 9)  # nodes: no interpolation error
        lhs = reconstruct(convolve(mu1, mu2), r, z)
        rhs = reconstruct(mu1, r, z) * reconstruct(mu2, r, z)
        assert np.max(np.abs(lhs - rhs)) <= 1e-8 * np.max(np.abs(rhs))

    def test_truncate_reports_dropped(self):
        mu = SpectralMeasure(G, {m: RadialProfile.power_law(G, 3.0) for m in range(-5, 6)})
        kept, dropped = mu.truncate(3)
        assert sorted(kept.atoms) == list(range(-3, 4))
        assert dropped == pytest.approx(4.0)

    def test_z_derivative_atom(self):
        p = RadialProfile.power_law(G, 3.0, 1.5)
        out = z_derivative(SpectralMeasure.atom(2, p))
        np.testing.assert_array_equal(out.atoms[2].values, 2j * p.values)

    def test_z_derivative_matches_central_difference(self):
        mu = SpectralMeasure.cosine(1, RadialProfile.power_law(G, 3.0)) + SpectralMeasure.cosine(
            3, RadialProfile.power_law(G, 2.5, 0.4))
        r, z, h = np.array([1.5, 3.0]), np.linspace(0, 6, 13), 1e-4
        fd = (reconstruct(mu, r, z + h) - reconstruct(mu, r, z - h)) / (2 * h)
        assert np.max(np.abs(fd - reconstruct(z_derivative(mu), r, z))) <= 1e-6

    def test_reconstruct_examples(self):
        a = RadialProfile.from_function(G, lambda r: r**-2.0)
        assert reconstruct(SpectralMeasure.atom(0, a), 2.0, 1.3) == pytest.approx(0.25, rel=1e-7)
        vals = reconstruct(SpectralMeasure.cosine(1, a), np.array([2.0]), np.array([0.0, np.pi / 3, 2 * np.pi]))
        np.testing.assert_allclose(vals[0], 0.25 * np.array([1.0, 0.5, 1.0]), rtol=1e-7, atol=1e-15)

    def test_project_round_trip(self):
        z = 2 * np.pi * np.arange(64) / 64
        a = G.nodes**-3.0
        samples = a[:, None] * np.cos(2 * z)[None, :]
        mu = project_atoms(samples, G, m_max=4)
        assert sorted(mu.atoms) == [-2, 2]
        back = reconstruct(mu, G.nodes[::37], z)
        assert np.max(np.abs(back - samples[::37])) <= 1e-10

    def test_hermitian_preserved(self):
        p = RadialProfile.from_function(G, lambda r: (1 + 2j) * r**-3.0, 3.0)
        mu = SpectralMeasure.cosine(2, p) + gauss_density(0.0, 1.0, RadialProfile.power_law(G, 3.0))
        assert mu.hermitian_defect() == 0.0
        assert convolve(mu, mu).hermitian_defect() < 1e-14
        assert z_derivative(mu).hermitian_defect() < 1e-14
        assert (mu * 2.5).hermitian_defect() == 0.0

    def test_grid_mismatch(self):
        a = SpectralMeasure.atom(0, RadialProfile.power_law(G, 3.0))
        b = SpectralMeasure.atom(0, RadialProfile.power_law(RadialGrid(256), 3.0))
        with pytest.raises(GridMismatchError):
            convolve(a, b)

    def test_rejects_non_integer_atom(self):
        with pytest.raises(ValueError):
            SpectralMeasure(G, {0.5: RadialProfile.power_law(G, 3.0)})

    def test_zero_short_circuits(self):
        z = SpectralMeasure.zero(G)
        assert z.is_zero() and x_norm(z, 2.5) == 0.0
        assert convolve(z, SpectralMeasure.atom(1, RadialProfile.power_law(G, 3.0))).is_zero()
        assert fx_norm(AxiVectorField.zero(G), 2.5) == 0.0


# hypothesis: random atom-only measures and Gaussian densities

def random_measure(seed, rho, with_density=True):
    rng = np.random.default_rng(seed)
    atoms = {}
    for m in rng.choice(np.arange(-3, 4), size=rng.integers(0, 3), replace=False):
        p = rho + rng.uniform(0, 1.5)
        atoms[int(m)] = RadialProfile.power_law(G, p, complex(rng.normal(), rng.normal()))
    mu = SpectralMeasure(G, atoms)
    if with_density and rng.random() < 0.7:
        p = rho + rng.uniform(0, 1.5)
        mu = mu + gauss_density(rng.uniform(-3, 3), rng.uniform(0.3, 1.5),
                                RadialProfile.power_law(G, p, rng.uniform(0.2, 2)))
    return mu


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.floats(0.0, 3.0))
def test_submultiplicative_equal_rho(s1, s2, rho):
    a, b = random_measure(s1, rho), random_measure(s2, rho)
    assert x_norm(convolve(a, b), rho) <= x_norm(a, rho) * x_norm(b, rho) + 1e-6


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_submultiplicative_mixed_rho(s1, s2, r1, r2):
    a, b = random_measure(s1, r1), random_measure(s2, r2)
    assert x_norm(convolve(a, b), r1 + r2) <= x_norm(a, r1) * x_norm(b, r2) + 1e-6


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_atom_convolution_commutative_associative(s1, s2, s3):
    a, b, c = (random_measure(s, 2.0, with_density=False) for s in (s1, s2, s3))
    for x, y in ((convolve(a, b), convolve(b, a)), (convolve(convolve(a, b), c), convolve(a, convolve(b, c)))):
        assert sorted(x.atoms) == sorted(y.atoms)
        for m in x.atoms:
            np.testing.assert_allclose(x.atoms[m].values, y.atoms[m].values, rtol=1e-13, atol=1e-300)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_z_derivative_linear(s1, s2):
    a, b = random_measure(s1, 2.0), random_measure(s2, 2.0)
    lhs, rhs = z_derivative(a + b), z_derivative(a) + z_derivative(b)
    # equal up to rounding of the complex multiply
    for m in lhs.atoms:
        np.testing.assert_allclose(lhs.atoms[m].values, rhs.atoms[m].values, rtol=4e-15, atol=1e-300)
    if lhs.density is not None:
        np.testing.assert_allclose(lhs.density, rhs.density, rtol=4e-15, atol=1e-300)


def test_profile_csv_round_trip(tmp_path):
    p = RadialProfile.from_function(G, lambda r: (1 - 0.3j) * r**-2.5, 2.5)
    write_profile_csv(p, tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "r,re,im"
    q = read_profile_csv(tmp_path / "p.csv", G, 2.5)
    np.testing.assert_array_equal(p.values, q.values)
    with pytest.raises(GridMismatchError):
        read_profile_csv(tmp_path / "p.csv", RadialGrid(256))


def test_measure_round_trip(tmp_path):
    mu = random_measure(7, 2.5) + SpectralMeasure.cosine(3, RadialProfile.power_law(G, 4.0))
    back = read_measure(write_measure(mu, tmp_path, "f"))
    assert sorted(back.atoms) == sorted(mu.atoms)
    for m in mu.atoms:
        np.testing.assert_array_equal(back.atoms[m].values, mu.atoms[m].values)
    if mu.has_density:
        np.testing.assert_array_equal(back.density, mu.density)
