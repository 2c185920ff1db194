"""Radial profiles on a graded grid and the measure space of vertical modes.

A physical axisymmetric scalar field is stored as a *spectral measure*: a
continuous density over a symmetric uniform grid of vertical frequencies plus
Dirac atoms at integer frequencies, each carrying a radial profile on
[1, R_max]. The physical field is

    u(r, z) = sum_m a_m(r) e^{i m z} + int h(r, zeta) e^{i zeta z} d zeta,

so the (2 pi)^{-1/2} of the unitary Fourier transform is absorbed into the
pair (projection, reconstruction). Products of physical fields correspond to
:func:`convolve`; d/dz corresponds to multiplication by ``i zeta``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .errors import GridMismatchError, OutOfGridError

__all__ = [
    "RadialGrid",
    "ZetaGrid",
    "RadialProfile",
    "SpectralMeasure",
    "AxiVectorField",
    "weighted_sup_norm",
    "x_norm",
    "convolve",
    "z_derivative",
    "reconstruct",
    "project_atoms",
    "fx_norm",
    "estimate_tail_exponent",
    "write_profile_csv",
    "read_profile_csv",
    "write_measure",
    "read_measure",
]


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class RadialGrid:
    """Geometric grid r_i = R_max^{i/(n-1)}: uniform in t = log r, r_0 = 1 exactly."""

    n: int = 512
    r_max: float = 1.0e3

    def __post_init__(self):
        if self.n < 64:
            raise ValueError("radial grid needs at least 64 nodes")
        if not self.r_max > 1.0:
            raise ValueError("r_max must exceed 1")

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.exp(self.dt * np.arange(self.n))
        r[0] = 1.0
        r[-1] = self.r_max
        return r

    @property
    def dt(self) -> float:
        return float(np.log(self.r_max) / (self.n - 1))

    @property
    def stretch(self) -> float:
        return float(np.exp(self.dt))

    def locate(self, r):
        """Stencil start indices and cubic Lagrange weights (in t) for points r."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        eps = 1e-12 * self.r_max
        if np.any(r < 1.0 - 1e-12) or np.any(r > self.r_max + eps):
            raise OutOfGridError(f"r outside [1, {self.r_max}]")
        t = np.log(np.clip(r, 1.0, self.r_max)) / self.dt
        start = np.clip(np.floor(t).astype(int) - 1, 0, self.n - 4)
        u = t - start
        w = np.stack(
            [
                -(u - 1) * (u - 2) * (u - 3) / 6,
                u * (u - 2) * (u - 3) / 2,
                -u * (u - 1) * (u - 3) / 2,
                u * (u - 1) * (u - 2) / 6,
            ],
            axis=-1,
        )
        return start, w


@dataclass(frozen=True)
class ZetaGrid:
    """Symmetric uniform frequency grid on [-z_max, z_max] with trapezoid weights."""

    z_max: float = 16.0
    n: int = 257

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError("zeta grid needs an odd number (>= 3) of nodes")

    @cached_property
    def nodes(self) -> np.ndarray:
        z = np.linspace(-self.z_max, self.z_max, self.n)
        z[self.n // 2] = 0.0
        return z

    @property
    def spacing(self) -> float:
        return 2.0 * self.z_max / (self.n - 1)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w


# --------------------------------------------------------------------------
# radial profiles


def fornberg_weights(x0: float, x: np.ndarray, m: int = 1) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at x0 on nodes x (Fornberg's recursion)."""
    n = len(x)
    c = np.zeros((m + 1, n))
    c[0, 0] = 1.0
    c1, c4 = 1.0, x[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c[m]


@lru_cache(maxsize=16)
def _fd_table(n: int, order: int):
    """Start index and weights of the (order+1)-point first-derivative stencil at every node.

    Centered in the interior, shifted one-sided near both ends.
    """
    w = order + 1
    start = np.clip(np.arange(n) - order // 2, 0, n - w)
    weights = np.array([fornberg_weights(float(i), np.arange(s, s + w, dtype=float)) for i, s in enumerate(start)])
    return start[:, None] + np.arange(w), weights


def _fd_log_derivative(v: np.ndarray, dt: float, order: int = 4) -> np.ndarray:
    """d/dt along the last axis on a uniform t grid, ``order``-th order accurate."""
    idx, w = _fd_table(v.shape[-1], order)
    return (v[..., idx] * w).sum(axis=-1) / dt


def _add_tails(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _mul_tails(a, b):
    if a is None or b is None:
        return None
    return a + b


def estimate_tail_exponent(values: np.ndarray, grid: RadialGrid, k: int = 8):
    """Local log-log slope over the last ``k`` nodes, or None if undefined."""
    v = np.abs(np.asarray(values)[-k:])
    if np.any(v == 0) or not np.all(np.isfinite(v)):
        return None
    t = np.log(grid.nodes[-k:])
    slope = np.polyfit(t, np.log(v), 1)[0]
    return float(-slope)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Complex samples of a function of r on ``grid``.

    ``tail_exponent`` p states values(r) ~ c r^{-p} beyond R_max; ``None``
    means no tail model (the profile is treated as vanishing beyond R_max in
    improper integrals, and norms use the grid values only).
    """

    grid: RadialGrid
    values: np.ndarray
    tail_exponent: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialProfile":
        return cls(grid, np.zeros(grid.n, dtype=complex), None)

    @classmethod
    def from_function(cls, grid: RadialGrid, fn, tail_exponent=None) -> "RadialProfile":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=complex), tail_exponent)

    @classmethod
    def power_law(cls, grid: RadialGrid, exponent: float, amplitude: complex = 1.0):
        return cls(grid, amplitude * grid.nodes ** (-exponent), float(exponent))

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def __call__(self, r):
        start, w = self.grid.locate(r)
        idx = start[:, None] + np.arange(4)
        out = np.sum(w * self.values[idx], axis=-1)
        return out.item() if np.ndim(r) == 0 else out

    def derivative(self, order: int = 4) -> "RadialProfile":
        """d/dr by central differences in log r (one-sided near the ends) of the given even order."""
        d = _fd_log_derivative(self.values, self.grid.dt, order) / self.grid.nodes
        tail = None if self.tail_exponent is None else self.tail_exponent + 1.0
        return RadialProfile(self.grid, d, tail)

    def times_power(self, k: float) -> "RadialProfile":
        """Pointwise multiplication by r^k."""
        tail = None if self.tail_exponent is None else self.tail_exponent - k
        return RadialProfile(self.grid, self.values * self.grid.nodes**k, tail)

    def conj(self) -> "RadialProfile":
        return RadialProfile(self.grid, np.conj(self.values), self.tail_exponent)

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatchError("profiles live on different radial grids")

    def __add__(self, other):
        if isinstance(other, RadialProfile):
            self._check(other)
            return RadialProfile(self.grid, self.values + other.values,
                                 _add_tails(self.tail_exponent, other.tail_exponent))
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, RadialProfile):
            return self + (-other)
        return NotImplemented

    def __neg__(self):
        return RadialProfile(self.grid, -self.values, self.tail_exponent)

    def __mul__(self, other):
        if isinstance(other, RadialProfile):
            self._check(other)
            return RadialProfile(self.grid, self.values * other.values,
                                 _mul_tails(self.tail_exponent, other.tail_exponent))
        if np.isscalar(other):
            return RadialProfile(self.grid, self.values * other, self.tail_exponent)
        return NotImplemented

    __rmul__ = __mul__


def weighted_sup_norm(p: RadialProfile, rho: float) -> float:
    """sup_r r^rho |p(r)|: grid maximum, extended by the power-law tail model.

    Returns ``inf`` when the tail decays more slowly than r^{-rho}.
    """
    if p.is_zero():
        return 0.0
    w = p.grid.nodes**rho * np.abs(p.values)
    if p.tail_exponent is not None and p.tail_exponent < rho - 1e-12 and w[-1] > 0:
        return float("inf")
    return float(np.max(w))


# --------------------------------------------------------------------------
# measures


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Density on a ZetaGrid plus integer atoms, all with radial profiles."""

    grid: RadialGrid
    atoms: dict = field(default_factory=dict)
    zeta: ZetaGrid | None = None
    density: np.ndarray | None = None
    density_tail: float | None = None
    rho: float | None = None

    def __post_init__(self):
        atoms = {}
        for m, prof in self.atoms.items():
            if int(m) != m:
                raise ValueError("atoms live at integer frequencies only")
            if prof.grid != self.grid:
                raise GridMismatchError("atom profile on a foreign grid")
            atoms[int(m)] = prof
        object.__setattr__(self, "atoms", dict(sorted(atoms.items())))
        if self.density is not None:
            if self.zeta is None:
                raise ValueError("density needs a zeta grid")
            d = np.asarray(self.density, dtype=complex)
            if d.shape != (self.zeta.n, self.grid.n):
                raise ValueError(f"density shape {d.shape} != {(self.zeta.n, self.grid.n)}")
            d.flags.writeable = False
            object.__setattr__(self, "density", d)

    # construction helpers
    @classmethod
    def zero(cls, grid: RadialGrid) -> "SpectralMeasure":
        return cls(grid)

    @classmethod
    def atom(cls, m: int, profile: RadialProfile) -> "SpectralMeasure":
        return cls(profile.grid, {m: profile})

    @classmethod
    def cosine(cls, m: int, profile: RadialProfile) -> "SpectralMeasure":
        """Real field profile(r) cos(m z) as the conjugate pair of atoms at +-m."""
        if m == 0:
            return cls.atom(0, profile)
        return cls(profile.grid, {m: 0.5 * profile, -m: 0.5 * profile.conj()})

    @property
    def has_density(self) -> bool:
        return self.density is not None and bool(np.any(self.density))

    def is_zero(self) -> bool:
        return not self.has_density and all(p.is_zero() for p in self.atoms.values())

    def density_profile(self, k: int) -> RadialProfile:
        return RadialProfile(self.grid, self.density[k], self.density_tail)

    def atom_profile(self, m: int) -> RadialProfile:
        return self.atoms.get(m) or RadialProfile.zeros(self.grid)

    def _compatible(self, other):
        if other.grid != self.grid:
            raise GridMismatchError("measures live on different radial grids")
        if self.has_density and other.has_density and self.zeta != other.zeta:
            raise GridMismatchError("measures live on different zeta grids")

    def _zeta_of(self, other):
        return self.zeta if self.zeta is not None else other.zeta

    def __add__(self, other):
        if not isinstance(other, SpectralMeasure):
            return NotImplemented
        self._compatible(other)
        atoms = dict(self.atoms)
        for m, p in other.atoms.items():
            atoms[m] = atoms[m] + p if m in atoms else p
        zeta, dens, tail = self.zeta, self.density, self.density_tail
        if other.density is not None:
            zeta = other.zeta if zeta is None else zeta
            if dens is None:
                dens, tail = other.density, other.density_tail
            else:
                dens = dens + other.density
                tail = _add_tails(tail, other.density_tail)
        return SpectralMeasure(self.grid, atoms, zeta, dens, tail, self.rho)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        atoms = {m: p * c for m, p in self.atoms.items()}
        dens = None if self.density is None else self.density * c
        return SpectralMeasure(self.grid, atoms, self.zeta, dens, self.density_tail, self.rho)

    __rmul__ = __mul__

    def map_profiles(self, fn, tail_fn=None) -> "SpectralMeasure":
        """Apply a profile -> profile map to every atom and density row."""
        atoms = {m: fn(p) for m, p in self.atoms.items()}
        dens, tail = self.density, self.density_tail
        if self.density is not None:
            rows = [fn(self.density_profile(k)) for k in range(self.zeta.n)]
            dens = np.array([p.values for p in rows])
            tail = rows[0].tail_exponent if rows else None
        return SpectralMeasure(self.grid, atoms, self.zeta, dens, tail, self.rho)

    def truncate(self, m_max: int):
        """Drop atoms with |m| > m_max. Returns (measure, dropped X-norm at rho=0)."""
        kept = {m: p for m, p in self.atoms.items() if abs(m) <= m_max}
        dropped = sum(weighted_sup_norm(p, 0.0) for m, p in self.atoms.items() if abs(m) > m_max)
        return SpectralMeasure(self.grid, kept, self.zeta, self.density, self.density_tail, self.rho), dropped

    def hermitian_defect(self) -> float:
        """Max deviation from atom(-m) = conj(atom(m)), density(-zeta) = conj(density(zeta))."""
        dev = 0.0
        for m, p in self.atoms.items():
            q = self.atoms.get(-m)
            qv = np.zeros(self.grid.n) if q is None else q.values
            dev = max(dev, float(np.max(np.abs(p.values - np.conj(qv)), initial=0.0)))
        if self.density is not None:
            dev = max(dev, float(np.max(np.abs(self.density - np.conj(self.density[::-1])))))
        return dev


def x_norm(mu: SpectralMeasure, rho: float | None = None) -> float:
    """||g||_{L^1(L^inf_rho)} + sum_m ||a_m||_{L^inf_rho} (trapezoid rule in zeta)."""
    if rho is None:
        rho = mu.rho if mu.rho is not None else 0.0
    if mu.is_zero():
        return 0.0
    total = sum(weighted_sup_norm(p, rho) for p in mu.atoms.values())
    if mu.has_density:
        r = mu.grid.nodes
        rows = np.max(r**rho * np.abs(mu.density), axis=1)
        if mu.density_tail is not None and mu.density_tail < rho - 1e-12 and np.any(mu.density[:, -1]):
            return float("inf")
        total += float(np.sum(mu.zeta.weights * rows))
    return float(total)


def _shift_density(h: np.ndarray, zeta: ZetaGrid, m: int) -> np.ndarray:
    """Rows of h(zeta - m) on the same grid, linear interpolation, zero outside."""
    s = m / zeta.spacing
    lo = int(np.floor(s))
    frac = s - lo
    out = np.zeros_like(h)

    def shifted(k):
        res = np.zeros_like(h)
        if k >= 0:
            if k < h.shape[0]:
                res[k:] = h[: h.shape[0] - k]
        else:
            if -k < h.shape[0]:
                res[:k] = h[-k:]
        return res

    out += (1.0 - frac) * shifted(lo)
    if frac > 0:
        out += frac * shifted(lo + 1)
    return out


def convolve(mu1: SpectralMeasure, mu2: SpectralMeasure) -> SpectralMeasure:
    """Measure convolution; its Fourier image is the pointwise product of fields."""
    mu1._compatible(mu2)
    grid = mu1.grid
    if mu1.is_zero() or mu2.is_zero():
        return SpectralMeasure(grid, {}, mu1._zeta_of(mu2))

    atoms: dict[int, RadialProfile] = {}
    for k, a in mu1.atoms.items():
        for l, b in mu2.atoms.items():
            m = k + l
            atoms[m] = atoms[m] + a * b if m in atoms else a * b

    zeta = mu1._zeta_of(mu2)
    dens = None
    tail = None
    if mu1.has_density and mu2.has_density:
        w = zeta.weights[:, None]
        full = fftconvolve(w * mu1.density, mu2.density, axes=0)
        off = (zeta.n - 1) // 2  # both grids start at -z_max
        dens = full[off : off + zeta.n]
        tail = _mul_tails(mu1.density_tail, mu2.density_tail)
    for atom_side, dens_side in ((mu1, mu2), (mu2, mu1)):
        if not dens_side.has_density:
            continue
        for m, a in atom_side.atoms.items():
            part = a.values[None, :] * _shift_density(dens_side.density, zeta, m)
            dens = part if dens is None else dens + part
            tail = _add_tails(tail, _mul_tails(a.tail_exponent, dens_side.density_tail))
    return SpectralMeasure(grid, atoms, zeta, dens, tail)


def z_derivative(mu: SpectralMeasure) -> SpectralMeasure:
    """Fourier multiplier i*zeta (atoms: i*m), i.e. d/dz of the physical field."""
    atoms = {m: p * (1j * m) for m, p in mu.atoms.items()}
    dens = None if mu.density is None else mu.density * (1j * mu.zeta.nodes[:, None])
    return SpectralMeasure(mu.grid, atoms, mu.zeta, dens, mu.density_tail, mu.rho)


def reconstruct(mu: SpectralMeasure, r, z):
    """Physical field at radii ``r`` and heights ``z``; result shape (len(r), len(z)).

    Scalars in, scalar out.
    """
    scalar = np.ndim(r) == 0 and np.ndim(z) == 0
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    start, w = mu.grid.locate(r_arr)
    idx = start[:, None] + np.arange(4)
    out = np.zeros((r_arr.size, z_arr.size), dtype=complex)
    for m, p in mu.atoms.items():
        vals = np.sum(w * p.values[idx], axis=-1)
        out += vals[:, None] * np.exp(1j * m * z_arr)[None, :]
    if mu.has_density:
        rows = np.sum(w[None] * mu.density[:, idx], axis=-1)  # (nz, nr_probe)
        phase = np.exp(1j * np.outer(mu.zeta.nodes, z_arr)) * mu.zeta.weights[:, None]
        out += rows.T @ phase
    return out[0, 0] if scalar else out


def project_atoms(samples: np.ndarray, grid: RadialGrid, m_max: int, tail_exponent=None) -> SpectralMeasure:
    """Atoms |m| <= m_max of a 2 pi-periodic field sampled at z_j = 2 pi j / n_z.

    ``samples`` has shape (grid.n, n_z).
    """
    samples = np.asarray(samples)
    nz = samples.shape[1]
    if nz < 2 * m_max + 1:
        raise ValueError("too few z samples for the requested modes")
    coef = np.fft.fft(samples, axis=1) / nz
    atoms = {}
    for m in range(-m_max, m_max + 1):
        c = coef[:, m % nz]
        if np.any(np.abs(c) > 1e-15 * max(1.0, np.max(np.abs(coef)))):
            atoms[m] = RadialProfile(grid, c, tail_exponent)
    return SpectralMeasure(grid, atoms)


# --------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True, eq=False)
class AxiVectorField:
    """Axisymmetric field comp_r e_r + comp_theta e_theta + comp_z e_z."""

    comp_r: SpectralMeasure
    comp_theta: SpectralMeasure
    comp_z: SpectralMeasure

    def __post_init__(self):
        g = self.comp_r.grid
        if self.comp_theta.grid != g or self.comp_z.grid != g:
            raise GridMismatchError("components on different radial grids")

    @classmethod
    def zero(cls, grid: RadialGrid) -> "AxiVectorField":
        z = SpectralMeasure.zero(grid)
        return cls(z, z, z)

    @property
    def grid(self) -> RadialGrid:
        return self.comp_r.grid

    @property
    def components(self):
        return (self.comp_r, self.comp_theta, self.comp_z)

    def __add__(self, other):
        return AxiVectorField(*(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return AxiVectorField(*(a - b for a, b in zip(self.components, other.components)))

    def __mul__(self, c):
        return AxiVectorField(*(a * c for a in self.components))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def mode_keys(self):
        """Sorted union of atom indices over the three components."""
        return sorted(set().union(*(c.atoms.keys() for c in self.components)))

    def zeta_grid(self):
        for c in self.components:
            if c.has_density:
                return c.zeta
        return None

    def truncate(self, m_max: int):
        parts = [c.truncate(m_max) for c in self.components]
        return AxiVectorField(*(p[0] for p in parts)), sum(p[1] for p in parts)


def fx_norm(v: AxiVectorField, rho: float) -> float:
    """Sum of the component X-norms."""
    return sum(x_norm(c, rho) for c in v.components)


# --------------------------------------------------------------------------
# dump formats


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def write_profile_csv(p: RadialProfile, path) -> None:
    lines = ["r,re,im"]
    for r, v in zip(p.grid.nodes, p.values):
        lines.append(f"{_fmt(r)},{_fmt(v.real)},{_fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_profile_csv(path, grid: RadialGrid, tail_exponent=None) -> RadialProfile:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] != grid.n or not np.allclose(data[:, 0], grid.nodes, rtol=1e-14):
        raise GridMismatchError(f"{path}: radial nodes do not match the grid")
    return RadialProfile(grid, data[:, 1] + 1j * data[:, 2], tail_exponent)


def write_measure(mu: SpectralMeasure, directory, name: str) -> Path:
    """Write one CSV per atom / zeta node plus a JSON manifest; returns the manifest path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    manifest = {
        "grid": {"n": mu.grid.n, "r_max": mu.grid.r_max},
        "atoms": [],
        "zeta_grid": None,
        "density": [],
        "density_tail": mu.density_tail,
    }
    for m, p in mu.atoms.items():
        fname = f"{name}_atom{m:+d}.csv"
        write_profile_csv(p, d / fname)
        manifest["atoms"].append({"m": m, "file": fname, "tail_exponent": p.tail_exponent})
    if mu.has_density:
        manifest["zeta_grid"] = {"z_max": mu.zeta.z_max, "n": mu.zeta.n}
        for k, zeta in enumerate(mu.zeta.nodes):
            if not np.any(mu.density[k]):
                continue
            fname = f"{name}_zeta{k:04d}.csv"
            write_profile_csv(mu.density_profile(k), d / fname)
            manifest["density"].append({"index": k, "zeta": float(zeta), "file": fname})
    path = d / f"{name}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_measure(path) -> SpectralMeasure:
    path = Path(path)
    man = json.loads(path.read_text())
    grid = RadialGrid(**man["grid"])
    atoms = {
        a["m"]: read_profile_csv(path.parent / a["file"], grid, a["tail_exponent"]) for a in man["atoms"]
    }
    zeta = dens = None
    if man["zeta_grid"]:
        zeta = ZetaGrid(**man["zeta_grid"])
        dens = np.zeros((zeta.n, grid.n), dtype=complex)
        for e in man["density"]:
            dens[e["index"]] = read_profile_csv(path.parent / e["file"], grid).values
    return SpectralMeasure(grid, atoms, zeta, dens, man["density_tail"])

