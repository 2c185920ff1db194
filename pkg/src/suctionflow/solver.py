"""Mode-wise linear solves, Biot-Savart assembly and the Picard iteration.

A force field is decomposed into *rows*: one per integer atom m (zeta = m)
and, when a density is present, one per zeta-grid node. Every row is solved
independently in three steps,

    swirl       v_theta  from f_theta
    vorticity   omega    from (f_r, f_z) and, for alpha != 0, 2 alpha/r^2 * i zeta v_theta
    stream      psi      from omega, then v_r = -i zeta psi, v_z = psi/r + psi'

where the free homogeneous multiple in the vorticity solve is fixed by the
vanishing of the stream boundary functional d[omega], i.e. no slip for v_z.
The same discrete quadrature functional is used for the constraint and for the
stream solve, so d[omega] vanishes up to rounding.

Bessel factors enter through their scaled forms: I(kr) B = ive(kr) B_s and
K(kr) A = kve(kr) A_s with the scaled running integrals of :mod:`quadrature`.
"""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConfigError, ConvergenceError, DivergenceError, PreconditionError
from .greens import ZETA_SWITCH
from .quadrature import cumulative_left, cumulative_right, power_tails
from .spaces import (
    AxiVectorField,
    RadialGrid,
    RadialProfile,
    SpectralMeasure,
    ZetaGrid,
    convolve,
    fx_norm,
    x_norm,
    z_derivative,
)
from .specfun import bessel_derivatives

log = logging.getLogger(__name__)

WORKERS_ENV = "SUCTIONFLOW_WORKERS"


# --------------------------------------------------------------------------
# configuration


@dataclass
class PicardConfig:
    max_iter: int = 60
    tol_fx: float = 1e-12
    relax: float = 1.0


@dataclass
class Tolerances:
    boundary: float = 1e-8
    d_value: float = 1e-8
    residual: float = 1e-6


@dataclass
class FlowConfig:
    gamma: float = 3.0
    alpha: float = 0.0
    rho: float = 2.5
    n_r: int = 1024
    r_max: float = 1.0e3
    zeta_max: float = 16.0
    n_zeta: int = 257
    m_max: int = 8
    picard: PicardConfig = field(default_factory=PicardConfig)
    smallness: float = 1e-2
    alpha_small: float = 0.1
    tol: Tolerances = field(default_factory=Tolerances)
    workers: int | None = None

    def __post_init__(self):
        if not self.gamma > 2:
            raise ConfigError("gamma must exceed 2")
        if not 2 < self.rho < 3:
            raise ConfigError("rho must satisfy 2 < rho < 3")
        if not self.rho <= self.gamma:
            raise ConfigError(f"rho <= gamma violated (rho={self.rho}, gamma={self.gamma})")
        if not 0 < self.picard.relax <= 1:
            raise ConfigError("picard.relax must lie in (0, 1]")
        if self.m_max < 0:
            raise ConfigError("m_max must be >= 0")
        if abs(self.alpha) > self.alpha_small:
            warnings.warn(f"|alpha| = {abs(self.alpha)} exceeds the small-rotation threshold {self.alpha_small}")

    @property
    def radial_grid(self) -> RadialGrid:
        return RadialGrid(self.n_r, self.r_max)

    @property
    def zeta_grid(self) -> ZetaGrid:
        return ZetaGrid(self.zeta_max, self.n_zeta)


# --------------------------------------------------------------------------
# row kernels (all arrays are (rows, nodes); tails use nan for "no tail")


def _ive(nu, x):
    return special.ive(nu, x)


def _kve(nu, x):
    return special.kve(nu, x)


def _slope(nu, x):
    """Vectorized :func:`kernel_log_slope`."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _, dk = bessel_derivatives(nu, x, scaled=True)
    return -x * (1.0 + dk / _kve(nu, x))


def _nanmin(*xs):
    """Elementwise min treating nan as +inf; all-nan stays nan."""
    arr = np.stack([np.broadcast_to(np.asarray(x, dtype=float), np.shape(xs[0])) for x in xs])
    arr = np.where(np.isnan(arr), np.inf, arr)
    out = arr.min(axis=0)
    return np.where(np.isinf(out), np.nan, out)


def _right(q, grid, rates, betas):
    """Scaled right integral with the power-law tail closure."""
    tail = power_tails(q[:, -1], grid.r_max, rates, betas)
    return cumulative_right(q, grid, rates, tail)


def _stream_rows(h, zetas, tails, grid):
    """psi, psi', d[h] and the tail exponent of psi for each row of h."""
    r = grid.nodes
    R = grid.r_max
    k = np.abs(zetas)
    zero = k < ZETA_SWITCH
    psi = np.zeros_like(h, dtype=complex)
    dpsi = np.zeros_like(psi)
    d = np.zeros(len(k), dtype=complex)
    out_tail = np.array(tails, dtype=float)

    nz = ~zero
    if nz.any():
        kk = k[nz][:, None]
        kr = kk * r
        H = h[nz]
        Kr, Ir = _kve(1, kr), _ive(1, kr)
        A = cumulative_left(Ir * r * H, grid, k[nz])
        beta = tails[nz] - 1 + _slope(1.0, k[nz] * R)
        B = _right(Kr * r * H, grid, k[nz], beta)
        Ds = (_ive(1, k[nz]) / _kve(1, k[nz]) * B[:, 0])[:, None]
        ek = np.exp(-kk * (r - 1))
        dI, dK = bessel_derivatives(1.0, kr, scaled=True)
        psi[nz] = Kr * A + Ir * B - Ds * Kr * ek
        dpsi[nz] = kk * (dK * (A - Ds * ek) + dI * B)
        d[nz] = Ds[:, 0] * np.exp(k[nz])

    if zero.any():
        H = h[zero]
        A = cumulative_left(r**2 * H, grid, np.zeros(zero.sum()))
        B = _right(H, grid, np.zeros(zero.sum()), tails[zero])
        dd = 0.5 * B[:, :1]
        psi[zero] = 0.5 * (A / r + r * B) - dd / r
        dpsi[zero] = dd / r**2 - 0.5 * A / r**2 + 0.5 * B
        d[zero] = dd[:, 0]
        t = np.where(np.isnan(tails[zero]), np.inf, tails[zero])
        out_tail[zero] = np.minimum(1.0, t - 2.0)
    return psi, dpsi, d, out_tail


def _swirl_rows(f, zetas, tails, gamma, grid):
    r = grid.nodes
    R = grid.r_max
    k = np.abs(zetas)
    zero = k < ZETA_SWITCH
    nu = abs(gamma / 2 - 1)
    ell = gamma / 2 + 1
    v = np.zeros_like(f, dtype=complex)
    dv = np.zeros_like(v)
    out_tail = np.array(tails, dtype=float)

    nz = ~zero
    if nz.any():
        kk = k[nz][:, None]
        kr = kk * r
        F = f[nz] * r**ell
        Kr, Ir = _kve(nu, kr), _ive(nu, kr)
        A = cumulative_left(Ir * F, grid, k[nz])
        beta = tails[nz] - ell + _slope(nu, k[nz] * R)
        B = _right(Kr * F, grid, k[nz], beta)
        Ds = (_ive(nu, k[nz]) / _kve(nu, k[nz]) * B[:, 0])[:, None]
        ek = np.exp(-kk * (r - 1))
        w = r ** (-gamma / 2)
        dI, dK = bessel_derivatives(nu, kr, scaled=True)
        v[nz] = w * (Kr * A + Ir * B - Ds * Kr * ek)
        dv[nz] = -0.5 * gamma * v[nz] / r + w * kk * (dK * (A - Ds * ek) + dI * B)

    if zero.any():
        F = f[zero]
        n0 = zero.sum()
        A = cumulative_left(r**gamma * F, grid, np.zeros(n0))
        B = _right(r**2 * F, grid, np.zeros(n0), tails[zero] - 2)
        D = B[:, :1]
        v[zero] = (r ** (1 - gamma) * (A - D) + B / r) / (gamma - 2)
        dv[zero] = ((1 - gamma) * r ** (-gamma) * (A - D) - B / r**2) / (gamma - 2)
        t = np.where(np.isnan(tails[zero]), np.inf, tails[zero])
        out_tail[zero] = np.minimum(gamma - 1, t - 2)
    return v, dv, out_tail


def _vorticity_rows(g_r, g_z, e, zetas, tails, gamma, grid):
    """omega, its tail exponent and the homogeneous coefficient c for each row.

    ``tails`` is a (3, rows) array for (g_r, g_z, e).
    """
    r = grid.nodes
    R = grid.r_max
    k = np.abs(zetas)
    zero = k < ZETA_SWITCH
    nu = gamma / 2 + 1
    tr, tz, te = tails
    omega = np.zeros_like(g_r, dtype=complex)
    out_tail = np.full(len(k), np.nan)
    c = np.zeros(len(k), dtype=complex)

    nz = ~zero
    if nz.any():
        kz = k[nz]
        kk = kz[:, None]
        zs = zetas[nz][:, None]
        kr = kk * r
        w = r**nu
        Iv, Iv1 = _ive(nu, kr), _ive(nu - 1, kr)
        Kv, Kv1 = _kve(nu, kr), _kve(nu - 1, kr)
        Gr, Gz, E = g_r[nz], g_z[nz], e[nz]
        M = w * (1j * zs * Iv * Gr + kk * Iv1 * Gz + Iv * E)
        parts = [w * 1j * zs * Kv * Gr, -w * kk * Kv1 * Gz, w * Kv * E]
        betas = [
            tr[nz] - nu + _slope(nu, kz * R),
            tz[nz] - nu + _slope(nu - 1, kz * R),
            te[nz] - nu + _slope(nu, kz * R),
        ]
        tail = sum(power_tails(p[:, -1], R, kz, b) for p, b in zip(parts, betas))
        N = parts[0] + parts[1] + parts[2]
        A = cumulative_left(M, grid, kz)
        B = cumulative_right(N, grid, kz, tail)
        wr = r ** (-gamma / 2)
        phi = wr * (Kv * A + Iv * B)
        s4 = wr * Kv * np.exp(-kk * (r - 1))
        tphi = _nanmin(tr[nz], tz[nz] + 1, te[nz])
        # boundary functional of the stream solve, applied to phi and to the shape
        K1 = r * _kve(1, kr)
        beta = tphi - 1 + _slope(1.0, kz * R)
        J = _right(np.concatenate([K1 * phi, K1 * s4]), grid, np.concatenate([kz, kz]),
                   np.concatenate([beta, beta]))[:, 0]
        n = len(kz)
        cs = -J[:n] / J[n:]
        omega[nz] = cs[:, None] * s4 + phi
        out_tail[nz] = tphi
        c[nz] = cs * np.exp(kz)

    if zero.any():
        n0 = zero.sum()
        Gz, E = g_z[zero], e[zero]
        A = cumulative_left(r ** (gamma + 1) * Gz + r ** (gamma + 2) * E / (gamma + 2), grid, np.zeros(n0))
        B = _right(E / (gamma + 2), grid, np.zeros(n0), te[zero])
        phi = r ** (-gamma - 1) * A + r * B
        s4 = np.broadcast_to(r ** (-gamma - 1), phi.shape)
        tz0 = np.where(np.isnan(tz[zero]), np.inf, tz[zero])
        te0 = np.where(np.isnan(te[zero]), np.inf, te[zero])
        tphi = np.minimum(gamma + 1, np.minimum(tz0 - 1, te0 - 2))
        J = _right(np.concatenate([phi, s4]), grid, np.zeros(2 * n0), np.concatenate([tphi, tphi]))[:, 0]
        c0 = -J[:n0] / J[n0:]
        omega[zero] = c0[:, None] * s4 + phi
        out_tail[zero] = tphi
        c[zero] = c0
    return omega, out_tail, c


# --------------------------------------------------------------------------
# single-mode API


def _tail(p: RadialProfile | None):
    return np.nan if p is None or p.tail_exponent is None else float(p.tail_exponent)


def _opt(t):
    return None if np.isnan(t) else float(t)


def solve_stream_mode(h: RadialProfile, zeta: float):
    """Streamfunction mode vanishing at r=1. Returns (psi, dpsi, d[h])."""
    psi, dpsi, d, t = _stream_rows(h.values[None], np.array([float(zeta)]), np.array([_tail(h)]), h.grid)
    return (RadialProfile(h.grid, psi[0], _opt(t[0])),
            RadialProfile(h.grid, dpsi[0], _opt(t[0] + 1)), complex(d[0]))


def biot_savart_mode(psi: RadialProfile, dpsi: RadialProfile, zeta: float):
    """(v_r, v_z) = (-i zeta psi, psi/r + psi')."""
    if zeta == 0:
        v_r = RadialProfile.zeros(psi.grid)
    else:
        v_r = psi * (-1j * zeta)
    v_z = psi.times_power(-1.0) + dpsi
    return v_r, v_z


def solve_vorticity_mode(g_r: RadialProfile, g_z: RadialProfile, zeta: float, gamma: float,
                         extra_source: RadialProfile | None = None) -> RadialProfile:
    """Vorticity mode with rot-force i zeta g_r - g_z' (+ extra_source) and d[omega] = 0."""
    grid = g_r.grid
    e = RadialProfile.zeros(grid) if extra_source is None else extra_source
    tails = np.array([[_tail(g_r)], [_tail(g_z)], [_tail(extra_source)]])
    om, t, _ = _vorticity_rows(g_r.values[None], g_z.values[None], e.values[None],
                               np.array([float(zeta)]), tails, gamma, grid)
    return RadialProfile(grid, om[0], _opt(t[0]))


def solve_swirl_mode(f_theta: RadialProfile, zeta: float, gamma: float) -> RadialProfile:
    v, _, t = _swirl_rows(f_theta.values[None], np.array([float(zeta)]), np.array([_tail(f_theta)]),
                          gamma, f_theta.grid)
    return RadialProfile(f_theta.grid, v[0], _opt(t[0]))


@dataclass
class ModeSolution:
    label: str
    zeta: float
    is_atom: bool
    psi: RadialProfile
    dpsi: RadialProfile
    omega: RadialProfile
    v_r: RadialProfile
    v_theta: RadialProfile
    v_z: RadialProfile
    d_omega: complex
    c_value: complex

    @property
    def defects(self) -> dict:
        return {
            "psi_at_1": abs(self.psi.values[0]),
            "v_theta_at_1": abs(self.v_theta.values[0]),
            "v_z_at_1": abs(self.v_z.values[0]),
            "d_omega": abs(self.d_omega),
        }


# --------------------------------------------------------------------------
# full linear solve


def _rows_solve(fr, ft, fz, zetas, tails, gamma, alpha, grid):
    """All three solves for a block of rows; tails is (3, rows) for (f_r, f_theta, f_z)."""
    vt, _, t_vt = _swirl_rows(ft, zetas, tails[1], gamma, grid)
    r = grid.nodes
    if alpha != 0:
        e = (2 * alpha / r**2) * 1j * zetas[:, None] * vt
        # the source vanishes identically on zeta = 0 rows, so it carries no tail there
        te = np.where(zetas == 0, np.nan, t_vt + 2)
    else:
        e = np.zeros_like(vt)
        te = np.full(len(zetas), np.nan)
    om, t_om, c = _vorticity_rows(fr, fz, e, zetas, np.stack([tails[0], tails[2], te]), gamma, grid)
    psi, dpsi, d, t_psi = _stream_rows(om, zetas, t_om, grid)
    return dict(v_theta=vt, t_vt=t_vt, omega=om, t_om=t_om, c=c, psi=psi, dpsi=dpsi, d=d, t_psi=t_psi)


def _worker_count(cfg: FlowConfig) -> int:
    n = cfg.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        n = min(n or int(env), int(env))
    return max(1, n or 1)


def _gather_rows(f: AxiVectorField):
    """Stack the force into row arrays: atoms first (sorted), then density nodes."""
    grid = f.grid
    keys = f.mode_keys()
    zg = f.zeta_grid()
    labels, zetas, atom_flags = [], [], []
    comps = [[], [], []]
    tails = [[], [], []]
    for m in keys:
        labels.append(f"m={m:+d}")
        zetas.append(float(m))
        atom_flags.append(True)
        for j, c in enumerate(f.components):
            p = c.atoms.get(m)
            comps[j].append(np.zeros(grid.n, complex) if p is None else p.values)
            tails[j].append(_tail(p))
    if zg is not None:
        for idx, zeta in enumerate(zg.nodes):
            labels.append(f"zeta[{idx}]={zeta:+.6g}")
            zetas.append(float(zeta))
            atom_flags.append(False)
            for j, c in enumerate(f.components):
                if c.has_density:
                    if c.zeta != zg:
                        raise PreconditionError("force components use different zeta grids")
                    comps[j].append(c.density[idx])
                    tails[j].append(np.nan if c.density_tail is None else c.density_tail)
                else:
                    comps[j].append(np.zeros(grid.n, complex))
                    tails[j].append(np.nan)
    arrays = [np.array(c, dtype=complex).reshape(len(labels), grid.n) for c in comps]
    return labels, np.array(zetas), np.array(atom_flags, dtype=bool), arrays, np.array(tails, dtype=float), zg


def solve_lp_modes(f: AxiVectorField, cfg: FlowConfig):
    """Linear solve; returns (velocity field, list of ModeSolution)."""
    grid = f.grid
    if f.is_zero():
        return AxiVectorField.zero(grid), []
    norm = sum(x_norm(c, cfg.rho + 1) for c in f.components)
    if not np.isfinite(norm):
        raise PreconditionError(f"force is not in the decay class r^-{cfg.rho + 1}")
    labels, zetas, atom_flags, (fr, ft, fz), tails, zg = _gather_rows(f)
    n = len(zetas)

    def run(sl):
        return _rows_solve(fr[sl], ft[sl], fz[sl], zetas[sl], tails[:, sl], cfg.gamma, cfg.alpha, grid)

    workers = min(_worker_count(cfg), n)
    bounds = np.linspace(0, n, workers + 1).astype(int)
    slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    try:
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                parts = list(ex.map(run, slices))
        else:
            parts = [run(slices[0])]
    except DivergenceError:
        bad = []
        for i in range(n):
            try:
                run(slice(i, i + 1))
            except DivergenceError as err:
                bad.append(f"{labels[i]}: {err}")
        raise DivergenceError("mode solves failed: " + "; ".join(bad)) from None
    res = {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}

    modes = []
    for i in range(n):
        z = zetas[i]
        psi = RadialProfile(grid, res["psi"][i], _opt(res["t_psi"][i]))
        dpsi = RadialProfile(grid, res["dpsi"][i], _opt(res["t_psi"][i] + 1))
        v_r, v_z = biot_savart_mode(psi, dpsi, z)
        modes.append(ModeSolution(
            label=labels[i], zeta=z, is_atom=bool(atom_flags[i]), psi=psi, dpsi=dpsi,
            omega=RadialProfile(grid, res["omega"][i], _opt(res["t_om"][i])),
            v_r=v_r, v_theta=RadialProfile(grid, res["v_theta"][i], _opt(res["t_vt"][i])), v_z=v_z,
            d_omega=complex(res["d"][i]), c_value=complex(res["c"][i]),
        ))

    worst = max(max(m.defects.values()) for m in modes)
    if worst > cfg.tol.boundary:
        log.warning("largest boundary defect %.3e exceeds tolerance %.1e", worst, cfg.tol.boundary)
    return _assemble(modes, grid, zg), modes


def _assemble(modes, grid, zg):
    out = []
    for name in ("v_r", "v_theta", "v_z"):
        atoms = {int(m.zeta): getattr(m, name) for m in modes if m.is_atom}
        dens_rows = [getattr(m, name) for m in modes if not m.is_atom]
        dens = tail = None
        if dens_rows:
            dens = np.array([p.values for p in dens_rows])
            ts = [p.tail_exponent for p in dens_rows if p.tail_exponent is not None]
            tail = min(ts) if ts else None
        out.append(SpectralMeasure(grid, atoms, zg, dens, tail))
    return AxiVectorField(*out)


def solve_lp(f: AxiVectorField, cfg: FlowConfig) -> AxiVectorField:
    return solve_lp_modes(f, cfg)[0]


# --------------------------------------------------------------------------
# nonlinear problem


def radial_derivative(mu: SpectralMeasure, order: int = 4) -> SpectralMeasure:
    return mu.map_profiles(lambda p: p.derivative(order))


def _over_r(mu: SpectralMeasure) -> SpectralMeasure:
    return mu.map_profiles(lambda p: p.times_power(-1.0))


def nonlinear_force(v: AxiVectorField) -> AxiVectorField:
    """Convective force -(v.grad)v with the curvature terms of cylindrical coordinates."""
    vr, vt, vz = v.components

    def advect(u):
        return convolve(vr, radial_derivative(u)) + convolve(vz, z_derivative(u))

    n_r = _over_r(convolve(vt, vt)) - advect(vr)
    n_t = -advect(vt) - _over_r(convolve(vr, vt))
    n_z = -advect(vz)
    return AxiVectorField(n_r, n_t, n_z)


@dataclass
class NonlinearSolution:
    v: AxiVectorField
    history: list
    converged: bool
    truncation: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def ratios(self) -> list:
        h = self.history
        return [h[i + 1] / h[i] for i in range(len(h) - 1) if h[i] > 0]


def picard_solve(f: AxiVectorField, cfg: FlowConfig, v0: AxiVectorField | None = None) -> NonlinearSolution:
    """Fixed point of v = solve_lp(N(v) + f), starting from v0 (default 0)."""
    fnorm = fx_norm(f, cfg.rho + 1)
    if fnorm > cfg.smallness:
        warnings.warn(f"force norm {fnorm:.3e} exceeds the smallness threshold {cfg.smallness:.1e}")
    v = AxiVectorField.zero(f.grid) if v0 is None else v0
    history, trunc = [], []
    pc = cfg.picard
    for _ in range(pc.max_iter):
        nl, dropped = nonlinear_force(v).truncate(cfg.m_max)
        trunc.append(dropped)
        v_new = solve_lp(nl + f, cfg)
        if pc.relax < 1:
            v_new = v_new * pc.relax + v * (1 - pc.relax)
        delta = fx_norm(v_new - v, cfg.rho - 1)
        history.append(delta)
        v = v_new
        if delta <= pc.tol_fx:
            return NonlinearSolution(v, history, True, trunc)
        if not np.isfinite(delta):
            break
    raise ConvergenceError(f"Picard iteration did not reach {pc.tol_fx:g} in {len(history)} steps", history)
