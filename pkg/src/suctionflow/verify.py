"""Independent checks: finite-difference mode oracle, PDE residuals, decay fits.

The oracle shares nothing with the Green's-function path: it discretizes each
mode ODE in t = log r with second-order central differences on a domain that
extends far beyond the solver grid, closes it with a Robin condition matching
the expected power-law decay and removes the leading error term by Richardson
extrapolation over two nested grids.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .errors import PreconditionError
from .spaces import AxiVectorField, RadialGrid, RadialProfile, SpectralMeasure, fx_norm, reconstruct, z_derivative
from .solver import FlowConfig, nonlinear_force, radial_derivative

OPERATORS = ("stream", "vorticity", "swirl")


@dataclass
class OracleProblem:
    """One mode ODE. ``rhs`` is a callable of r or a profile (extended by its tail).

    For ``vorticity`` the right-hand side is the rotational force itself; the
    free homogeneous multiple is fixed by the no-slip rule psi'(1) = 0 of the
    associated streamfunction.
    """

    operator: str
    zeta: float
    gamma: float
    rhs: Callable | RadialProfile
    rhs_tail: float | None = None

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise ValueError(f"operator must be one of {OPERATORS}")
        if isinstance(self.rhs, RadialProfile) and self.rhs_tail is None:
            self.rhs_tail = self.rhs.tail_exponent

    def coefficients(self):
        """(a, b) of -u'' - (a/r) u' + (zeta^2 + b/r^2) u."""
        g = self.gamma
        return {"stream": (1.0, 1.0), "vorticity": (1 + g, 1 + g), "swirl": (1 + g, 1 - g)}[self.operator]

    def robin_exponent(self) -> float:
        q = np.inf if self.rhs_tail is None else self.rhs_tail
        k = abs(self.zeta)
        if k > 0:
            return q
        g = self.gamma
        return {"stream": min(1.0, q - 2), "vorticity": min(g + 1, q - 2), "swirl": min(g - 1, q - 2)}[self.operator]

    def rhs_at(self, r):
        if callable(self.rhs) and not isinstance(self.rhs, RadialProfile):
            return np.asarray(self.rhs(r), dtype=complex)
        p = self.rhs
        out = np.zeros(r.shape, dtype=complex)
        inside = r <= p.grid.r_max
        out[inside] = p(r[inside])
        if p.tail_exponent is not None:
            out[~inside] = p.values[-1] * (r[~inside] / p.grid.r_max) ** (-p.tail_exponent)
        return out


def _fd_solve(t, coef_a, c, rhs, p_robin, inner=0.0):
    """-u_tt + (1-a) u_t + c u = rhs on a uniform t grid, u(0) = inner, u_t + p u = 0 at the end."""
    n = t.size
    dt = t[1] - t[0]
    lo = -1 / dt**2 - (1 - coef_a) / (2 * dt)
    up = -1 / dt**2 + (1 - coef_a) / (2 * dt)
    m = n - 1  # unknowns u_1..u_{n-1}
    ab = np.zeros((3, m), dtype=complex)
    ab[0, 1:] = up
    ab[1, :] = 2 / dt**2 + c[1:]
    ab[2, :-1] = lo
    b = rhs[1:].astype(complex).copy()
    b[0] -= lo * inner
    # ghost node from the Robin condition
    ab[2, -2] = lo + up
    ab[1, -1] += -2 * dt * p_robin * up
    u = np.empty(n, dtype=complex)
    u[0] = inner
    u[1:] = solve_banded((1, 1), ab, b)
    return u


def _oracle_level(problem: OracleProblem, n: int, r_end: float):
    t = np.linspace(0.0, np.log(r_end), n)
    r = np.exp(t)
    a, bcoef = problem.coefficients()
    k2 = problem.zeta**2
    c = k2 * r**2 + bcoef
    rhs = r**2 * problem.rhs_at(r)
    p = problem.robin_exponent()
    if not np.isfinite(p):
        p = abs(problem.zeta) * r_end
    u = _fd_solve(t, a, c, rhs, p)
    if problem.operator != "vorticity":
        return t, u
    # homogeneous solution with u(1) = 1, and the no-slip combination
    uh = _fd_solve(t, a, c, np.zeros_like(rhs), problem.gamma + 1 if k2 == 0 else abs(problem.zeta) * r_end, 1.0)
    ps_stream = min(1.0, p - 2) if k2 == 0 else p
    ps_h = 1.0 if k2 == 0 else abs(problem.zeta) * r_end
    c_s = k2 * r**2 + 1.0
    psi = _fd_solve(t, 1.0, c_s, r**2 * u, ps_stream)
    psih = _fd_solve(t, 1.0, c_s, r**2 * uh, ps_h)
    dt = t[1] - t[0]

    def slope(v):
        return (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dt)

    coef = -slope(psi) / slope(psih)
    return t, u + coef * uh


def fd_oracle_mode(problem: OracleProblem, grid: RadialGrid | None = None, n: int = 16385,
                   r_end: float = 1e8, richardson: bool = True) -> RadialProfile:
    """Oracle solution sampled on ``grid`` (default solver grid)."""
    grid = grid or RadialGrid()
    if problem.rhs_tail is not None and problem.rhs_tail <= 3 - 1e-12 and problem.operator != "vorticity":
        raise PreconditionError("oracle expects rhs decaying faster than r^-3")
    t, u = _oracle_level(problem, n, r_end)
    if richardson:
        _, uf = _oracle_level(problem, 2 * n - 1, r_end)
        u = (4 * uf[::2] - u) / 3
    tg = np.log(grid.nodes)
    vals = CubicSpline(t, u.real)(tg) + 1j * CubicSpline(t, u.imag)(tg)
    vals[0] = u[0]
    return RadialProfile(grid, vals, None if not np.isfinite(problem.robin_exponent()) else problem.robin_exponent())


# --------------------------------------------------------------------------
# residuals


def probe_grid(n_r: int = 48, n_z: int = 64, r_lo: float = 1.05, r_hi: float = 50.0):
    return np.geomspace(r_lo, r_hi, n_r), 2 * np.pi * np.arange(n_z) / n_z


def _over_r(mu, k=1.0):
    return mu.map_profiles(lambda p: p.times_power(-k))


def _times_r(mu):
    return mu.map_profiles(lambda p: p.times_power(1.0))


RESIDUAL_FD_ORDER = 8


def residual_fields(v: AxiVectorField, f: AxiVectorField, gamma: float, alpha: float = 0.0,
                    nonlinear: bool = False, order: int = RESIDUAL_FD_ORDER) -> dict:
    """Mode-wise residual measures of the momentum equations and the divergence.

    Radial derivatives use ``order``-th order differences in log r; the rot
    residual nests four of them, hence the high default.
    """

    def d_r(mu):
        return radial_derivative(mu, order)

    def _laplacian(mu):
        dr = d_r(mu)
        return d_r(dr) + _over_r(dr) + z_derivative(z_derivative(mu))

    radial = d_r
    vr, vt, vz = v.components
    fr, ft, fz = f.components
    if nonlinear:
        nr, nt, nzc = nonlinear_force(v).components
        fr, ft, fz = fr + nr, ft + nt, fz + nzc
    res_t = -(_laplacian(vt) - _over_r(vt, 2)) - gamma * _over_r(radial(_times_r(vt)), 2) - ft
    res_r = -(_laplacian(vr) - _over_r(vr, 2)) - alpha * _over_r(radial(_times_r(vt)), 2) - fr
    res_z = (-_laplacian(vz) + gamma * _over_r(z_derivative(vr) - radial(vz))
             - alpha * _over_r(z_derivative(vt)) - fz)
    div = radial(vr) + _over_r(vr) + z_derivative(vz)
    rot = z_derivative(res_r) - radial(res_z)
    return {"theta": res_t, "r": res_r, "z": res_z, "divergence": div, "rot": rot}


def _max_on_probe(mu: SpectralMeasure, probe) -> float:
    if mu.is_zero():
        return 0.0
    return float(np.max(np.abs(reconstruct(mu, probe[0], probe[1]))))


def boundary_defects(v: AxiVectorField) -> dict:
    out = {}
    for name, mu in zip(("v_r", "v_theta", "v_z"), v.components):
        vals = [abs(p.values[0]) for p in mu.atoms.values()]
        if mu.has_density:
            vals.append(float(np.max(np.abs(mu.density[:, 0]))))
        out[name] = float(max(vals, default=0.0))
    return out


def fit_decay_exponent(p, fit_window=(50.0, 500.0), grid: RadialGrid | None = None):
    """Least-squares slope of log|p| against log r on the window; returns (exponent, r^2)."""
    if isinstance(p, RadialProfile):
        r, vals = p.grid.nodes, p.values
    else:
        grid = grid or RadialGrid()
        r, vals = grid.nodes, np.asarray(p)
    lo, hi = fit_window
    sel = (r >= lo) & (r <= hi)
    if hi <= lo or sel.sum() < 3:
        raise ValueError(f"degenerate fit window {fit_window}")
    y = np.abs(vals[sel])
    if np.any(y == 0):
        raise ValueError("profile vanishes inside the fit window")
    x, y = np.log(r[sel]), np.log(y)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(-slope), float(r2)


def envelope(mu: SpectralMeasure) -> RadialProfile:
    """sum_m |a_m(r)| + int |h(r, zeta)| d zeta, a radial majorant of the field."""
    vals = np.zeros(mu.grid.n)
    for p in mu.atoms.values():
        vals += np.abs(p.values)
    if mu.has_density:
        vals += mu.zeta.weights @ np.abs(mu.density)
    return RadialProfile(mu.grid, vals)


def check_lp_estimate(v: AxiVectorField, f: AxiVectorField, rho: float) -> float:
    den = fx_norm(f, rho + 1)
    if den == 0:
        raise ZeroDivisionError("force has zero norm")
    return fx_norm(v, rho - 1) / den


@dataclass
class DiagnosticsReport:
    residuals: dict
    boundary: dict
    decay: dict = field(default_factory=dict)
    lp_ratio: float | None = None
    picard_history: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    passed: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=float)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def residual_report(v: AxiVectorField, f: AxiVectorField, cfg: FlowConfig, probe=None,
                    nonlinear: bool = False, history=None, fit_window=(50.0, 500.0)) -> DiagnosticsReport:
    probe = probe or probe_grid()
    r_probe = np.asarray(probe[0])
    if r_probe.min() < 1 or r_probe.max() > v.grid.r_max:
        raise PreconditionError("probe radii outside [1, R_max]")
    fields = residual_fields(v, f, cfg.gamma, cfg.alpha, nonlinear)
    res = {k: _max_on_probe(mu, probe) for k, mu in fields.items()}
    bd = boundary_defects(v)
    decay = {}
    for name, mu in zip(("v_r", "v_theta", "v_z"), v.components):
        env = envelope(mu)
        if np.all(env.values[(env.r >= fit_window[0]) & (env.r <= fit_window[1])] > 0):
            decay[name] = fit_decay_exponent(env, fit_window)[0]
    ratio = None if f.is_zero() else check_lp_estimate(v, f, cfg.rho)
    tol = cfg.tol.residual
    passed = {
        "theta": res["theta"] <= tol,
        "divergence": res["divergence"] <= tol,
        "rot": res["rot"] <= tol,
        "boundary": max(bd.values()) <= cfg.tol.boundary,
        "decay": all(e >= cfg.rho - 1 - 0.1 for e in decay.values()),
    }
    return DiagnosticsReport(res, bd, decay, ratio, list(history or []),
                             {"residual": tol, "boundary": cfg.tol.boundary}, passed)
