"""Green's kernels of the three radial mode operators.

With kappa = |zeta| the three operators are

    streamfunction  -u'' - u'/r          + (kappa^2 + 1/r^2) u
    vorticity       -u'' - (1+g) u'/r    + (kappa^2 + (1+g)/r^2) u
    swirl           -u'' - (1+g) u'/r    + (kappa^2 + (1-g)/r^2) u

and their decaying solutions vanishing at r = 1 are

    u(r) = int sigma_1(r,s) h(s) ds + int_1^r sigma_2 h + int_r^inf sigma_3 h

(kernels 1-3), likewise 7-9 for the swirl. For the vorticity, kernel 4 is the
homogeneous decaying shape and 5, 6 play the roles of 2, 3; the free
multiple of kernel 4 is fixed by the no-slip condition on v^z.

Index -> Bessel order: 1-3 use 1, 4-6 use g/2+1, 7-9 use |g/2-1|. All
evaluations go through exponentially scaled Bessel values, so ratios such as
I(kappa r) K(kappa s) stay finite whenever the true value does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DivergenceError, PreconditionError
from .quadrature import cumulative_right, power_tail
from .spaces import RadialProfile
from .specfun import bessel_i, bessel_k

ZETA_SWITCH = 1e-6

__all__ = [
    "ZETA_SWITCH",
    "KernelParams",
    "sigma",
    "capital_f",
    "d_coefficient",
    "c_coefficient",
    "c_zero",
    "mn_integrands",
    "kernel_log_slope",
]


@dataclass(frozen=True)
class KernelParams:
    gamma: float
    zeta: float = 0.0

    def __post_init__(self):
        if not self.gamma > 2.0:
            raise PreconditionError("gamma must exceed 2")

    @property
    def kappa(self) -> float:
        return abs(self.zeta)

    @property
    def nu_vorticity(self) -> float:
        return self.gamma / 2 + 1

    @property
    def nu_swirl(self) -> float:
        return abs(self.gamma / 2 - 1)

    def order(self, index: int) -> float:
        return 1.0 if index <= 3 else self.nu_vorticity if index <= 6 else self.nu_swirl

    @property
    def is_zero_branch(self) -> bool:
        return self.kappa < ZETA_SWITCH


def _ive(nu, x):
    return bessel_i(nu, x, scaled=True)


def _kve(nu, x):
    return bessel_k(nu, x, scaled=True)


def sigma(index: int, r, s, params: KernelParams, branch: str = "auto"):
    """Kernel ``index`` (1..9) at (r, s).

    ``branch="auto"`` switches to the zeta = 0 form below ZETA_SWITCH;
    "bessel" / "zero" force one form (the Bessel form needs zeta != 0).
    """
    if index not in range(1, 10):
        raise ValueError("kernel index must be in 1..9")
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(r < 1.0) or np.any(s < 1.0):
        raise PreconditionError("kernels are defined for r, s >= 1")
    g = params.gamma
    use_zero = params.is_zero_branch if branch == "auto" else branch == "zero"
    if not use_zero and params.kappa == 0:
        raise PreconditionError("Bessel form needs zeta != 0")
    if use_zero:
        out = _sigma_zero(index, r, s, g)
    else:
        out = _sigma_bessel(index, r, s, g, params.kappa, params.order(index))
    return out.item() if np.ndim(out) == 0 else out


def _sigma_zero(index, r, s, g):
    one = np.ones(np.broadcast(r, s).shape)
    if index == 1:
        return -0.5 / r * one
    if index == 2:
        return 0.5 * s**2 / r
    if index == 3:
        return 0.5 * r * one
    if index == 4:
        return r ** (-g - 1) * one
    if index == 5:
        return r ** (-g - 1) * s ** (g + 2) / (g + 2)
    if index == 6:
        return r / (g + 2) * one
    if index == 7:
        return -(r ** (1 - g)) * s**2 / (g - 2)
    if index == 8:
        return r ** (1 - g) * s**g / (g - 2)
    return s**2 / r / (g - 2)


def _sigma_bessel(index, r, s, g, k, nu):
    # r-weight and s-weight of each family
    if index <= 3:
        rw, sw = 1.0, s
    else:
        rw, sw = r ** (-g / 2), s ** (g / 2 + 1)
    if index == 4:
        return rw * _kve(nu, k * r) * np.exp(-k * r) * np.ones_like(s)
    if index in (1, 7):
        ratio = _ive(nu, k) / _kve(nu, k)
        return -ratio * rw * _kve(nu, k * r) * sw * _kve(nu, k * s) * np.exp(k * (2 - r - s))
    if index in (2, 5, 8):
        return rw * _kve(nu, k * r) * sw * _ive(nu, k * s) * np.exp(k * (s - r))
    return rw * _ive(nu, k * r) * sw * _kve(nu, k * s) * np.exp(k * (r - s))


def capital_f(zeta: float, gamma: float, scaled: bool = False) -> float:
    """int_1^inf s^{1-g/2} K_1(k s) K_{g/2+1}(k s) ds, k = |zeta| > 0.

    With ``scaled`` the value is multiplied by e^{2k} (finite for any k).
    """
    k = abs(zeta)
    if k == 0:
        raise PreconditionError("F is defined for zeta != 0")
    nu = gamma / 2 + 1

    def integrand(s):
        return s ** (1 - gamma / 2) * _kve(1.0, k * s) * _kve(nu, k * s) * np.exp(-2 * k * (s - 1))

    cut = max(1.0, 1.0 / k)
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    val = integrate.quad(integrand, 1.0, cut, **opts)[0] if cut > 1 else 0.0
    val += integrate.quad(integrand, cut, np.inf, **opts)[0]
    return val if scaled else val * np.exp(-2 * k)


def kernel_log_slope(nu: float, x: float) -> float:
    """-d log(e^x K_nu(x)) / d log x, used to fold the Bessel factor into power tails."""
    from .specfun import bessel_derivatives

    _, dk = bessel_derivatives(nu, x, scaled=True)
    return float(-x * (1.0 + dk / _kve(nu, x)))


def _right_integral(q, grid, rate, beta):
    tail = power_tail(q[-1], grid.r_max, rate, beta)
    return cumulative_right(q[None, :], grid, [rate], [tail])[0, 0]


def d_coefficient(h: RadialProfile, zeta: float, kind: str = "continuous") -> complex:
    """Boundary functional of the streamfunction solve.

    Continuous zeta: (I_1/K_1)(k) int_1^inf K_1(k s) s h(s) ds; zero atom
    (or |zeta| below the switch): (1/2) int_1^inf h.
    """
    if kind not in ("continuous", "atom"):
        raise ValueError("kind must be 'continuous' or 'atom'")
    if h.is_zero():
        return 0.0
    grid = h.grid
    r = grid.nodes
    tau = h.tail_exponent
    k = abs(zeta)
    if k < ZETA_SWITCH:
        if tau is not None and tau <= 1.0:
            raise DivergenceError("h must decay faster than r^-1")
        return 0.5 * _right_integral(h.values, grid, 0.0, tau)
    if tau is not None and tau <= 2.0:
        raise DivergenceError("h must decay faster than r^-2")
    q = r * _kve(1.0, k * r) * h.values
    beta = None if tau is None else tau - 1 + kernel_log_slope(1.0, k * grid.r_max)
    # int K_1 s h = e^{-k} * scaled right integral at r=1
    return _ive(1.0, k) / _kve(1.0, k) * np.exp(k) * _right_integral(q, grid, k, beta)


def c_coefficient(phi: RadialProfile, zeta: float, gamma: float) -> complex:
    """-(1/F) int_1^inf s K_1(k s) phi(s) ds for zeta != 0."""
    k = abs(zeta)
    if k < ZETA_SWITCH:
        raise PreconditionError("use c_zero at zeta = 0")
    if phi.is_zero():
        return 0.0
    grid = phi.grid
    r = grid.nodes
    q = r * _kve(1.0, k * r) * phi.values
    tau = phi.tail_exponent
    beta = None if tau is None else tau - 1 + kernel_log_slope(1.0, k * grid.r_max)
    num = _right_integral(q, grid, k, beta)  # e^{k} int s K_1 phi
    return -num * np.exp(-k) / capital_f(zeta, gamma)


def c_zero(a0_z: RadialProfile) -> complex:
    """-int_1^inf t a_0^z(t) dt."""
    if a0_z.is_zero():
        return 0.0
    tau = a0_z.tail_exponent
    if tau is not None and tau <= 2.0:
        raise DivergenceError("a_0^z must decay faster than r^-2")
    beta = None if tau is None else tau - 1
    return -_right_integral(a0_z.grid.nodes * a0_z.values, a0_z.grid, 0.0, beta)


def mn_integrands(g_r, g_z, s, zeta: float, gamma: float):
    """Unscaled vorticity integrands (M, N) at radius s.

    ``g_r``, ``g_z`` are profiles (evaluated at s) or plain numbers.
    """
    k = abs(zeta)
    if k == 0:
        raise PreconditionError("M, N are defined for zeta != 0")
    s = np.asarray(s, dtype=float)
    gr = g_r(s) if callable(g_r) else g_r
    gz = g_z(s) if callable(g_z) else g_z
    nu = gamma / 2 + 1
    w = s**nu
    m = 1j * zeta * w * bessel_i(nu, k * s) * gr + k * w * bessel_i(nu - 1, k * s) * gz
    n = 1j * zeta * w * bessel_k(nu, k * s) * gr - k * w * bessel_k(nu - 1, k * s) * gz
    return m, n
