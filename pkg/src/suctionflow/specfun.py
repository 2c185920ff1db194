"""Modified Bessel functions I_nu, K_nu of real order nu >= 0 and positive argument.

Values come from the AMOS routines wrapped by :mod:`scipy.special` (series for
small argument, uniform asymptotics and recurrence for large argument, Temme's
method for K near integer order). This module adds the domain contract, the
exponentially scaled variants used by every kernel, and derivative formulas via
the standard recurrences.

The scaled convention throughout is ``e^{-x} I_nu(x)`` and ``e^{x} K_nu(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "BesselDomainError",
    "BesselEval",
    "bessel_i",
    "bessel_k",
    "bessel_derivatives",
    "bessel_eval",
    "wronskian_defect",
]


class BesselDomainError(ValueError):
    """Raised for x <= 0, nu < 0 or non-finite input."""


def _check(nu, x):
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(nu)) or np.any(nu < 0):
        raise BesselDomainError(f"order must be finite and >= 0, got {nu}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise BesselDomainError(f"argument must be finite and > 0, got {x}")
    # AMOS returns nan for subnormal orders; the functions are flat in nu there
    nu = np.where(nu < np.finfo(float).tiny, 0.0, nu)
    return nu, x


def _ret(v):
    return v.item() if np.ndim(v) == 0 else v


def bessel_i(nu, x, scaled=False):
    """I_nu(x), or e^{-x} I_nu(x) when ``scaled``. Accepts scalars or arrays."""
    nu, x = _check(nu, x)
    return _ret(special.ive(nu, x) if scaled else special.iv(nu, x))


def bessel_k(nu, x, scaled=False):
    """K_nu(x), or e^{x} K_nu(x) when ``scaled``.

    The unscaled value underflows to zero (possibly through subnormals) once
    x exceeds roughly 700; use :func:`bessel_eval` to get an explicit flag.
    """
    nu, x = _check(nu, x)
    return _ret(special.kve(nu, x) if scaled else special.kv(nu, x))


def bessel_derivatives(nu, x, scaled=False):
    """Return (dI/dx, dK/dx) at order nu.

    dI = (nu/x) I_nu + I_{nu+1} and dK = (nu/x) K_nu - K_{nu+1}. With
    ``scaled`` the pair is multiplied by e^{-x} and e^{x} respectively.
    """
    nu, x = _check(nu, x)
    if scaled:
        i0, i1 = special.ive(nu, x), special.ive(nu + 1, x)
        k0, k1 = special.kve(nu, x), special.kve(nu + 1, x)
    else:
        i0, i1 = special.iv(nu, x), special.iv(nu + 1, x)
        k0, k1 = special.kv(nu, x), special.kv(nu + 1, x)
    return _ret(nu / x * i0 + i1), _ret(nu / x * k0 - k1)


def bessel_derivatives_lower(nu, x, scaled=False):
    """Same pair through the lowered recurrences -(nu/x) I_nu + I_{nu-1}, -(nu/x) K_nu - K_{nu-1}."""
    nu, x = _check(nu, x)
    if scaled:
        i0, im = special.ive(nu, x), special.ive(nu - 1, x)
        k0, km = special.kve(nu, x), special.kve(np.abs(nu - 1), x)
    else:
        i0, im = special.iv(nu, x), special.iv(nu - 1, x)
        k0, km = special.kv(nu, x), special.kv(np.abs(nu - 1), x)
    return _ret(-nu / x * i0 + im), _ret(-nu / x * k0 - km)


@dataclass(frozen=True)
class BesselEval:
    order: float
    argument: float
    value_i: float
    value_k: float
    scaled: bool
    underflow: bool = False
    overflow: bool = False


def bessel_eval(nu: float, x: float, scaled: bool = False) -> BesselEval:
    """Evaluate both functions at once and flag over/underflow of unscaled values."""
    nu, x = float(nu), float(x)
    vi = bessel_i(nu, x, scaled)
    vk = bessel_k(nu, x, scaled)
    under = over = False
    if not scaled:
        # compare against the scaled values, which never leave the float range here
        under = vk < np.finfo(float).tiny or (vk == 0.0)
        over = not np.isfinite(vi)
    return BesselEval(nu, x, float(vi), float(vk), scaled, bool(under), bool(over))


def wronskian_defect(nu, x):
    """|x (K_nu I_nu' - K_nu' I_nu) - 1|, evaluated with scaled values so the
    exponentials cancel exactly."""
    nu, x = _check(nu, x)
    i0, k0 = special.ive(nu, x), special.kve(nu, x)
    di, dk = bessel_derivatives(nu, x, scaled=True)
    return _ret(np.abs(x * (k0 * di - dk * i0) - 1.0))
