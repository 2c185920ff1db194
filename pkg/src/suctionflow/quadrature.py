"""Exponentially weighted cumulative integrals on the radial grid.

All Green's-function solves reduce to two running integrals of a grid
function q against a decaying exponential,

    left:   L(r_i) = int_1^{r_i}   e^{-rate (r_i - s)} q(s) ds
    right:  R(r_i) = int_{r_i}^inf e^{-rate (s - r_i)} q(s) ds

which are the scaled forms of the Bessel-weighted integrals. On each panel q
is replaced by its degree-7 interpolant through eight neighbouring nodes and
the exponential is integrated exactly, so the rule stays eighth order uniformly
in ``rate * panel_width`` and never overflows. The wide stencil matters next to
r = 1, where panels are one-sided: a narrower rule leaves a grid-scale kink there
that nested residual derivatives amplify. Rows of ``q`` correspond to rows of
``rates``; the recursions run over the grid with all rows at once.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import DivergenceError
from .spaces import RadialGrid

__all__ = ["exp_moments", "panel_weights", "cumulative_left", "cumulative_right", "power_tail", "power_tails"]


NPTS = 8  # interpolation nodes per panel


def exp_moments(z, kmax: int = NPTS - 1) -> np.ndarray:
    """mu_k(z) = int_0^1 e^{-z y} y^k dy for k = 0..kmax; shape z.shape + (kmax+1,)."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape + (kmax + 1,))
    small = z < 0.1
    zs = z[small]
    for k in range(kmax + 1):
        # series for small z (gammainc form loses digits there)
        acc = np.zeros_like(zs)
        term = np.ones_like(zs)
        for n in range(18):
            acc += term / (k + n + 1)
            term = term * (-zs) / (n + 1)
        out[small, k] = acc
        zl = z[~small]
        out[~small, k] = math.factorial(k) / zl ** (k + 1) * special.gammainc(k + 1, zl)
    return out


@lru_cache(maxsize=8)
def _stencils(grid: RadialGrid):
    """Stencil indices, panel widths and inverse transposed Vandermonde matrices per direction."""
    r = grid.nodes
    n = grid.n
    start = np.clip(np.arange(n - 1) - (NPTS // 2 - 1), 0, n - NPTS)
    idx = start[:, None] + np.arange(NPTS)
    a, b = r[:-1], r[1:]
    width = b - a
    inv = {}
    for direction, y in (("right", (r[idx] - a[:, None]) / width[:, None]),
                         ("left", (b[:, None] - r[idx]) / width[:, None])):
        vt = np.transpose(y[:, :, None] ** np.arange(NPTS), (0, 2, 1))  # V^T per panel
        inv[direction] = np.linalg.inv(vt)
    return idx, width, inv


_WEIGHT_CACHE: dict = {}
_WEIGHT_CACHE_SIZE = 32


def panel_weights(grid: RadialGrid, rates, direction: str):
    """Per-panel weights (nrates, n-1, NPTS) on the stencil nodes, and panel decay factors.

    ``direction`` is "left" (weight peaks at the right panel end) or "right".
    Results are cached by (grid, rates, direction); they are treated as read-only.
    """
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    key = (grid, direction, rates.tobytes())
    hit = _WEIGHT_CACHE.get(key)
    if hit is not None:
        return hit
    idx, width, inv = _stencils(grid)
    z = rates[:, None] * width[None, :]
    mu = exp_moments(z, NPTS - 1)  # (nrates, n-1, NPTS)
    w = np.einsum("pjk,rpk->rpj", inv[direction], mu) * width[None, :, None]
    out = (idx, w, np.exp(-z))
    if len(_WEIGHT_CACHE) >= _WEIGHT_CACHE_SIZE:
        _WEIGHT_CACHE.pop(next(iter(_WEIGHT_CACHE)))
    _WEIGHT_CACHE[key] = out
    return out


def _panel_integrals(q, grid, rates, direction):
    q = np.atleast_2d(q)
    idx, w, decay = panel_weights(grid, rates, direction)
    # explicit row-wise sum keeps each row independent of the batch it sits in
    return (w * q[:, idx]).sum(axis=-1), decay


def cumulative_left(q, grid: RadialGrid, rates) -> np.ndarray:
    """Scaled left integrals at every node; rows of q paired with rates."""
    q = np.atleast_2d(np.asarray(q))
    pan, decay = _panel_integrals(q, grid, rates, "left")
    out = np.zeros(q.shape, dtype=np.result_type(q, float))
    for i in range(grid.n - 1):
        out[:, i + 1] = decay[:, i] * out[:, i] + pan[:, i]
    return out


def cumulative_right(q, grid: RadialGrid, rates, tail=None) -> np.ndarray:
    """Scaled right integrals at every node, starting from ``tail`` at R_max."""
    q = np.atleast_2d(np.asarray(q))
    pan, decay = _panel_integrals(q, grid, rates, "right")
    out = np.zeros(q.shape, dtype=np.result_type(q, float))
    if tail is not None:
        out[:, -1] = tail
    for i in range(grid.n - 2, -1, -1):
        out[:, i] = decay[:, i] * out[:, i + 1] + pan[:, i]
    return out


def power_tail(q_end, r_end: float, rate: float, beta, kernel=None) -> complex:
    """int_R^inf e^{-rate (s-R)} q(s) ds for q(s) = q_end (s/R)^{-beta} [kernel(s)/kernel(R)].

    ``beta=None`` means no tail model: the contribution is zero. With rate 0
    the integral is closed form and requires beta > 1.
    """
    if beta is None or q_end == 0:
        return 0.0
    if rate == 0.0:
        if kernel is not None:
            raise ValueError("closed-form tail takes the kernel inside beta")
        if beta <= 1.0:
            raise DivergenceError(f"tail r^-{beta} is not integrable at infinity")
        return q_end * r_end / (beta - 1.0)
    k_end = 1.0 if kernel is None else kernel(r_end)

    def shape(x):  # x = s - R
        s = r_end + x
        f = (s / r_end) ** (-beta)
        if kernel is not None:
            f = f * kernel(s) / k_end
        return f

    val, _ = integrate.quad(lambda x: np.exp(-rate * x) * shape(x), 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return q_end * val


def power_tails(q_end, r_end: float, rates, betas) -> np.ndarray:
    """Row-wise :func:`power_tail` without a kernel; ``betas`` may contain nan (no tail).

    Large ``rate * R`` uses the asymptotic series
    (1/rate) sum_n (-1)^n (beta)_n / (rate R)^n, which is far below double
    precision truncation error once rate R >= 100.
    """
    q_end = np.asarray(q_end)
    rates = np.broadcast_to(np.asarray(rates, dtype=float), q_end.shape)
    betas = np.broadcast_to(np.asarray(betas, dtype=float), q_end.shape)
    out = np.zeros(q_end.shape, dtype=np.result_type(q_end, float))
    for i in range(q_end.size):
        q, a, b = q_end.flat[i], rates.flat[i], betas.flat[i]
        if np.isnan(b) or q == 0:
            continue
        x = a * r_end
        if x >= 100.0:
            term, acc = 1.0, 1.0
            for n in range(12):
                term *= -(b + n) / x
                acc += term
            out.flat[i] = q * acc / a
        else:
            out.flat[i] = power_tail(q, r_end, a, b)
    return out
