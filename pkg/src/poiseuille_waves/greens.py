"""Dirichlet Green's functions of d^2/dy^2 - n^2 on [0, 1] and channel Poisson solves.

The mode-n function is

    G_n(y, z) = sinh(n(1 - y)) sinh(n z) / (n sinh n),   z < y,

symmetric in (y, z). It is evaluated in exponentially shifted form so that
large n never overflows. The channel solver works column by column: every
column integral is split at the kinks of the vorticity, so piecewise smooth
data are integrated to full accuracy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import gauss_legendre, merge_breaks, panel_rule


class QuadratureError(RuntimeError):
    """Raised when two quadrature orders disagree beyond tolerance."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (estimated error {estimate:.3e})")
        self.estimate = estimate


def green(n: int, y, z):
    """Green's function of phi'' - n^2 phi = -delta(y - z) with zero end values."""
    if n < 1:
        raise ValueError("green() needs n >= 1; use green0 for the mean mode")
    y, z = np.broadcast_arrays(np.asarray(y, float), np.asarray(z, float))
    lo = np.minimum(y, z)
    hi = np.maximum(y, z)
    # sinh(n lo) sinh(n (1 - hi)) / (n sinh n) with every exponent <= 0
    num = -np.expm1(-2.0 * n * lo) * -np.expm1(-2.0 * n * (1.0 - hi))
    out = np.exp(-n * (hi - lo)) * num / (2.0 * n * -np.expm1(-2.0 * n))
    return out[()] if out.ndim == 0 else out


def green0(y, z):
    """Mean-mode Green's function min(y,z) (1 - max(y,z))."""
    y, z = np.broadcast_arrays(np.asarray(y, float), np.asarray(z, float))
    out = np.minimum(y, z) * (1.0 - np.maximum(y, z))
    return out[()] if out.ndim == 0 else out


def _kernel(n: int):
    return green0 if n == 0 else (lambda y, z: green(n, y, z))


def _mode_integral(n, g, y, breakpoints, q, panels):
    kern = _kernel(n)
    base = np.linspace(0.0, 1.0, panels + 1)
    base = merge_breaks(base, breakpoints)
    out = np.empty(len(y))
    for k, yk in enumerate(y):
        nodes, weights = panel_rule(merge_breaks(base, [yk]), q)
        out[k] = np.dot(weights, kern(yk, nodes) * g(nodes))
    return out


def solve_mode(n: int, g: Callable, y, breakpoints=(), tol: float = 1e-11):
    """Return phi(y) = int_0^1 G_n(y, z) g(z) dz.

    phi solves phi'' - n^2 phi = -g with phi(0) = phi(1) = 0. ``g`` is a
    vectorized callable; ``breakpoints`` lists points where g is not smooth.

    Raises:
        QuadratureError: if two Gauss orders disagree by more than ``tol``
            relative to the size of the result.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    coarse = _mode_integral(n, g, y, breakpoints, 12, 8)
    fine = _mode_integral(n, g, y, breakpoints, 20, 8)
    est = float(np.max(np.abs(fine - coarse), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(fine), initial=0.0)))
    if est > tol * scale:
        raise QuadratureError("mode solve did not converge", est)
    return fine


@dataclass(frozen=True)
class ModePoissonProblem:
    """phi'' - n^2 phi = -rhs on [0, 1] with phi(0) = bc0, phi(1) = bc1."""

    n: int
    rhs: Callable
    bc0: float = 0.0
    bc1: float = 0.0
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("mode index must be non-negative")

    def solve(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.n == 0:
            phi = _mode_integral(0, self.rhs, y, self.breakpoints, 20, 8)
            return phi + self.bc0 * (1.0 - y) + self.bc1 * y
        n = self.n
        phi = solve_mode(n, self.rhs, y, self.breakpoints)
        left = np.sinh(n * (1.0 - y)) / np.sinh(n) if n < 700 else np.exp(-n * y)
        right = np.sinh(n * y) / np.sinh(n) if n < 700 else np.exp(-n * (1.0 - y))
        return phi + self.bc0 * left + self.bc1 * right


def greens_distributional_check(n: int, z: float, testfn: Callable, testfn_dd=None):
    """Return int_0^1 G_n(y, z) (testfn'' - n^2 testfn)(y) dy, which equals -testfn(z).

    ``testfn_dd`` is the second derivative; when omitted a centered
    difference with step 1e-4 is used.
    """
    if testfn_dd is None:
        h = 1e-4

        def testfn_dd(t):
            return (testfn(t + h) - 2.0 * testfn(t) + testfn(t - h)) / h**2

    def integrand(t):
        return testfn_dd(t) - n * n * testfn(t)

    kern = _kernel(n)
    nodes, weights = panel_rule(merge_breaks(np.linspace(0, 1, 9), [z]), 20)
    return float(np.dot(weights, kern(z, nodes) * integrand(nodes)))


@dataclass(frozen=True)
class ChannelPoissonSolution:
    """Stream function on a uniform periodic x grid times an increasing y grid."""

    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    psi_y: np.ndarray
    psi_xx: np.ndarray
    coeffs: np.ndarray


def _column_rule(y, kinks, q):
    """Per-column Gauss nodes: every y-cell is split at the kinks it contains."""
    nx = kinks.shape[0]
    lo, hi = y[:-1], y[1:]
    ncell = len(lo)
    inside = (kinks[:, None, :] > lo[None, :, None]) & (kinks[:, None, :] < hi[None, :, None])
    counts = inside.sum(axis=2)
    nsub = max(2, 1 + int(counts.max(initial=0)))
    # sub-panel breaks: kinks inside the cell, padded with evenly spaced points
    pad = nsub - 1
    cuts = np.where(inside, kinks[:, None, :], np.inf)
    cuts = np.sort(cuts, axis=2)[:, :, :pad]
    if cuts.shape[2] < pad:
        cuts = np.concatenate(
            [cuts, np.full((nx, ncell, pad - cuts.shape[2]), np.inf)], axis=2
        )
    # cells with fewer kinks than pad get midpoints/extra even splits
    even = lo[None, :, None] + (hi - lo)[None, :, None] * (
        np.arange(1, pad + 1)[None, None, :] / (pad + 1)
    )
    missing = ~np.isfinite(cuts)
    cuts = np.where(missing, even, cuts)
    cuts = np.sort(cuts, axis=2)
    edges = np.concatenate(
        [np.broadcast_to(lo[None, :, None], (nx, ncell, 1)), cuts,
         np.broadcast_to(hi[None, :, None], (nx, ncell, 1))],
        axis=2,
    )
    gx, gw = gauss_legendre(q)
    a, b = edges[..., :-1, None], edges[..., 1:, None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * gx
    weights = half * gw
    # shape (nx, ncell, nsub * q)
    return nodes.reshape(nx, ncell, -1), weights.reshape(nx, ncell, -1)


def solve_channel_poisson(
    omega,
    nx: int | None = None,
    y=None,
    kinks: Callable | None = None,
    bottom: float = 0.0,
    top: float = -1.0 / 3.0,
    q: int = 8,
) -> ChannelPoissonSolution:
    """Solve Laplace(psi) = omega on T x [0, 1] with psi = bottom at y=0, top at y=1.

    ``omega`` is either a vectorized callable ``omega(x, z)`` with x of shape
    (nx, 1) and z of shape (nx, m), or an (nx, ny) array of samples on the
    grid (interpolated by cubic splines in y). ``kinks(x)`` returns an
    (nx, K) array of positions where omega has a derivative jump in each
    column. Each Fourier mode n >= 1 uses G_n; the mean mode uses G_0 plus
    the linear function matching the boundary values.
    """
    if y is None:
        raise ValueError("a y grid is required")
    y = np.asarray(y, dtype=float)
    if y[0] != 0.0 or y[-1] != 1.0 or np.any(np.diff(y) <= 0):
        raise ValueError("y grid must increase strictly from 0 to 1")
    if not callable(omega):
        samples = np.asarray(omega, dtype=float)
        nx = samples.shape[0]
        from scipy.interpolate import CubicSpline

        splines = [CubicSpline(y, row) for row in samples]

        def omega(xc, z, _s=splines):
            return np.stack([s(zi) for s, zi in zip(_s, z)])

    if nx is None or nx < 16:
        raise ValueError("grid too coarse: need at least 8 Fourier modes (nx >= 16)")
    x = 2.0 * np.pi * np.arange(nx) / nx
    k = np.zeros((nx, 0)) if kinks is None else np.asarray(kinks(x), dtype=float)
    k = k.reshape(nx, -1)
    nodes, weights = _column_rule(y, k, q)
    vals = np.asarray(omega(x[:, None], nodes.reshape(nx, -1)), dtype=float)
    wvals = weights * vals.reshape(nodes.shape)

    nmodes = nx // 2 + 1
    ylo, yhi = y[:-1], y[1:]
    h = yhi - ylo
    ncell = len(h)
    phase = np.exp(-1j * np.outer(np.arange(nmodes), x))  # (nmodes, nx)
    A = np.empty((nmodes, ncell), dtype=complex)
    B = np.empty((nmodes, ncell), dtype=complex)
    # mean mode: plain moments
    A[0] = phase[0] @ np.sum(wvals * nodes, axis=2)
    B[0] = phase[0] @ np.sum(wvals * (1.0 - nodes), axis=2)
    for n in range(1, nmodes):
        wa = np.exp(-n * (yhi[None, :, None] - nodes)) * -np.expm1(-2.0 * n * nodes)
        wb = np.exp(-n * (nodes - ylo[None, :, None])) * -np.expm1(-2.0 * n * (1.0 - nodes))
        A[n] = phase[n] @ np.sum(wvals * wa, axis=2)
        B[n] = phase[n] @ np.sum(wvals * wb, axis=2)

    ny = len(y)
    P = np.zeros((nmodes, ny), dtype=complex)
    Q = np.zeros((nmodes, ny), dtype=complex)
    ns = np.arange(nmodes)
    decay = np.exp(-np.outer(ns[1:], h))  # (nmodes-1, ncell)
    P[0, 1:] = np.cumsum(A[0])
    Q[0, :-1] = np.cumsum(B[0][::-1])[::-1]
    for j in range(1, ny):
        P[1:, j] = decay[:, j - 1] * P[1:, j - 1] + A[1:, j - 1]
    for j in range(ny - 1, 0, -1):
        Q[1:, j - 1] = decay[:, j - 1] * Q[1:, j] + B[1:, j - 1]

    coef = np.empty((nmodes, ny), dtype=complex)
    dcoef = np.empty((nmodes, ny), dtype=complex)
    coef[0] = -((1.0 - y) * P[0] + y * Q[0]) + nx * (bottom * (1.0 - y) + top * y)
    dcoef[0] = P[0] - Q[0] + nx * (top - bottom)
    nn = ns[1:, None].astype(float)
    den = 2.0 * -np.expm1(-2.0 * nn)
    up = -np.expm1(-2.0 * nn * (1.0 - y))
    dn = -np.expm1(-2.0 * nn * y)
    coef[1:] = -(up * P[1:] + dn * Q[1:]) / (nn * den)
    dcoef[1:] = -((2.0 - dn) * Q[1:] - (2.0 - up) * P[1:]) / den

    psi = np.fft.irfft(coef, n=nx, axis=0)
    psi_y = np.fft.irfft(dcoef, n=nx, axis=0)
    psi_xx = np.fft.irfft(-(ns[:, None] ** 2) * coef, n=nx, axis=0)
    return ChannelPoissonSolution(x, y, psi, psi_y, psi_xx, coef / nx)
