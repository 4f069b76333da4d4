"""First-order traveling wave: vorticity, stream function, residual and distance.

The level sets of the wave's vorticity are the graphs y + f(x, y) with
f = sigma * hhat(y) * cos x, where hhat is the kernel element rescaled to
unit sup |hhat'|. Rescaling keeps y -> y + f monotone for every |sigma| < 1/2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .greens import ChannelPoissonSolution, _column_rule, solve_channel_poisson
from .kernel import KernelMode, operator_grid
from .quadrature import gauss_legendre

INVERSION_TOL = 1e-15


class AmplitudeError(ValueError):
    """The displacement would fold the level sets."""


class InversionError(RuntimeError):
    """Monotone inversion of y -> y + f did not converge."""


def _derivative_bound(mode: KernelMode) -> float:
    y = operator_grid(mode.profile, 8192)
    y = np.concatenate([y, [mode.profile.a, mode.profile.b]])
    return float(np.max(np.abs(mode.h_prime(y))))


@dataclass(frozen=True)
class Displacement:
    """f(x, y) = sigma * hhat(|y|) * cos(x) * sign(y) on the support of varpi'."""

    mode: KernelMode
    sigma: float
    scale: float
    tol: float = INVERSION_TOL

    @property
    def a(self) -> float:
        return self.mode.profile.a

    @property
    def b(self) -> float:
        return self.mode.profile.b

    def shape(self, y):
        """(hhat, hhat') on [0, 1]; zero on the open plateau."""
        h, dh = self.mode.evaluate(y)
        return self.scale * h, self.scale * dh

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        h, _ = self.shape(np.abs(y))
        return self.sigma * np.sign(y) * h * np.cos(x) if np.any(y < 0) else self.sigma * h * np.cos(x)

    def edges(self, x):
        """Eulerian positions a + f(x, a) and b + f(x, b) of the plateau edges."""
        x = np.asarray(x, dtype=float)
        ha, hb = self.shape(np.array([self.a, self.b]))[0]
        c = self.sigma * np.cos(x)
        return self.a + c * ha, self.b + c * hb

    def sup(self) -> float:
        y = operator_grid(self.mode.profile, 8192)
        return float(abs(self.sigma) * np.max(np.abs(self.shape(y)[0])))


def displacement(mode: KernelMode, sigma: float, tol: float = INVERSION_TOL) -> Displacement:
    """Displacement evaluator for amplitude sigma.

    Raises:
        AmplitudeError: if |sigma| sup|hhat'| >= 1/2.
    """
    scale = 1.0 / _derivative_bound(mode)
    if not abs(sigma) < 0.5:
        raise AmplitudeError(f"|sigma|={abs(sigma)} must be below 1/2 for an invertible displacement")
    if not tol > 0:
        raise ValueError("inversion tolerance must be positive")
    return Displacement(mode, float(sigma), scale, tol)


def invert_levels(disp: Displacement, x, z, lower: bool):
    """Solve zeta + f(x, zeta) = z for zeta in [0, a] (lower) or [b, 1] (upper).

    Safeguarded Newton iteration on a shrinking bracket; the map is strictly
    increasing under the amplitude precondition.
    """
    x, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float))
    x, z = x.ravel(), z.ravel()
    lo = np.full(z.shape, 0.0 if lower else disp.b)
    hi = np.full(z.shape, disp.a if lower else 1.0)
    c = disp.sigma * np.cos(x)
    zeta = np.clip(z, lo, hi)
    for _ in range(100):
        h, dh = disp.shape(zeta)
        g = zeta + c * h - z
        dg = 1.0 + c * dh
        lo = np.where(g < 0, zeta, lo)
        hi = np.where(g > 0, zeta, hi)
        step = zeta - g / dg
        bad = (step <= lo) | (step >= hi) | ~np.isfinite(step)
        new = np.where(g == 0, zeta, np.where(bad, 0.5 * (lo + hi), step))
        done = np.abs(new - zeta) <= disp.tol
        zeta = new
        if done.all():
            break
    else:
        raise InversionError("level-set inversion did not converge")
    return zeta


def omega_half(disp: Displacement, x, z):
    """Vorticity of the wave at Eulerian points with 0 <= z <= 1."""
    x, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float))
    shape = z.shape
    x, z = x.ravel(), z.ravel()
    a, b = disp.a, disp.b
    za, zb = disp.edges(x)
    out = np.full(z.shape, -2.0 * a)
    low = z < za
    if np.any(low):
        out[low] = -2.0 * invert_levels(disp, x[low], z[low], True)
    up = z > zb
    if np.any(up):
        out[up] = -2.0 * (invert_levels(disp, x[up], z[up], False) - b) - 2.0 * a
    return out.reshape(shape)


def omega_full(disp: Displacement, x, y):
    """Odd extension in y of the half-channel vorticity."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return np.sign(y) * omega_half(disp, x, np.abs(y))


@dataclass(frozen=True)
class WaveField:
    epsilon: float
    sigma: float
    lam: float
    mu_tilde: float
    x: np.ndarray
    y: np.ndarray
    omega: np.ndarray
    psi: np.ndarray | None
    f: Displacement = field(repr=False)

    @property
    def nx(self) -> int:
        return len(self.x)

    @property
    def ny(self) -> int:
        return len(self.y)


def _grid(nx: int, ny: int):
    if nx < 16 or ny < 3:
        raise ValueError("grid too coarse")
    return 2.0 * np.pi * np.arange(nx) / nx, np.linspace(-1.0, 1.0, ny)


def push_forward_vorticity(mode: KernelMode, sigma: float, nx: int = 128, ny: int = 129,
                           tol: float = INVERSION_TOL) -> WaveField:
    """Vorticity of the displaced profile on a uniform T x [-1, 1] grid."""
    disp = displacement(mode, sigma, tol)
    x, y = _grid(nx, ny)
    om = omega_full(disp, x[:, None], y[None, :])
    return WaveField(mode.epsilon, float(sigma), mode.lambda_star, mode.mu_tilde_star, x, y, om, None, disp)


def stream_function(disp: Displacement, nx: int, y_half) -> ChannelPoissonSolution:
    """Half-channel stream function with psi(x, 0) = 0 and psi(x, 1) = -1/3."""

    def kinks(x):
        za, zb = disp.edges(x)
        return np.stack([za, zb], axis=1)

    return solve_channel_poisson(lambda x, z: omega_half(disp, x, z), nx=nx, y=y_half, kinks=kinks)


def assemble_wave_field(mode: KernelMode, sigma: float, nx: int = 128, ny: int = 129,
                        tol: float = INVERSION_TOL) -> WaveField:
    """Vorticity and stream function on the full channel grid."""
    fld = push_forward_vorticity(mode, sigma, nx, ny, tol)
    y_half = np.unique(np.concatenate([[0.0, 1.0], np.abs(fld.y)]))
    sol = stream_function(fld.f, nx, y_half)
    idx = np.searchsorted(y_half, np.abs(fld.y))
    psi = np.sign(fld.y)[None, :] * sol.psi[:, idx]
    return WaveField(fld.epsilon, fld.sigma, fld.lam, fld.mu_tilde, fld.x, fld.y, fld.omega, psi, fld.f)


@dataclass(frozen=True)
class ResidualField:
    sup: float
    residual: np.ndarray
    solution: ChannelPoissonSolution


def nonlinear_residual_field(mode: KernelMode, sigma: float, nx: int = 128, ny: int = 257,
                             lam: float | None = None, tol: float = INVERSION_TOL) -> ResidualField:
    """Residual of lam f = psi(x, y + f) - mean_x psi(x, y + f) on the Lagrangian grid.

    psi(x, y + f) is expanded about the grid point to second order with
    psi_y from the Green representation and psi_yy = omega - psi_xx; the
    remainder is O(|f|^3) uniformly since omega is Lipschitz.
    """
    lam = mode.lambda_star if lam is None else lam
    disp = displacement(mode, sigma, tol)
    y = np.linspace(0.0, 1.0, ny)
    sol = stream_function(disp, nx, y)
    X = sol.x[:, None]
    f = disp(X, y[None, :])
    om = omega_half(disp, X, np.broadcast_to(y, (nx, ny)))
    psi_bar = sol.psi + sol.psi_y * f + 0.5 * (om - sol.psi_xx) * f**2
    res = lam * f - (psi_bar - psi_bar.mean(axis=0, keepdims=True))
    support = (y < mode.profile.a) | (y > mode.profile.b)
    res = res[:, support]
    return ResidualField(float(np.max(np.abs(res))), res, sol)


def nonlinear_residual(mode: KernelMode, sigma: float, nx: int = 128, ny: int = 257,
                       lam: float | None = None, tol: float = INVERSION_TOL) -> float:
    """sup over T x ([0, a) u (b, 1]) of the level-set equation residual."""
    return nonlinear_residual_field(mode, sigma, nx, ny, lam, tol).sup


@dataclass(frozen=True)
class ResidualScaling:
    sigmas: tuple
    residuals: tuple
    slope: float


def residual_slope(mode: KernelMode, sigmas, nx: int = 128, ny: int = 257, lam: float | None = None,
                   tol: float = INVERSION_TOL) -> ResidualScaling:
    """Least-squares slope of log residual against log sigma."""
    sig = tuple(float(s) for s in sigmas)
    res = tuple(nonlinear_residual(mode, s, nx, ny, lam, tol) for s in sig)
    slope = np.polyfit(np.log(sig), np.log(res), 1)[0]
    return ResidualScaling(sig, res, float(slope))


def circulation(sol: ChannelPoissonSolution) -> np.ndarray:
    """Per-column integral over [-1, 1] of u1 = -psi_y (psi odd in y)."""
    from scipy.integrate import simpson

    return 2.0 * simpson(-sol.psi_y, x=sol.y, axis=1)


# ---------------------------------------------------------------- H^gamma distance


def _vertical_integrals(disp, xe, ycuts, fn, q=8):
    """Integrals of fn(x, y) over [ycuts[j], ycuts[j+1]] at each x in xe, split at the edges."""
    za, zb = disp.edges(xe)
    kinks = np.stack([za, zb, -za, -zb], axis=1)
    nodes, weights = _column_rule(ycuts, kinks, q)
    vals = fn(np.broadcast_to(xe[:, None, None], nodes.shape), nodes)
    return np.sum(weights * vals, axis=2)


def _horizontal_integrals(disp, xcuts, ye, fn, q=8):
    """Integrals over x-cells of fn(x, ye) at each ye, split where an edge crosses ye."""
    ha, hb = disp.shape(np.array([disp.a, disp.b]))[0]
    ks = []
    for base, hv in ((disp.a, ha), (disp.b, hb)):
        for sgn in (1.0, -1.0):
            amp = disp.sigma * hv
            with np.errstate(divide="ignore", invalid="ignore"):
                c = (np.abs(ye) - base) / amp if amp != 0 else np.full(ye.shape, np.inf)
            th = np.where(np.abs(c) <= 1.0, np.arccos(np.clip(c, -1.0, 1.0)), np.nan)
            ks.append(th if sgn > 0 else 2.0 * np.pi - th)
    kinks = np.nan_to_num(np.stack(ks, axis=1), nan=-1.0)
    nodes, weights = _column_rule(xcuts, kinks, q)
    vals = fn(nodes, np.broadcast_to(ye[:, None, None], nodes.shape))
    return np.sum(weights * vals, axis=2)


def _deviation(disp):
    def g(x, y):
        return omega_full(disp, x, y) + 2.0 * y

    return g


def l2_deviation(fld: WaveField, nx: int | None = None) -> float:
    """||omega + 2y|| in L^2(T x [-1, 1]), column integrals split at the edges."""
    nx = nx or fld.nx
    x = 2.0 * np.pi * np.arange(nx) / nx
    ycuts = np.linspace(0.0, 1.0, 65)
    g = _deviation(fld.f)
    sq = _vertical_integrals(fld.f, x, ycuts, lambda xx, yy: g(xx, yy) ** 2)
    return float(np.sqrt(2.0 * (2.0 * np.pi / nx) * np.sum(sq)))


def _cell_averages(fld: WaveField, m: int, gradient: bool) -> np.ndarray:
    disp = fld.f
    g = _deviation(disp)
    xc = np.linspace(0.0, 2.0 * np.pi, m + 1)
    yc = np.linspace(-1.0, 1.0, m + 1)
    area = (xc[1] - xc[0]) * (yc[1] - yc[0])
    if gradient:
        vert = _vertical_integrals(disp, xc, yc, g)  # (m+1 x-edges, m y-cells)
        horiz = _horizontal_integrals(disp, xc, yc, lambda xx, yy: g(xx, yy))  # (m+1 y-edges, m x-cells)
        gx = (vert[1:, :] - vert[:-1, :]) / area
        gy = (horiz[1:, :] - horiz[:-1, :]).T / area
        return np.stack([gx, gy], axis=-1)
    gxn, gxw = gauss_legendre(8)
    half = 0.5 * (xc[1] - xc[0])
    xs = (0.5 * (xc[:-1] + xc[1:]))[:, None] + half * gxn[None, :]
    vals = _vertical_integrals(disp, xs.ravel(), yc, g).reshape(m, 8, m)
    return (np.einsum("k,ikj->ij", gxw * half, vals) / area)[..., None]


def slobodeckij(values: np.ndarray, s: float, chunk: int = 256) -> float:
    """Double-sum Slobodeckij seminorm of cell averages on T x [-1, 1], diagonal excluded."""
    m = values.shape[0]
    xc = 2.0 * np.pi * (np.arange(m) + 0.5) / m
    yc = -1.0 + 2.0 * (np.arange(m) + 0.5) / m
    area = (2.0 * np.pi / m) * (2.0 / m)
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    X, Y, V = X.ravel(), Y.ravel(), values.reshape(m * m, -1)
    total = 0.0
    for start in range(0, len(X), chunk):
        sl = slice(start, start + chunk)
        dx = X[sl, None] - X[None, :]
        dy = Y[sl, None] - Y[None, :]
        d2 = np.sin(0.5 * dx) ** 2 + dy**2
        with np.errstate(divide="ignore"):
            ker = np.where(d2 > 0, d2 ** -(1.0 + s), 0.0)
        diff = np.sum((V[sl, None, :] - V[None, :, :]) ** 2, axis=2)
        total += np.sum(diff * ker)
    return float(np.sqrt(total * area * area))


def sobolev_distance(fld: WaveField, gamma: float = 1.4, m: int = 64) -> float:
    """||omega + 2y||_{H^gamma}: L^2 part plus the fractional (or gradient) seminorm.

    Raises:
        ValueError: unless 0 <= gamma < 3/2.
    """
    if not 0.0 <= gamma < 1.5:
        raise ValueError("gamma must lie in [0, 3/2)")
    l2 = l2_deviation(fld)
    if gamma == 0.0:
        return l2
    if gamma < 1.0:
        return l2 + slobodeckij(_cell_averages(fld, m, False), gamma)
    grads = _cell_averages(fld, m, True)
    if gamma == 1.0:
        area = (2.0 * np.pi / m) * (2.0 / m)
        return l2 + float(np.sqrt(np.sum(grads**2) * area))
    return l2 + slobodeckij(grads, gamma - 1.0)


def l2_deviation_exact(epsilon: float) -> float:
    """Closed form of ||varpi_ext + 2y||_{L^2} for the undisplaced profile."""
    b = 0.5 + 0.5 * epsilon
    inner = 4.0 * epsilon**3 / 3.0 + 4.0 * epsilon**2 * (1.0 - b)
    return float(np.sqrt(2.0 * 2.0 * np.pi * inner))


# ---------------------------------------------------------------- export


def field_metadata(fld: WaveField) -> dict:
    return {
        "epsilon": fld.epsilon,
        "sigma": fld.sigma,
        "lambda_star": fld.lam,
        "mu_tilde": fld.mu_tilde,
        "nx": fld.nx,
        "ny": fld.ny,
    }


def export_field(fld: WaveField, path) -> tuple[Path, Path]:
    """Write ``x,y,omega,psi`` rows and a JSON sidecar next to ``path``."""
    if fld.psi is None:
        raise ValueError("stream function not computed")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    X, Y = np.meshgrid(fld.x, fld.y, indexing="ij")
    lines = ["x,y,omega,psi"]
    for row in zip(X.ravel(), Y.ravel(), fld.omega.ravel(), fld.psi.ravel()):
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    side = path.with_suffix(".json")
    side.write_text(json.dumps(field_metadata(fld), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, side
