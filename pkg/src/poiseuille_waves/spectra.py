"""Checks that the kernel is one-dimensional: higher modes never solve the dispersion relation.

For n >= 2 the determinant stays positive, the mode solutions decrease in
n, their derivative gaps at x = 1/2 stay bounded away from zero, and the
left solutions obey an explicit sinh lower bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import kernel, ode
from .greens import green


@dataclass(frozen=True)
class ModeRecord:
    n: int
    det: float
    n_det: float
    jump: float


@dataclass(frozen=True)
class SpectrumReport:
    epsilon: float
    mu_tilde_star: float
    records: tuple
    delta_left: float
    delta_right: float
    failures: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def min_n_det(self) -> float:
        return min(r.n_det for r in self.records if r.n >= 2)


def one_dim_check(epsilon: float, mu_tilde_star: float, n_max: int = 10,
                  tol: float = kernel.DEFAULT_TOL) -> SpectrumReport:
    """Determinants for n = 1..n_max at the n = 1 root; failure if any det_n <= 0 for n >= 2."""
    recs = []
    fails = []
    for n in range(1, n_max + 1):
        pair = kernel.mode_pair(n, epsilon, mu_tilde_star)
        p = pair.params
        I1 = kernel.I_quadrature("left", pair.left, p, tol)
        I2 = kernel.I_quadrature("right", pair.right, p, tol)
        a, b = 0.5 - 0.5 * epsilon, 0.5 + 0.5 * epsilon
        sa, sb = np.sinh(n * a), np.sinh(n * b)
        det = float(1.0 + sb * (I1 + I2) + (sb * sb - sa * sa) * I1 * I2)
        jump = pair.left.half_derivative - pair.right.half_derivative
        recs.append(ModeRecord(n, det, n * det, float(jump)))
        if n >= 2 and not det > 0:
            fails.append(f"det_{n}={det:.3e} <= 0")
    gap = derivative_gap(epsilon, mu_tilde_star)
    return SpectrumReport(epsilon, mu_tilde_star, tuple(recs), -gap.gap_left, gap.gap_right, tuple(fails))


@dataclass(frozen=True)
class MonotonicityResult:
    passed: bool
    worst_margin: float
    derivative_ordered: bool


def monotonicity_check(epsilon: float, mu_tilde_star: float, n_list=(1, 2, 3, 4, 5),
                       m: int = 512) -> MonotonicityResult:
    """Strict decrease f_1 > f_2 > ... on both half-grids, endpoints excluded."""
    n_list = list(n_list)
    worst = np.inf
    ordered = True
    for side in ("left", "right"):
        x = ode.half_grid(side, m)[1:-1]
        sols = [ode.solve_mode_ode(side, n, epsilon, mu_tilde_star) for n in n_list]
        vals = np.array([s(x) for s in sols])
        worst = min(worst, float(np.min(vals[:-1] - vals[1:])))
        if side == "left":
            d = [s.half_derivative for s in sols]
            ordered = ordered and bool(np.all(np.diff(d) > 0))
    return MonotonicityResult(bool(worst > 0 and ordered), worst, ordered)


@dataclass(frozen=True)
class DerivativeGap:
    gap_left: float
    limit_left: float
    gap_right: float
    limit_right: float


def limit_gap_integrals() -> tuple[float, float]:
    """int f0 f0# over each half-interval, f0# being the limit solution for n = 2."""
    l1, r1 = ode.solve_f0(1)
    l2, r2 = ode.solve_f0(2)
    opts = dict(epsabs=1e-13, epsrel=1e-13, limit=200)
    left = integrate.quad(lambda x: l1(x) * l2(x), 0.0, 0.5, **opts)[0]
    right = integrate.quad(lambda x: r1(x) * r2(x), 0.5, 1.0, **opts)[0]
    return float(left), float(right)


def derivative_gap(epsilon: float, mu_tilde_star: float | None = None) -> DerivativeGap:
    """(f_1 - f_2)' at 1/2 from both sides, with the eps -> 0 estimates -/+ 3 (1-eps)^2 int f0 f0#."""
    if mu_tilde_star is None:
        mu_tilde_star = kernel.solve_mu_tilde(epsilon).mu_tilde
    d = {}
    for side in ("left", "right"):
        f1 = ode.solve_mode_ode(side, 1, epsilon, mu_tilde_star)
        f2 = ode.solve_mode_ode(side, 2, epsilon, mu_tilde_star)
        d[side] = f1.half_derivative - f2.half_derivative
    il, ir = limit_gap_integrals()
    c = 3.0 * (1.0 - epsilon) ** 2
    return DerivativeGap(float(d["left"]), -c * il, float(d["right"]), c * ir)


@dataclass(frozen=True)
class PositivityResult:
    passed: bool
    worst_ratio: float


def positivity_bound(n: int, epsilon: float, f: ode.ModeSolution, c: float = 0.1, m: int = 512) -> PositivityResult:
    """Check f(x)/|f'(wall)| >= c sinh(k d)/k, d being the distance to the wall.

    Stated for left solutions; right solutions are checked in the mirrored
    variable d = 1 - x so that both sides are treated alike.
    """
    if not 0.0 < c <= 0.13:
        raise ValueError("c must lie in (0, 0.13]")
    k = (1.0 - epsilon) * n
    wall = 0.0 if f.side == "left" else 1.0
    x = ode.half_grid(f.side, m)
    x = x[x != wall]
    d = np.abs(x - wall)
    F = f(x) / abs(f.derivative(wall))
    ratio = F / (c * np.sinh(k * d) / k)
    worst = float(np.min(ratio))
    return PositivityResult(bool(worst >= 1.0), worst)


def universal_constant() -> float:
    """1 - log(4/3) - log(16/9)."""
    return float(1.0 - np.log(4.0 / 3.0) - np.log(16.0 / 9.0))


def xi_inequality(xi: float) -> float:
    """sinh(xi) - int_0^xi sinh(xi - z) sinh(z) 2/(xi^2 - z^2) dz."""

    def integrand(z):
        d = xi - z
        # sinh(d)/d is regular at z = xi
        shd = np.sinh(d) / d if d > 1e-8 else 1.0 + d * d / 6.0
        return shd * np.sinh(z) * 2.0 / (xi + z)

    val = integrate.quad(integrand, 0.0, xi, epsabs=1e-13, epsrel=1e-13)[0]
    return float(np.sinh(xi) - val)


def sinh_ratio(n: int, epsilon: float) -> float:
    """sinh(nb) sinh(na) / sinh(n), evaluated without overflow."""
    a = 0.5 - 0.5 * epsilon
    return float(n * green(n, a, a))


def leading_correction(n: int, epsilon: float) -> float:
    """|1 - 2 sinh(nb) cosh(na)/sinh(n)| = sinh(n eps)/sinh(n)."""
    return float(np.exp(-n * (1.0 - epsilon)) * -np.expm1(-2.0 * n * epsilon) / -np.expm1(-2.0 * n))
