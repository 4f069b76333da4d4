"""Plateau-modified Poiseuille vorticity profile and its background quantities.

The profile replaces the linear vorticity -2y by the constant -2a on the
middle band [a, b] of width eps, with a = (1 - eps)/2 and b = (1 + eps)/2.
Every quantity here is a closed-form piecewise polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_MAX = 0.2


class ProfileError(ValueError):
    """Raised for out-of-regime widths or positions outside [0, 1]."""


@dataclass(frozen=True)
class ShearProfile:
    epsilon: float
    a: float
    b: float
    v_varpi: float

    @property
    def window(self) -> tuple[float, float]:
        return admissible_window(self)


def _u_integral(a: float, b: float) -> float:
    """Exact value of the integral of u over [0, 1]."""
    eps = b - a
    lower = -a**3 / 3.0
    middle = -a * (b**2 - a**2) + a**2 * eps
    upper = -((1.0 - b) ** 3) / 3.0 - a * (1.0 - b**2) + a**2 * (1.0 - b)
    return lower + middle + upper


def make_profile(epsilon: float, eps_max: float = EPS_MAX) -> ShearProfile:
    """Build the profile for gap width ``epsilon``.

    Raises:
        ProfileError: if epsilon is not in (0, eps_max].
    """
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or epsilon <= 0.0 or epsilon > eps_max:
        raise ProfileError(
            f"epsilon must satisfy 0 < epsilon <= {eps_max}, got {epsilon!r}"
        )
    a = 0.5 - 0.5 * epsilon
    b = 0.5 + 0.5 * epsilon
    return ShearProfile(epsilon, a, b, -_u_integral(a, b) - 1.0 / 3.0)


def _check_domain(y):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0) or np.any(y > 1.0) or np.any(~np.isfinite(y)):
        raise ProfileError("positions must lie in [0, 1]")
    return y


def varpi(p: ShearProfile, y):
    """Vorticity profile on [0, 1]."""
    y = _check_domain(y)
    out = np.where(y < p.a, -2.0 * y, -2.0 * p.a)
    out = np.where(y > p.b, -2.0 * (y - p.b) - 2.0 * p.a, out)
    return out[()] if out.ndim == 0 else out


def varpi_prime(p: ShearProfile, y):
    """Derivative of the profile: -2 off the plateau and 0 on [a, b]."""
    y = _check_domain(y)
    out = np.where((y < p.a) | (y > p.b), -2.0, 0.0)
    return out[()] if out.ndim == 0 else out


def u_velocity(p: ShearProfile, y):
    """Antiderivative of varpi vanishing at y = 0."""
    y = _check_domain(y)
    a, b = p.a, p.b
    mid = -2.0 * a * y + a**2
    out = np.where(y < a, -(y**2), mid)
    out = np.where(y > b, -((y - b) ** 2) + mid, out)
    return out[()] if out.ndim == 0 else out


def v_varpi(p: ShearProfile) -> float:
    return p.v_varpi


def psi0_prime(p: ShearProfile, y):
    """Background horizontal velocity u + v_varpi."""
    return u_velocity(p, y) + p.v_varpi


def psi0(p: ShearProfile, y):
    """Background stream function with psi0(0) = 0 and psi0(1) = -1/3."""
    y = _check_domain(y)
    a, b = p.a, p.b

    def middle(t):
        return -(a**3) / 3.0 - a * (t**2 - a**2) + a**2 * (t - a)

    out = np.where(y < a, -(y**3) / 3.0, middle(y))
    upper = middle(b) - (y - b) ** 3 / 3.0 - a * (y**2 - b**2) + a**2 * (y - b)
    out = np.where(y > b, upper, out) + p.v_varpi * y
    return out[()] if out.ndim == 0 else out


def admissible_window(p: ShearProfile) -> tuple[float, float]:
    """Open interval of lambda_bar for which lambda - psi0' has no zero off the plateau."""
    return p.a**2, p.b**2 - p.epsilon**2
