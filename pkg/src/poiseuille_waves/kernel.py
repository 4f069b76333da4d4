"""Dispersion relation, kernel element and wave speed for the first Fourier mode.

For a trial wave speed the rescaled pole mu_tilde determines two mode
problems (left and right of x = 1/2). Their weighted integrals I1, I2 enter
a 2x2 matrix whose determinant must vanish. The null vector (A, B) then
builds the kernel element h on [0, a) and (b, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import BarycentricInterpolator

from . import ode
from .greens import green
from .profile import EPS_MAX, ShearProfile, make_profile
from .quadrature import graded_breaks, merge_breaks, panel_rule

DEFAULT_TOL = 1e-10


class WindowError(ValueError):
    """mu_tilde outside the admissible window."""


class DispersionError(RuntimeError):
    """No determinant root could be bracketed, or a claimed root is not one."""


@dataclass(frozen=True)
class SpectralParams:
    epsilon: float
    n: int
    lambda_bar: float
    mu: float
    nu: float
    rho: float
    mu_tilde: float
    nu_tilde: float
    rho_tilde: float
    Cm: float
    Cm_tilde: float

    @property
    def k(self) -> float:
        return (1.0 - self.epsilon) * self.n


def mu_tilde_window(epsilon: float) -> tuple[float, float]:
    """Open interval of mu_tilde for which mu > a and nu < b."""
    return 0.5, float(np.sqrt(0.25 + epsilon / (1.0 - epsilon)))


def spectral_params(epsilon: float, mu_tilde: float, n: int = 1) -> SpectralParams:
    """Root bookkeeping for a trial mu_tilde.

    Raises:
        WindowError: naming the violated inequality.
    """
    lo, hi = mu_tilde_window(epsilon)
    if not mu_tilde > lo:
        raise WindowError(f"mu_tilde={mu_tilde!r} must exceed 1/2 (mu > a)")
    if not mu_tilde < hi:
        raise WindowError(f"mu_tilde={mu_tilde!r} must be below {hi!r} (nu < b)")
    e = epsilon
    lam_bar = (1.0 - e) ** 2 * mu_tilde**2
    root = np.sqrt(e * e - e + lam_bar)
    nu, rho = e + root, e - root
    nu_t = root / (1.0 - e)
    cm = 2.0 / (n * np.sinh(n))
    return SpectralParams(e, n, lam_bar, float(np.sqrt(lam_bar)), nu, rho, float(mu_tilde),
                          float(nu_t), float(-nu_t), cm, cm / (1.0 - e))


def pole_term(side: str, s: float) -> float:
    """Exact integral of 1/(w^2 - s^2) over the half-interval."""
    if side == "left":
        return float(np.log((s - 0.5) / (s + 0.5)) / (2.0 * s))
    return float(np.log((1.0 - s) * (0.5 + s) / ((1.0 + s) * (0.5 - s))) / (2.0 * s))


def _weight(side: str, k: float):
    if side == "left":
        return lambda w: np.sinh(k * w)
    return lambda w: np.sinh(k * (1.0 - w))


def I_quadrature(side: str, f: ode.ModeSolution, p: SpectralParams, tol: float = DEFAULT_TOL) -> float:
    """Weighted integral of f / (w^2 - s^2) over one half-interval.

    The numerator sinh(k w) f(w) - sinh(k/2) vanishes at w = 1/2, so the
    regularized integrand is integrated adaptively and the remaining pole
    term is added in closed form.
    """
    if f.side != side:
        raise ValueError("mode solution does not match side")
    s = f.s
    k = f.k
    wt = _weight(side, k)
    top = np.sinh(0.5 * k)
    lo, hi = (0.0, 0.5) if side == "left" else (0.5, 1.0)
    gap = abs(s - 0.5)
    sgn = -1.0 if side == "left" else 1.0
    pts = [0.5 + sgn * c * gap for c in (1.0, 4.0, 16.0, 64.0)]
    pts = [q for q in pts if lo < q < hi]

    def reg(w):
        return (wt(w) * f(w) - top) / (w * w - s * s)

    val, err = integrate.quad(reg, lo, hi, points=pts or None, epsabs=tol, epsrel=tol, limit=400)
    return float(p.Cm_tilde * (val + top * pole_term(side, s)))


def I_standoff(side: str, f: ode.ModeSolution, p: SpectralParams, standoff: float = 1e-7) -> float:
    """Brute-force oracle: the unsplit integrand, stopped short of x = 1/2.

    Integrals up to distances d and 2d from 1/2 are combined by one
    Richardson step, which removes the error linear in d.
    """
    if f.side != side:
        raise ValueError("mode solution does not match side")
    s, wt = f.s, _weight(side, f.k)

    def raw(w):
        return wt(w) * f(w) / (w * w - s * s)

    def stop(d):
        lo, hi = (0.0, 0.5 - d) if side == "left" else (0.5 + d, 1.0)
        return integrate.quad(raw, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=400)[0]

    return float(p.Cm_tilde * (2.0 * stop(standoff) - stop(2.0 * standoff)))


def I_boundary(side: str, f: ode.ModeSolution, p: SpectralParams) -> float:
    """Same integral obtained by integrating by parts against the mode equation."""
    n, e = p.n, p.epsilon
    a = 0.5 - 0.5 * e
    sgn = 1.0 if side == "left" else -1.0
    return float(p.Cm_tilde * (0.5 * sgn * np.sinh(n * a) * f.half_derivative
                               - 0.5 * n * (1.0 - e) * np.cosh(n * a)))


@dataclass(frozen=True)
class ModePair:
    params: SpectralParams
    left: ode.ModeSolution
    right: ode.ModeSolution


def mode_pair(n: int, epsilon: float, mu_tilde: float) -> ModePair:
    p = spectral_params(epsilon, mu_tilde, n)
    return ModePair(p, ode.solve_mode_ode("left", n, epsilon, mu_tilde),
                    ode.solve_mode_ode("right", n, epsilon, mu_tilde))


def integrals(n: int, epsilon: float, mu_tilde: float, method: str = "quadrature",
              tol: float = DEFAULT_TOL) -> tuple[float, float]:
    pair = mode_pair(n, epsilon, mu_tilde)
    if method == "quadrature":
        return (I_quadrature("left", pair.left, pair.params, tol),
                I_quadrature("right", pair.right, pair.params, tol))
    if method == "boundary":
        return (I_boundary("left", pair.left, pair.params),
                I_boundary("right", pair.right, pair.params))
    raise ValueError(f"unknown method {method!r}")


def dispersion_matrix(n: int, epsilon: float, I1: float, I2: float) -> np.ndarray:
    a, b = 0.5 - 0.5 * epsilon, 0.5 + 0.5 * epsilon
    sa, sb = np.sinh(n * a), np.sinh(n * b)
    return np.array([[1.0 + sb * I1, sa * I2], [sa * I1, 1.0 + sb * I2]])


def determinant(n: int, epsilon: float, mu_tilde: float, method: str = "quadrature",
                tol: float = DEFAULT_TOL) -> float:
    """Dispersion determinant 1 + sinh(nb)(I1 + I2) + (sinh^2(nb) - sinh^2(na)) I1 I2."""
    I1, I2 = integrals(n, epsilon, mu_tilde, method, tol)
    a, b = 0.5 - 0.5 * epsilon, 0.5 + 0.5 * epsilon
    sa, sb = np.sinh(n * a), np.sinh(n * b)
    return float(1.0 + sb * (I1 + I2) + (sb * sb - sa * sa) * I1 * I2)


@dataclass(frozen=True)
class JumpCheck:
    lhs: float
    rhs: float
    diff: float


def cross_check_jump(n: int, epsilon: float, mu_tilde: float, tol: float = DEFAULT_TOL) -> JumpCheck:
    """(I1 + I2)/C_tilde by quadrature against the derivative jump at 1/2."""
    pair = mode_pair(n, epsilon, mu_tilde)
    p = pair.params
    lhs = (I_quadrature("left", pair.left, p, tol) + I_quadrature("right", pair.right, p, tol)) / p.Cm_tilde
    a = 0.5 - 0.5 * epsilon
    rhs = 0.5 * np.sinh(n * a) * (pair.left.half_derivative - pair.right.half_derivative)
    rhs -= n * (1.0 - epsilon) * np.cosh(n * a)
    return JumpCheck(float(lhs), float(rhs), float(lhs - rhs))


# ---------------------------------------------------------------- limit problem

_C1 = 2.0 / np.sinh(1.0)
_S = np.sinh(0.5)


@lru_cache(maxsize=1)
def _limit_integrals() -> tuple[float, float]:
    f0l, f0r = ode.solve_f0(1)
    opts = dict(epsabs=1e-13, epsrel=1e-13, limit=400)
    jl = integrate.quad(lambda x: (np.sinh(x) * f0l(x) - _S) / (x * x - 0.25), 0.0, 0.5, **opts)[0]
    jr = integrate.quad(lambda x: (np.sinh(1.0 - x) * f0r(x) - _S) / (x * x - 0.25), 0.5, 1.0, **opts)[0]
    return float(jl), float(jr)


def mu1_equation(mu1: float) -> float:
    """Left side of the limit equation whose root in (-1/2, 1/2) is mu1."""
    jl, jr = _limit_integrals()
    return float(1.0 + _C1 * _S * (jl + jr)
                 + _C1 * _S**2 * (np.log((1.0 + 2.0 * mu1) / (1.0 - 2.0 * mu1)) - np.log(3.0)))


@lru_cache(maxsize=1)
def solve_mu1() -> float:
    """Unique root of the limit equation in (-1/2, 1/2), by bisection.

    Raises:
        DispersionError: if the equation has no sign change on the interval.
    """
    lo, hi = -0.5 + 1e-15, 0.5 - 1e-15
    flo, fhi = mu1_equation(lo), mu1_equation(hi)
    if np.sign(flo) == np.sign(fhi):
        raise DispersionError(f"no sign change for mu1: f(lo)={flo}, f(hi)={fhi}")
    return float(optimize.bisect(mu1_equation, lo, hi, xtol=1e-16, rtol=8.9e-16, maxiter=200))


# ---------------------------------------------------------------- dispersion root


@dataclass(frozen=True)
class DispersionRoot:
    epsilon: float
    mu_tilde: float
    seed: float
    sign_changes: int
    det: float
    bracket: tuple[float, float]


def solve_mu_tilde(epsilon: float, tol: float = DEFAULT_TOL, scan: int = 100,
                   eps_max: float = EPS_MAX, xtol: float = 1e-15) -> DispersionRoot:
    """Root of the n = 1 determinant inside the admissible window.

    A scan with the integration-by-parts determinant (same function, far
    cheaper) locates sign changes; Brent's method then polishes the bracket
    closest to the seed 1/2 + (1/2 + mu1) eps on the quadrature determinant.

    Raises:
        DispersionError: if no sign change is found.
    """
    make_profile(epsilon, eps_max)
    lo, hi = mu_tilde_window(epsilon)
    grid = np.linspace(lo, hi, scan + 2)[1:-1]
    vals = np.array([determinant(1, epsilon, m, "boundary") for m in grid])
    changes = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(changes) == 0:
        raise DispersionError(
            f"no determinant root for eps={epsilon}: det={vals[0]:.3e} near the lower end, "
            f"{vals[-1]:.3e} near the upper end"
        )
    seed = 0.5 + (0.5 + solve_mu1()) * epsilon
    mids = 0.5 * (grid[changes] + grid[changes + 1])
    j = changes[int(np.argmin(np.abs(mids - seed)))]
    left, right = grid[j], grid[j + 1]

    def fun(m):
        return determinant(1, epsilon, m, "quadrature", tol)

    root = optimize.brentq(fun, left, right, xtol=xtol, rtol=8.9e-16, maxiter=200)
    return DispersionRoot(epsilon, float(root), float(seed), int(len(changes)), fun(root), (left, right))


def mu2_empirical(epsilon: float, mu_tilde: float, mu1: float) -> float:
    """Second-order coefficient implied by a computed root."""
    return (mu_tilde - 0.5 - (0.5 + mu1) * epsilon) / (epsilon**2 * np.log(epsilon) ** 2)


def expansion_limit(epsilons, mu_tildes) -> float:
    """Extrapolate (mu_tilde - 1/2)/eps to eps = 0.

    With three or more points the scaled values are fitted (least squares)
    by c0 + c1 eps log^2 eps + c2 eps |log eps|; with two points the last
    term is dropped. Returns c0.
    """
    e = np.asarray(epsilons, dtype=float)
    q = (np.asarray(mu_tildes, dtype=float) - 0.5) / e
    if len(e) < 2:
        raise ValueError("need at least two epsilon values")
    L = np.log(e)
    cols = [np.ones_like(e), e * L * L]
    if len(e) >= 3:
        cols.append(-e * L)
    coef = np.linalg.lstsq(np.stack(cols, axis=1), q, rcond=None)[0]
    return float(coef[0])


def amplitudes(epsilon: float, mu_tilde_star: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Unit null vector (A, B) of the dispersion matrix with A > 0.

    Raises:
        DispersionError: if the matrix is clearly nonsingular.
    """
    I1, I2 = integrals(1, epsilon, mu_tilde_star, "quadrature", tol)
    M = dispersion_matrix(1, epsilon, I1, I2)
    _, sv, vt = np.linalg.svd(M)
    if sv[-1] > 1e-6 * sv[0]:
        raise DispersionError(f"matrix not singular: singular values {sv}")
    A, B = vt[-1]
    if A < 0:
        A, B = -A, -B
    return float(A), float(B)


# ---------------------------------------------------------------- kernel element


@dataclass(frozen=True)
class KernelMode:
    epsilon: float
    mu_tilde_star: float
    mu1: float
    A: float
    B: float
    lambda_star: float
    f_left: ode.ModeSolution
    f_right: ode.ModeSolution
    profile: ShearProfile
    params: SpectralParams
    root: DispersionRoot = field(repr=False)

    @property
    def lambda_bar(self) -> float:
        return self.params.lambda_bar

    @property
    def mu2(self) -> float:
        return mu2_empirical(self.epsilon, self.mu_tilde_star, self.mu1)

    @property
    def left_gap(self) -> float:
        """Distance from y = a to the pole mu."""
        return self.params.mu - self.profile.a

    @property
    def right_gap(self) -> float:
        """Distance from the pole nu to y = b."""
        return self.profile.b - self.params.nu

    def evaluate(self, y):
        """Return (h, h') on [0, a] and [b, 1]; both are zero on the open plateau."""
        y = np.asarray(y, dtype=float)
        e, p = self.epsilon, self.params
        a, b = self.profile.a, self.profile.b
        h = np.zeros(y.shape)
        dh = np.zeros(y.shape)
        lm = y <= a
        if np.any(lm):
            yl = y[lm]
            f, df = self.f_left.evaluate(np.minimum(yl / (1.0 - e), 0.5))
            den = yl * yl - p.mu**2
            h[lm] = self.A * f / den
            dh[lm] = self.A * (df / (1.0 - e) * den - 2.0 * yl * f) / den**2
        rm = y >= b
        if np.any(rm):
            yr = y[rm]
            f, df = self.f_right.evaluate(np.maximum((yr - e) / (1.0 - e), 0.5))
            den = (yr - p.nu) * (yr - p.rho)
            h[rm] = self.B * f / den
            dh[rm] = self.B * (df / (1.0 - e) * den - (2.0 * yr - 2.0 * e) * f) / den**2
        if h.ndim == 0:
            return h[()], dh[()]
        return h, dh

    def h(self, y):
        return self.evaluate(y)[0]

    def h_prime(self, y):
        return self.evaluate(y)[1]


@lru_cache(maxsize=64)
def assemble_kernel_mode(epsilon: float, eps_max: float = EPS_MAX, tol: float = DEFAULT_TOL,
                         xtol: float = 1e-15) -> KernelMode:
    """Full pipeline: profile, dispersion root, amplitudes, kernel element, speed."""
    prof = make_profile(epsilon, eps_max)
    root = solve_mu_tilde(epsilon, tol, eps_max=eps_max, xtol=xtol)
    m = root.mu_tilde
    A, B = amplitudes(epsilon, m, tol)
    pair = mode_pair(1, epsilon, m)
    lam = prof.v_varpi - (1.0 - epsilon) ** 2 * m * m
    return KernelMode(epsilon, m, solve_mu1(), A, B, lam, pair.left, pair.right, prof, pair.params, root)


# ---------------------------------------------------------------- linear operator


def operator_grid(profile: ShearProfile, m: int = 512) -> np.ndarray:
    """m points, half Chebyshev-Lobatto on [0, a] and half on [b, 1]."""
    half = m // 2
    t = 0.5 - 0.5 * np.cos(np.pi * np.arange(half) / (half - 1))
    return np.concatenate([profile.a * t, profile.b + (1.0 - profile.b) * t])


def _support_breaks(profile: ShearProfile, gaps):
    a, b = profile.a, profile.b
    if gaps is None:
        return np.linspace(0.0, a, 9), np.linspace(b, 1.0, 9)
    return graded_breaks(0.0, a, a, gaps[0]), graded_breaks(b, 1.0, b, gaps[1])


def chi_green_apply(profile: ShearProfile, h, n: int, y, gaps=None, q: int = 20) -> np.ndarray:
    """int over [0, a] and [b, 1] of G_n(y, z) h(z) dz at every y.

    ``gaps`` gives the distances from a and b to the nearest singularity of h;
    panels are then graded geometrically toward those ends.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lb, rb = _support_breaks(profile, gaps)
    out = np.empty(len(y))
    for i, yi in enumerate(y):
        total = 0.0
        for br in (lb, rb):
            nodes, w = panel_rule(merge_breaks(br, [yi]), q)
            total += np.dot(w, green(n, yi, nodes) * h(nodes))
        out[i] = total
    return out


def _as_callable(profile: ShearProfile, h, y):
    if callable(h):
        return h
    samples = np.asarray(h, dtype=float)
    m = len(samples) // 2
    left = BarycentricInterpolator(y[:m], samples[:m])
    right = BarycentricInterpolator(y[m:], samples[m:])

    def interp(z):
        z = np.asarray(z, dtype=float)
        return np.where(z <= profile.a, left(np.minimum(z, profile.a)), right(np.maximum(z, profile.b)))

    return interp


def linear_operator_apply(lam: float, h, n: int, profile: ShearProfile, y=None, gaps=None):
    """(lam - psi0'(y)) h(y) + 2 int chi G_n(y, z) h(z) dz on the support grid.

    ``h`` is a callable or samples on ``operator_grid(profile, m)``; the
    result is returned on ``y`` (that grid by default).
    """
    from .profile import psi0_prime

    if y is None:
        y = operator_grid(profile, 512 if callable(h) else len(h))
    y = np.asarray(y, dtype=float)
    hf = _as_callable(profile, h, y)
    return (lam - psi0_prime(profile, y)) * hf(y) + 2.0 * chi_green_apply(profile, hf, n, y, gaps)


def operator_symmetry(lam: float, profile: ShearProfile, n: int = 1, pairs: int = 3,
                      seed: int = 0, q: int = 20, panels: int = 6) -> float:
    """Largest |<L h, g> - <h, L g>| over random smooth pairs on [0, a] and [b, 1].

    Test functions are random combinations of sin(j pi y) and polynomials;
    the outer inner products use a Gauss rule independent of the one inside
    the operator.
    """
    rng = np.random.default_rng(seed)
    nodes, w = [], []
    for lo, hi in ((0.0, profile.a), (profile.b, 1.0)):
        x, wx = panel_rule(np.linspace(lo, hi, panels + 1), q)
        nodes.append(x)
        w.append(wx)
    y, wy = np.concatenate(nodes), np.concatenate(w)

    def random_fn():
        c = rng.standard_normal(8)
        return lambda z: sum(c[j] * np.sin((j + 1) * np.pi * z) for j in range(4)) + np.polyval(c[4:], z)

    worst = 0.0
    for _ in range(pairs):
        h, g = random_fn(), random_fn()
        Lh = linear_operator_apply(lam, h, n, profile, y)
        Lg = linear_operator_apply(lam, g, n, profile, y)
        worst = max(worst, abs(float(np.dot(wy, Lh * g(y) - h(y) * Lg))))
    return worst


def integral_residual(mode: KernelMode, m: int = 512) -> float:
    """sup over the support grid of the kernel equations' residual."""
    y = operator_grid(mode.profile, m)
    e, lb = mode.epsilon, mode.lambda_bar
    coef = np.where(y <= mode.profile.a, y * y - lb, y * y - 2.0 * e * y + e - lb)
    gaps = (mode.left_gap, mode.right_gap)
    res = coef * mode.h(y) + 2.0 * chi_green_apply(mode.profile, mode.h, 1, y, gaps)
    return float(np.max(np.abs(res)))


def kernel_operator_residual(mode: KernelMode, m: int = 512) -> float:
    """sup |L_1^{lambda*} h*| on the support grid."""
    y = operator_grid(mode.profile, m)
    gaps = (mode.left_gap, mode.right_gap)
    return float(np.max(np.abs(linear_operator_apply(mode.lambda_star, mode.h, 1, mode.profile, y, gaps))))
