"""Frobenius-series solutions of the mode equations.

The mode equation is

    f'' = (2 / (x^2 - s^2) + k^2) f,

with a regular singular point at x = s (indicial roots 0 and 1) and its
mirror at x = -s. Multiplying by x^2 - s^2 and writing t = x - s gives the
three-term-plus recurrence used below. Coefficients are stored for the
scaled variable tau = t / R with R = 2 s (the distance to the mirror pole), so
their size stays O(1) whatever s is.

The left problem lives on [0, 1/2] with s = mu_tilde > 1/2, the right one
on [1/2, 1] with s = nu_tilde < 1/2. When nu_tilde is small the point x = 1
lies beyond a comfortable fraction of the series radius, and the basis is
continued by Taylor patches about ordinary points.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

N_CAP = 200
FROBENIUS_REACH = 0.75  # fraction of the radius the singular series is trusted on
PATCH_REACH = 0.5  # same for ordinary-point patches
TAIL_TOL = 1e-17


def _power_sums(tau: np.ndarray, cols: np.ndarray, chunk: int = 16384) -> np.ndarray:
    """Evaluate several power series in tau at once (columns of ``cols``)."""
    n = cols.shape[0]
    out = np.empty((tau.size, cols.shape[1]))
    for start in range(0, tau.size, chunk):
        tt = tau[start : start + chunk]
        powers = np.empty((tt.size, n))
        powers[:, 0] = 1.0
        if n > 1:
            powers[:, 1:] = tt[:, None]
            np.cumprod(powers[:, 1:], axis=1, out=powers[:, 1:])
        out[start : start + chunk] = powers @ cols
    return out


class SeriesError(RuntimeError):
    """Recurrence blow-up or non-convergent tail."""


class AdmissibilityError(ValueError):
    """Pole parameters outside the window where the half-intervals are regular."""


class SingularSystemError(RuntimeError):
    """The 2x2 boundary system could not be solved."""


def indicial_roots(x0: float = 0.5) -> np.ndarray:
    """Roots of the indicial polynomial 2 x0 r (r - 1)."""
    return np.sort(np.roots([2.0 * x0, -2.0 * x0, 0.0]).real)


def _truncation(terms: np.ndarray, reach: float, what: str) -> int:
    """Smallest order after which the geometric tail is negligible at ``reach``."""
    mags = terms * reach ** np.arange(len(terms))
    scale = max(float(np.max(mags[:8])), 1e-300)
    small = mags <= TAIL_TOL * scale
    # require a run of small terms to guard against isolated zeros
    run = 6
    for n in range(8, len(mags) - run):
        if small[n : n + run].all():
            return n + run
    bad = int(np.argmax(mags[len(mags) // 2 :])) + len(mags) // 2
    raise SeriesError(f"{what}: tail not converged by N={len(mags) - 1} (largest term at index {bad})")


@dataclass(frozen=True)
class PowerLogSeries:
    """Sum_j a_j tau^j + log|x - center| * Sum_j b_j tau^j with tau = (x - center) / scale."""

    center: float
    scale: float
    analytic: np.ndarray
    log: np.ndarray
    reach: float

    @property
    def order(self) -> int:
        return len(self.analytic) - 1

    def covers(self, x) -> np.ndarray:
        return np.abs(np.asarray(x) - self.center) <= self.reach * self.scale * (1 + 1e-12)

    def _columns(self) -> np.ndarray:
        cols = getattr(self, "_cols", None)
        if cols is None:
            a, b = self.analytic, self.log
            n = len(a)
            cols = np.zeros((n, 4))
            cols[:, 0] = a
            cols[:-1, 1] = P.polyder(a)
            cols[:, 2] = b
            if n > 1:
                cols[:-1, 3] = P.polyder(b)
            object.__setattr__(self, "_cols", cols)
        return cols

    def evaluate(self, x):
        """Return (value, derivative) at x."""
        t = np.asarray(x, dtype=float) - self.center
        tau = (t / self.scale).ravel()
        sums = _power_sums(tau, self._columns()).reshape(t.shape + (4,))
        val = sums[..., 0]
        der = sums[..., 1] / self.scale
        if np.any(self.log):
            b1 = self.log[1]
            with np.errstate(divide="ignore", invalid="ignore"):
                lt = np.where(t != 0.0, np.log(np.abs(t)), 0.0)
                sing = np.where(t != 0.0, lt, -np.inf)
                # sum_j b_j tau^(j-1) = (sum_j b_j tau^j) / tau, exact at tau = 0
                quot = np.where(tau.reshape(t.shape) != 0.0, sums[..., 2] / (t / self.scale), b1)
            val = val + lt * sums[..., 2]
            der = der + (sing * sums[..., 3] + quot) / self.scale
        return val, der

    def second_derivative(self, x):
        t = np.asarray(x, dtype=float) - self.center
        tau = t / self.scale
        a, b = self.analytic, self.log
        out = P.polyval(tau, P.polyder(a, 2))
        if np.any(b):
            j = np.arange(len(b))
            with np.errstate(divide="ignore", invalid="ignore"):
                lt = np.log(np.abs(t))
                extra = P.polyval(tau, ((2 * j - 1) * b)[1:]) / tau
                out = out + lt * P.polyval(tau, P.polyder(b, 2)) + extra
        return out / self.scale**2

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients in powers of (x - center) rather than tau."""
        pw = self.scale ** -np.arange(len(self.analytic), dtype=float)
        return self.analytic * pw, self.log * pw


@dataclass(frozen=True)
class FrobeniusSeries(PowerLogSeries):
    """Series solution about the regular singular point x0 = center."""

    k: float = 0.0
    log_multiplier: float = 0.0  # L in L g1 log|x - x0|; zero for the analytic solution

    @property
    def other_pole(self) -> float:
        return -self.center

    @property
    def radius(self) -> float:
        return 2.0 * self.center

    def residual(self, x):
        """Left minus right side of the mode equation."""
        v, _ = self.evaluate(x)
        x = np.asarray(x, dtype=float)
        return self.second_derivative(x) - (2.0 / (x**2 - self.center**2) + self.k**2) * v


def _g1_scaled(k: float, R: float, N: int) -> np.ndarray:
    kk = (k * R) ** 2
    a = np.zeros(N + 1)
    a[1] = R  # g1 = t + ... , i.e. leading coefficient one in t
    for n in range(2, N + 1):
        s = ((n - 1) * (n - 2) - 2) * a[n - 1] - kk * (a[n - 2] + (a[n - 3] if n >= 3 else 0.0))
        a[n] = -s / (n * (n - 1))
    return a


def _g2_scaled(a: np.ndarray, k: float, R: float, d1: float):
    N = len(a) - 1
    kk = (k * R) ** 2
    d = np.zeros(N + 1)
    d[0] = 1.0
    d[1] = d1 * R
    L = 2.0 * d[0] / a[1]
    for n in range(2, N + 1):
        s = ((n - 1) * (n - 2) - 2) * d[n - 1] - kk * (d[n - 2] + (d[n - 3] if n >= 3 else 0.0))
        s += L * ((2 * n - 1) * a[n] + (2 * n - 3) * a[n - 1])
        d[n] = -s / (n * (n - 1))
    return d, L


def frobenius_pair(x0: float, k: float, reach: float = FROBENIUS_REACH, d1: float = 0.0, order: int | None = None):
    """Analytic solution g1 = t + ... and logarithmic solution g2 = 1 + d1 t + ... about x0.

    g2 = L g1 log|t| + sum_j d_j t^j with d_0 = 1; substituting into the
    recurrence forces L = d_0 / (x0 g1'(x0)), which is 2 d_0 / g1' at x0 = 1/2.

    Raises:
        SeriesError: if the tails do not decay within the hard cap N = 200.
    """
    if x0 <= 0 or k < 0:
        raise ValueError("need x0 > 0 and k >= 0")
    R = 2.0 * x0
    a = _g1_scaled(k, R, N_CAP)
    d, L = _g2_scaled(a, k, R, d1)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(d))):
        raise SeriesError("recurrence overflow")
    if order is None:
        log_fac = 1.0 + abs(np.log(max(reach * R, 1e-300)))
        na = _truncation(np.abs(a), reach, "g1")
        nd = _truncation(np.abs(d) + abs(L) * np.abs(a) * log_fac, reach, "g2")
        order = max(na, nd)
    order = min(order, N_CAP)
    a, d = a[: order + 1].copy(), d[: order + 1].copy()
    zero = np.zeros_like(a)
    g1 = FrobeniusSeries(x0, R, a, zero, reach, k=k, log_multiplier=0.0)
    g2 = FrobeniusSeries(x0, R, d, L * a, reach, k=k, log_multiplier=L)
    return g1, g2


def _taylor_patch(c: float, s: float, k: float, value: float, slope: float) -> PowerLogSeries:
    """Taylor expansion about the ordinary point c of the solution with given data."""
    R = min(abs(c - s), abs(c + s))
    alpha, beta = c * c - s * s, 2.0 * c
    kk = k * k
    cs = np.zeros(N_CAP + 1)
    cs[0], cs[1] = value, slope * R
    for m in range(0, N_CAP - 1):
        rhs = -beta * R * (m + 1) * m * cs[m + 1]
        rhs -= R**2 * (m * (m - 1) - 2 - kk * alpha) * cs[m]
        if m >= 1:
            rhs += kk * beta * R**3 * cs[m - 1]
        if m >= 2:
            rhs += kk * R**4 * cs[m - 2]
        cs[m + 2] = rhs / (alpha * (m + 2) * (m + 1))
    n = _truncation(np.abs(cs), PATCH_REACH, "taylor patch")
    cs = cs[: n + 1]
    return PowerLogSeries(c, R, cs, np.zeros_like(cs), PATCH_REACH)


@dataclass(frozen=True)
class ContinuedSolution:
    """A basis solution given by a singular series plus optional Taylor patches."""

    pieces: tuple

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        val = np.full(x.shape, np.nan)
        der = np.full(x.shape, np.nan)
        done = np.zeros(x.shape, dtype=bool)
        for piece in self.pieces:
            m = piece.covers(x) & ~done
            if np.any(m):
                v, d = piece.evaluate(x[m])
                val[m], der[m] = v, d
                done |= m
        if not done.all():
            raise AdmissibilityError("evaluation point outside the continued domain")
        return (val[()], der[()]) if val.ndim == 0 else (val, der)


def _continue_right(series: FrobeniusSeries, s: float, k: float, end: float) -> ContinuedSolution:
    pieces = [series]
    edge = s + series.reach * series.scale
    last = series
    while edge < end:
        v, d = last.evaluate(edge)
        patch = _taylor_patch(edge, s, k, float(v), float(d))
        pieces.append(patch)
        last = patch
        edge = edge + patch.reach * patch.scale
    return ContinuedSolution(tuple(pieces))


@dataclass(frozen=True)
class ModeSolution:
    """Solution of the mode equation on one half-interval with f = 0 at the wall and f = 1 at 1/2."""

    side: str
    n: int
    epsilon: float
    s: float
    k: float
    g1: ContinuedSolution
    g2: ContinuedSolution
    c1: float
    c2: float
    boundary_value: float = field(init=False)
    half_value: float = field(init=False)
    half_derivative: float = field(init=False)

    def __post_init__(self):
        wall = 0.0 if self.side == "left" else 1.0
        object.__setattr__(self, "boundary_value", float(self.evaluate(wall)[0]))
        v, d = self.evaluate(0.5)
        object.__setattr__(self, "half_value", float(v))
        object.__setattr__(self, "half_derivative", float(d))

    @property
    def interval(self) -> tuple[float, float]:
        return (0.0, 0.5) if self.side == "left" else (0.5, 1.0)

    def evaluate(self, x):
        """Return (f, f') at points of the closed half-interval."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval
        if np.any(x < lo - 1e-14) or np.any(x > hi + 1e-14):
            raise AdmissibilityError(f"points outside [{lo}, {hi}]")
        v1, d1 = self.g1.evaluate(x)
        v2, d2 = self.g2.evaluate(x)
        return self.c1 * v1 + self.c2 * v2, self.c1 * d1 + self.c2 * d2

    def __call__(self, x):
        return self.evaluate(x)[0]

    def derivative(self, x):
        return self.evaluate(x)[1]


def _build(side: str, n: int, epsilon: float, s: float, k: float, d1: float = 0.0) -> ModeSolution:
    g1s, g2s = frobenius_pair(s, k, d1=d1)
    if side == "left":
        g1, g2 = ContinuedSolution((g1s,)), ContinuedSolution((g2s,))
        wall = 0.0
    else:
        g1 = _continue_right(g1s, s, k, 1.0)
        g2 = _continue_right(g2s, s, k, 1.0)
        wall = 1.0
    M = np.array(
        [[g1.evaluate(wall)[0], g2.evaluate(wall)[0]],
         [g1.evaluate(0.5)[0], g2.evaluate(0.5)[0]]]
    )
    if not np.all(np.isfinite(M)) or abs(np.linalg.det(M)) <= 1e-14 * np.max(np.abs(M)) ** 2:
        raise SingularSystemError(f"boundary system singular for side={side}, s={s}")
    c1, c2 = np.linalg.solve(M, [0.0, 1.0])
    return ModeSolution(side, n, epsilon, s, k, g1, g2, float(c1), float(c2))


def right_pole(epsilon: float, mu_tilde: float) -> float:
    """nu_tilde = sqrt(mu_tilde^2 - eps/(1 - eps))."""
    sq = mu_tilde**2 - epsilon / (1.0 - epsilon)
    if sq <= 0:
        raise AdmissibilityError("mu_tilde^2 <= eps/(1-eps): right pole not real")
    return float(np.sqrt(sq))


def solve_mode_ode(side: str, n: int, epsilon: float, mu_tilde: float) -> ModeSolution:
    """Solve the left or right mode problem for wavenumber k = (1 - eps) n.

    Raises:
        AdmissibilityError: if mu_tilde <= 1/2 (left) or nu_tilde >= 1/2 (right).
        SingularSystemError: if the boundary system is singular.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if n < 1:
        raise ValueError("mode index must be >= 1")
    k = (1.0 - epsilon) * n
    if side == "left":
        if not mu_tilde > 0.5:
            raise AdmissibilityError(f"left pole mu_tilde={mu_tilde} must exceed 1/2")
        return _build(side, n, epsilon, float(mu_tilde), k)
    nu = right_pole(epsilon, mu_tilde)
    if not nu < 0.5:
        raise AdmissibilityError(f"right pole nu_tilde={nu} must be below 1/2")
    return _build(side, n, epsilon, nu, k)


def solve_f0(n: int = 1, d1: float = 0.0) -> tuple[ModeSolution, ModeSolution]:
    """Limit problem with the singular point at x = 1/2 itself and k = n.

    n = 1 gives f0; n = 2 gives its analogue for the second mode.
    """
    left = _build("left", n, 0.0, 0.5, float(n), d1)
    right = _build("right", n, 0.0, 0.5, float(n), d1)
    return left, right


def wronskian(u, v, x):
    """u v' - u' v for objects exposing evaluate(x) -> (value, derivative)."""
    uv, ud = u.evaluate(x)
    vv, vd = v.evaluate(x)
    return uv * vd - ud * vv


def half_grid(side: str, m: int = 512) -> np.ndarray:
    """Chebyshev-clustered grid on the closed half-interval."""
    t = 0.5 - 0.5 * np.cos(np.pi * np.arange(m) / (m - 1))
    return 0.5 * t if side == "left" else 0.5 + 0.5 * t


@dataclass(frozen=True)
class LimitDistance:
    sup: float
    ratio: float


def difference_to_limit(epsilon: float, mode_solution: ModeSolution, limit: ModeSolution | None = None,
                        m: int = 2000, exclude: float = 1e-6) -> LimitDistance:
    """sup |f - f0| on the half-interval away from 1/2, and that sup over eps log(1/eps)."""
    if limit is None:
        pair = solve_f0(mode_solution.n)
        limit = pair[0] if mode_solution.side == "left" else pair[1]
    if limit.side != mode_solution.side:
        raise ValueError("sides do not match")
    x = half_grid(mode_solution.side, m)
    x = x[np.abs(x - 0.5) >= exclude]
    d = np.abs(mode_solution(x) - limit(x))
    sup = float(np.max(d))
    return LimitDistance(sup, sup / (epsilon * np.log(1.0 / epsilon)))


def shoot_mode_ode(side: str, n: int, epsilon: float, mu_tilde: float, x, rtol: float = 1e-13):
    """Reference solution by explicit high-order integration from the wall.

    Starts at the regular endpoint with f = 0 and unit slope, integrates with
    DOP853 to x = 1/2 and rescales so that f(1/2) = 1.
    """
    from scipy.integrate import solve_ivp

    k = (1.0 - epsilon) * n
    s = mu_tilde if side == "left" else right_pole(epsilon, mu_tilde)
    wall, slope = (0.0, 1.0) if side == "left" else (1.0, -1.0)

    def rhs(t, yv):
        return [yv[1], (2.0 / (t * t - s * s) + k * k) * yv[0]]

    x = np.atleast_1d(np.asarray(x, dtype=float))
    # t_eval must be strictly monotone from the wall towards 1/2
    dist, inv = np.unique(np.abs(np.append(x, 0.5) - wall), return_inverse=True)
    pts = wall + np.sign(0.5 - wall) * dist
    sol = solve_ivp(rhs, (wall, 0.5), [0.0, slope], method="DOP853", rtol=rtol, atol=1e-15,
                    t_eval=pts, dense_output=False)
    if not sol.success:
        raise RuntimeError(sol.message)
    vals = sol.y[0][inv]
    return vals[:-1] / vals[-1]
