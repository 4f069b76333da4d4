from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poiseuille_waves import kernel, ode


def exact_pair(x0, k, d1, n):
    """First n coefficients of g1 and g2 in powers of t = x - x0, in exact arithmetic.

    Obtained by substituting the series into t (t + R) f'' = (2 + k^2 t (t + R)) f
    with R = 2 x0; for g2 = L g1 log|t| + sum d_j t^j the log part leaves the
    extra term L (t + R)(2 g1' - g1/t).
    """
    R, kk = 2 * x0, k * k
    a = [Fr(0), Fr(1)] + [Fr(0)] * n
    for m in range(1, n):
        # t^m:  R (m+1) m a_{m+1} + (m(m-1) - 2) a_m - k^2 (R a_{m-1} + a_{m-2}) = 0
        rest = (m * (m - 1) - 2) * a[m] - kk * (R * a[m - 1] + (a[m - 2] if m >= 2 else 0))
        a[m + 1] = -rest / (R * (m + 1) * m)
    d = [Fr(1), Fr(d1)] + [Fr(0)] * n
    L = 2 * d[0] / (R * a[1])
    for m in range(1, n):
        extra = L * ((2 * m - 1) * a[m] + R * (2 * m + 1) * a[m + 1])
        rest = (m * (m - 1) - 2) * d[m] - kk * (R * d[m - 1] + (d[m - 2] if m >= 2 else 0))
        d[m + 1] = -(rest + extra) / (R * (m + 1) * m)
    return a[: n + 1], d[: n + 1], L


def test_indicial_roots():
    assert np.allclose(ode.indicial_roots(0.5), [0.0, 1.0])
    assert np.allclose(ode.indicial_roots(0.52), [0.0, 1.0])


def test_log_series_coefficients_at_half():
    g1, g2 = ode.frobenius_pair(0.5, 1.0, d1=-1.0)
    a, _ = g1.coefficients()
    d, logc = g2.coefficients()
    assert d[2] == pytest.approx(-81 / 18, abs=1e-14)
    assert d[3] == pytest.approx(-23 / 18, abs=1e-14)
    # log coefficient 2 g2(0) / g1'(0)
    assert g2.log_multiplier == pytest.approx(2 * d[0] / a[1])
    assert np.allclose(logc, g2.log_multiplier * a)


@pytest.mark.parametrize("x0,k,d1", [(Fr(1, 2), Fr(1), -1), (Fr(1, 2), Fr(2), 0), (Fr(13, 25), Fr(19, 20), 0),
                                     (Fr(2, 5), Fr(3, 2), Fr(1, 3))])
def test_coefficients_match_exact_recurrence(x0, k, d1):
    ea, ed, L = exact_pair(x0, k, d1, 10)
    g1, g2 = ode.frobenius_pair(float(x0), float(k), d1=float(d1))
    a, _ = g1.coefficients()
    d, _ = g2.coefficients()
    assert np.allclose(a[:11], [float(v) for v in ea], rtol=1e-13, atol=1e-15)
    assert np.allclose(d[:11], [float(v) for v in ed], rtol=1e-13, atol=1e-15)
    assert g2.log_multiplier == pytest.approx(float(L), rel=1e-14)


@pytest.mark.parametrize("x0", [0.5, 0.513])
def test_series_residual_with_80_terms(x0):
    g1, g2 = ode.frobenius_pair(x0, 0.95, order=80)
    x = np.array([x0 - 0.2, x0 + 0.2])
    assert np.max(np.abs(g1.residual(x))) <= 1e-10
    assert np.max(np.abs(g2.residual(x))) <= 1e-10


def test_doubling_order_changes_little():
    x = np.array([0.05, 0.3, 0.49])
    lo = ode.frobenius_pair(0.5, 1.0, order=60)[1].evaluate(x)[0]
    hi = ode.frobenius_pair(0.5, 1.0, order=120)[1].evaluate(x)[0]
    assert np.max(np.abs(lo - hi)) <= 1e-12


def test_bad_center_rejected():
    with pytest.raises(ValueError):
        ode.frobenius_pair(-0.5, 1.0)


def test_series_error_names_index():
    with pytest.raises(ode.SeriesError, match="index"):
        ode.frobenius_pair(0.5, 1.0, reach=1.5)


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("n", [1, 2, 5])
def test_boundary_values(side, n, mu05):
    f = ode.solve_mode_ode(side, n, 0.05, mu05)
    assert abs(f.boundary_value) <= 1e-12
    assert f.half_value == pytest.approx(1.0, abs=1e-12)
    x = ode.half_grid(side, 512)[1:-1]
    assert np.all(f(x) > 0)


@pytest.mark.parametrize("eps", [0.1, 0.05, 0.01])
@pytest.mark.parametrize("side", ["left", "right"])
def test_matches_shooting(eps, side):
    m = kernel.solve_mu_tilde(eps).mu_tilde
    x = ode.half_grid(side, 300)
    for n in (1, 3):
        f = ode.solve_mode_ode(side, n, eps, m)
        assert np.max(np.abs(f(x) - ode.shoot_mode_ode(side, n, eps, m, x))) <= 1e-8


def test_right_side_near_window_edge_uses_patches():
    eps = 0.2
    lo, hi = kernel.mu_tilde_window(eps)
    m = lo + 0.02 * (hi - lo)  # small nu_tilde: singular series alone does not reach x = 1
    f = ode.solve_mode_ode("right", 1, eps, m)
    assert len(f.g1.pieces) > 1
    x = ode.half_grid("right", 200)
    assert np.max(np.abs(f(x) - ode.shoot_mode_ode("right", 1, eps, m, x))) <= 1e-8


def test_admissibility():
    with pytest.raises(ode.AdmissibilityError):
        ode.solve_mode_ode("left", 1, 0.05, 0.5)
    with pytest.raises(ode.AdmissibilityError):
        ode.solve_mode_ode("right", 1, 0.05, 0.1)
    f = ode.solve_mode_ode("left", 1, 0.05, 0.52)
    with pytest.raises(ode.AdmissibilityError):
        f(0.7)


def test_derivative_matches_finite_differences(mu05):
    # centered differences converge at second order towards the series derivative
    for side in ("left", "right"):
        f = ode.solve_mode_ode(side, 2, 0.05, mu05)
        x = np.linspace(*f.interval, 9)[1:-1]
        errs = []
        for h in (1e-3, 5e-4, 2.5e-4):
            fd = (f(x + h) - f(x - h)) / (2 * h)
            errs.append(np.max(np.abs(fd - f.derivative(x))))
        assert errs[2] < 1e-4
        assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def test_limit_solution():
    left, right = ode.solve_f0()
    assert abs(left.boundary_value) < 1e-12 and abs(right.boundary_value) < 1e-12
    assert left.half_value == pytest.approx(1.0) and right.half_value == pytest.approx(1.0)
    assert left(0.5) == pytest.approx(right(0.5), abs=1e-12)


def test_limit_wronskian_is_one():
    for f0 in ode.solve_f0():
        x = ode.half_grid(f0.side, 256)
        x = x[x != 0.5]
        w = ode.wronskian(f0, f0.g1, x)
        assert np.max(np.abs(w - 1.0)) <= 1e-9


def test_wronskian_antisymmetry(mu05):
    f = ode.solve_mode_ode("left", 1, 0.05, mu05)
    x = np.linspace(0, 0.5, 11)
    assert np.all(ode.wronskian(f, f, x) == 0.0)
    assert np.allclose(ode.wronskian(f, f.g1, x), -ode.wronskian(f.g1, f, x))


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.505, max_value=0.55), st.integers(1, 4))
def test_wronskian_constant(mu, n):
    f = ode.solve_mode_ode("left", n, 0.05, mu)
    w = ode.wronskian(f, f.g1, ode.half_grid("left", 64))
    assert np.ptp(w) <= 1e-9 * max(1.0, np.max(np.abs(w)))


def test_difference_to_limit_shrinks():
    sups = []
    for eps in (1e-2, 3e-3, 1e-3):
        m = kernel.solve_mu_tilde(eps).mu_tilde
        f = ode.solve_mode_ode("left", 1, eps, m)
        dist = ode.difference_to_limit(eps, f)
        assert dist.ratio < 1.0  # bounded by a modest constant
        sups.append(dist.sup)
    assert sups[0] > sups[1] > sups[2]
    f0 = ode.solve_f0()[0]
    assert abs(f(0.0) - f0(0.0)) < 1e-14


def test_difference_to_limit_sides_must_match(mu05):
    f = ode.solve_mode_ode("left", 1, 0.05, mu05)
    with pytest.raises(ValueError):
        ode.difference_to_limit(0.05, f, limit=ode.solve_f0()[1])
