import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from poiseuille_waves import profile as P

eps_st = st.floats(min_value=1e-4, max_value=0.2)


def test_plateau_edges():
    p = P.make_profile(0.1)
    assert p.a == pytest.approx(0.45) and p.b == pytest.approx(0.55)


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.25, float("nan")])
def test_rejects_bad_epsilon(eps):
    with pytest.raises(P.ProfileError, match="epsilon"):
        P.make_profile(eps)


def test_eps_max_is_configurable():
    assert P.make_profile(0.3, eps_max=0.4).epsilon == 0.3


def test_v_varpi_value_at_tenth():
    # -int u - 1/3 at eps = 0.1, integral done by hand piecewise
    assert P.make_profile(0.1).v_varpi == pytest.approx(-0.025083333333333, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(eps_st)
def test_v_varpi_matches_quadrature(eps):
    p = P.make_profile(eps)
    pts = [(0, p.a), (p.a, p.b), (p.b, 1)]
    total = sum(integrate.quad(lambda y: P.u_velocity(p, y), lo, hi, epsabs=1e-14)[0] for lo, hi in pts)
    assert p.v_varpi == pytest.approx(-total - 1 / 3, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(eps_st)
def test_psi0_boundary_values(eps):
    p = P.make_profile(eps)
    assert abs(P.psi0(p, 0.0)) < 1e-15
    assert P.psi0(p, 1.0) == pytest.approx(-1 / 3, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(eps_st, st.floats(min_value=0.01, max_value=0.99))
def test_psi0_derivatives(eps, y):
    p = P.make_profile(eps)
    h = 1e-6
    assert (P.psi0(p, y + h) - P.psi0(p, y - h)) / (2 * h) == pytest.approx(P.psi0_prime(p, y), abs=1e-8)
    if abs(y - p.a) > 2e-4 and abs(y - p.b) > 2e-4:
        h = 1e-4
        fd = (P.u_velocity(p, y + h) - P.u_velocity(p, y - h)) / (2 * h)
        assert fd == pytest.approx(P.varpi(p, y), abs=1e-9)


def test_varpi_continuous_and_flat():
    p = P.make_profile(0.1)
    assert P.varpi(p, p.a) == pytest.approx(-2 * p.a)
    assert P.varpi(p, p.b) == pytest.approx(-2 * p.a)
    y = np.linspace(p.a, p.b, 7)
    assert np.all(P.varpi_prime(p, y[1:-1]) == 0.0)
    assert np.all(P.varpi_prime(p, np.array([0.1, 0.9])) == -2.0)


def test_varpi_top_value():
    p = P.make_profile(0.1)
    assert P.varpi(p, 1.0) == pytest.approx(-2 * (1 - p.b) - 2 * p.a)


def test_domain_check():
    p = P.make_profile(0.1)
    with pytest.raises(P.ProfileError):
        P.varpi(p, 1.5)


def test_admissible_window():
    p = P.make_profile(0.1)
    lo, hi = p.window
    assert lo == pytest.approx(0.45**2) and hi == pytest.approx(0.55**2 - 0.01)
    assert lo < hi
