import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poiseuille_waves import greens as G
from poiseuille_waves.profile import make_profile, psi0, varpi


def naive_green(n, y, z):
    lo, hi = min(y, z), max(y, z)
    return np.sinh(n * lo) * np.sinh(n * (1 - hi)) / (n * np.sinh(n))


def test_green_value():
    assert G.green(1, 0.25, 0.75) == pytest.approx(naive_green(1, 0.25, 0.75), rel=1e-14)
    assert G.green(1, 0.25, 0.75) == pytest.approx(0.0542996, abs=5e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.floats(0, 1), st.floats(0, 1))
def test_green_symmetric_and_matches_naive(n, y, z):
    assert G.green(n, y, z) == G.green(n, z, y)
    assert G.green(n, y, z) == pytest.approx(naive_green(n, y, z), rel=1e-12, abs=1e-300)


def test_green_large_n_no_overflow():
    val = G.green(2000, 0.5, 0.5)
    assert np.isfinite(val) and val == pytest.approx(1 / (2 * 2000), rel=1e-12)


def test_green_vanishes_on_walls():
    z = np.linspace(0, 1, 11)
    assert np.all(G.green(3, 0.0, z) == 0) and np.all(G.green(3, 1.0, z) == 0)
    assert np.all(G.green0(0.0, z) == 0)


def test_green_rejects_mean_mode():
    with pytest.raises(ValueError):
        G.green(0, 0.2, 0.3)


@pytest.mark.parametrize("n", [0, 1, 2, 7])
@pytest.mark.parametrize("z", [0.1, 0.5, 0.77])
def test_distributional_identity(n, z):
    phi = lambda t: np.sin(np.pi * t) * np.exp(t)
    val = G.greens_distributional_check(n, z, phi)
    assert val == pytest.approx(-phi(z), abs=1e-6)  # finite-difference phi''


@pytest.mark.parametrize("n", [1, 4])
def test_solve_mode_manufactured(n):
    y = np.linspace(0, 1, 9)
    phi = G.solve_mode(n, lambda t: np.sin(np.pi * t), y)
    assert np.allclose(phi, np.sin(np.pi * y) / (np.pi**2 + n**2), atol=1e-13)


def test_solve_mode_piecewise_rhs_with_breakpoint():
    # rhs = 1 on (0.4, 1]; exact solution via explicit quadrature of the Green's function
    y = np.array([0.2, 0.4, 0.7])
    phi = G.solve_mode(2, lambda t: (t > 0.4).astype(float), y, breakpoints=[0.4])
    from scipy.integrate import quad

    ref = [quad(lambda z: naive_green(2, yi, z), 0.4, 1, points=[yi], epsabs=1e-14)[0] for yi in y]
    assert np.allclose(phi, ref, atol=1e-13)


@pytest.mark.parametrize("n", [0, 2])
def test_mode_problem_boundary_values(n):
    prob = G.ModePoissonProblem(n, lambda t: 0 * t, bc0=1.5, bc1=-0.5)
    y = np.array([0.0, 0.3, 1.0])
    sol = prob.solve(y)
    assert sol[0] == pytest.approx(1.5) and sol[-1] == pytest.approx(-0.5)
    if n == 2:
        exact = (1.5 * np.sinh(2 * (1 - 0.3)) - 0.5 * np.sinh(0.6)) / np.sinh(2)
        assert sol[1] == pytest.approx(exact, abs=1e-14)


def test_channel_poisson_manufactured():
    # psi = -y/3 + sin(pi y) cos 2x + y(1-y) sin 3x, omega = Laplacian(psi)
    def psi(x, y):
        return -y / 3 + np.sin(np.pi * y) * np.cos(2 * x) + y * (1 - y) * np.sin(3 * x)

    def omega(x, y):
        return (-(np.pi**2 + 4) * np.sin(np.pi * y) * np.cos(2 * x)
                - (2 + 9 * y * (1 - y)) * np.sin(3 * x))

    y = np.linspace(0, 1, 33)
    sol = G.solve_channel_poisson(omega, nx=32, y=y)
    X, Y = np.meshgrid(sol.x, y, indexing="ij")
    assert np.max(np.abs(sol.psi - psi(X, Y))) < 1e-13
    dpsi = -1 / 3 + np.pi * np.cos(np.pi * Y) * np.cos(2 * X) + (1 - 2 * Y) * np.sin(3 * X)
    assert np.max(np.abs(sol.psi_y - dpsi)) < 1e-12
    assert np.max(np.abs(sol.psi_xx - (-4 * np.sin(np.pi * Y) * np.cos(2 * X) - 9 * Y * (1 - Y) * np.sin(3 * X)))) < 1e-12


def test_channel_poisson_background_profile():
    p = make_profile(0.1)
    y = np.linspace(0, 1, 41)
    kinks = lambda x: np.tile([p.a, p.b], (len(x), 1))
    sol = G.solve_channel_poisson(lambda x, z: varpi(p, z), nx=16, y=y, kinks=kinks)
    assert np.max(np.abs(sol.psi - psi0(p, y)[None, :])) < 1e-14


def test_channel_poisson_zero_vorticity_is_linear():
    y = np.linspace(0, 1, 5)
    sol = G.solve_channel_poisson(np.zeros((16, 5)), y=y)
    assert np.allclose(sol.psi, -y[None, :] / 3, atol=1e-15)


def test_channel_poisson_sampled_input():
    y = np.linspace(0, 1, 201)
    om = -np.pi**2 * np.sin(np.pi * y)[None, :] * np.ones((16, 1))
    sol = G.solve_channel_poisson(om, y=y)
    assert np.max(np.abs(sol.psi - (np.sin(np.pi * y) - y / 3)[None, :])) < 1e-8


def test_channel_poisson_rejects_coarse_grid():
    with pytest.raises(ValueError, match="coarse"):
        G.solve_channel_poisson(lambda x, z: 0 * z, nx=8, y=np.linspace(0, 1, 5))
