import json

import numpy as np
import pytest

from poiseuille_waves import profile, wave


@pytest.fixture(scope="module")
def disp(mode05):
    return wave.displacement(mode05, 0.05)


def test_amplitude_precondition(mode05):
    with pytest.raises(wave.AmplitudeError):
        wave.displacement(mode05, 0.5)
    with pytest.raises(wave.AmplitudeError):
        wave.displacement(mode05, -0.7)
    with pytest.raises(ValueError):
        wave.displacement(mode05, 0.1, tol=0.0)


def test_rescaled_derivative_is_unit(disp, mode05):
    y = np.linspace(0.0, 1.0, 4001)
    y = y[(y < mode05.profile.a) | (y > mode05.profile.b)]
    y = np.concatenate([y, [mode05.profile.a, mode05.profile.b]])
    assert np.max(np.abs(disp.shape(y)[1])) == pytest.approx(1.0, rel=1e-3)


def test_level_map_monotone(mode05):
    d = wave.displacement(mode05, 0.49)
    y = np.linspace(0.0, mode05.profile.a, 2001)
    for x in (0.0, np.pi):
        assert np.all(np.diff(y + d(x, y)) > 0)


@pytest.mark.parametrize("lower", [True, False])
def test_invert_levels_round_trip(disp, lower):
    rng = np.random.default_rng(1)
    lo, hi = (0.0, disp.a) if lower else (disp.b, 1.0)
    zeta = rng.uniform(lo, hi, 200)
    x = rng.uniform(0, 2 * np.pi, 200)
    z = zeta + disp(x, zeta)
    back = wave.invert_levels(disp, x, z, lower)
    assert np.max(np.abs(back - zeta)) <= 1e-13


def test_zero_amplitude_reproduces_profile(mode05):
    fld = wave.assemble_wave_field(mode05, 0.0, nx=16, ny=41)
    p = mode05.profile
    expected = np.sign(fld.y) * profile.varpi(p, np.abs(fld.y))
    assert np.max(np.abs(fld.omega - expected[None, :])) <= 1e-14
    assert wave.l2_deviation(fld) == pytest.approx(wave.l2_deviation_exact(0.05), rel=1e-10)


@pytest.mark.parametrize("lower", [True, False])
def test_invert_levels_exact_at_bracket_ends(disp, lower):
    ends = np.array([0.0, disp.a]) if lower else np.array([disp.b, 1.0])
    z = ends + disp(np.zeros(2), ends)
    assert np.allclose(wave.invert_levels(disp, np.zeros(2), z, lower), ends, atol=1e-15)


def test_vorticity_is_odd(mode05):
    fld = wave.push_forward_vorticity(mode05, 0.1, nx=16, ny=41)
    assert np.allclose(fld.omega, -fld.omega[:, ::-1], atol=1e-15)


@pytest.fixture(scope="module")
def field(mode05):
    return wave.assemble_wave_field(mode05, 0.1, nx=32, ny=65)


def test_stream_function_boundary_values(field):
    assert np.allclose(field.psi[:, -1], -1.0 / 3.0, atol=1e-13)
    assert np.allclose(field.psi[:, 0], 1.0 / 3.0, atol=1e-13)
    assert np.allclose(field.psi[:, 32], 0.0, atol=1e-15)


def test_circulation_constant(disp):
    sol = wave.stream_function(disp, 32, np.linspace(0.0, 1.0, 257))
    assert np.allclose(wave.circulation(sol), 2.0 / 3.0, atol=1e-6)


def test_residual_vanishes_at_zero_amplitude(mode05):
    assert wave.nonlinear_residual(mode05, 0.0, nx=16, ny=65) <= 1e-15


def test_residual_quadratic_in_sigma(mode05):
    r = wave.residual_slope(mode05, (0.02, 0.01), nx=32, ny=129)
    assert 1.8 <= r.slope <= 2.2


def test_residual_linear_with_wrong_speed(mode05):
    r = wave.residual_slope(mode05, (0.02, 0.01), nx=32, ny=129, lam=mode05.lambda_star + 0.05)
    assert 0.9 <= r.slope <= 1.1


def test_slobodeckij_constant_is_zero():
    assert wave.slobodeckij(np.full((8, 8, 1), 3.0), 0.4) == 0.0


def test_slobodeckij_scales_linearly():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(8, 8, 1))
    assert wave.slobodeckij(2.0 * v, 0.4) == pytest.approx(2.0 * wave.slobodeckij(v, 0.4), rel=1e-12)


def test_sobolev_distance_gamma_range(field):
    with pytest.raises(ValueError):
        wave.sobolev_distance(field, 1.5)
    assert wave.sobolev_distance(field, 0.0) == pytest.approx(wave.l2_deviation(field))


def test_sobolev_distance_grows_with_gamma(mode05):
    fld = wave.assemble_wave_field(mode05, 0.05, nx=32, ny=33)
    d = [wave.sobolev_distance(fld, g, m=16) for g in (0.0, 0.5, 1.0)]
    assert d[0] < d[1] and d[0] < d[2]


def test_export_field(tmp_path, mode05):
    fld = wave.assemble_wave_field(mode05, 0.05, nx=16, ny=9)
    csv_path, side = wave.export_field(fld, tmp_path / "sub" / "f.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "x,y,omega,psi"
    assert len(lines) == 1 + 16 * 9
    meta = json.loads(side.read_text())
    assert meta["nx"] == 16 and meta["ny"] == 9 and meta["sigma"] == 0.05
