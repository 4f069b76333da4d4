import numpy as np
import pytest

from poiseuille_waves.quadrature import gauss_legendre, graded_breaks, merge_breaks, panel_rule


def test_gauss_exact_for_polynomials():
    x, w = gauss_legendre(6)
    for p in range(12):
        assert np.dot(w, x**p) == pytest.approx((1 - (-1) ** (p + 1)) / (p + 1), abs=1e-14)


def test_panel_rule_integrates_kinked_function():
    nodes, w = panel_rule(merge_breaks(np.linspace(0, 1, 5), [0.3]), 10)
    assert np.dot(w, np.abs(nodes - 0.3)) == pytest.approx(0.3**2 / 2 + 0.7**2 / 2, abs=1e-15)


def test_graded_breaks_refine_towards_end():
    br = graded_breaks(0.0, 0.45, 0.45, 1e-3)
    assert br[0] == 0.0 and br[-1] == 0.45
    widths = np.diff(br)
    assert widths[-1] < 1e-3 and np.all(widths > 0)


def test_merge_breaks_sorted_unique():
    out = merge_breaks([0, 0.5, 1], [0.5, 0.25, 2.0])
    assert list(out) == [0, 0.25, 0.5, 1]
