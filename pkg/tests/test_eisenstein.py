import numpy as np
import pytest
from hypothesis import given, strategies as st

from cuspml.eisenstein import EisensteinEvaluator, SpectralParameter, classical_constant, eta_slow
from cuspml.special import BudgetError, scattering_phi


@pytest.fixture(scope="module")
def ev():
    return EisensteinEvaluator(0.5 + 8j)


@given(st.floats(0.005, 0.5), st.floats(0.0, 3.0))
def test_spectral_parameter_w(h, eta):
    sp_ = SpectralParameter(h, eta)
    assert sp_.W_check() < 1e-12 * max(1.0, abs(sp_.W))


def test_spectral_parameter_validation():
    with pytest.raises(ValueError):
        SpectralParameter(0.0, 0.1)
    with pytest.raises(ValueError):
        SpectralParameter(0.1, -1.0)


def test_calibrated_constant_matches_classical():
    s = 0.5 + 8j
    e = EisensteinEvaluator(s)
    assert abs(e.c - classical_constant(s)) < 1e-8 * abs(classical_constant(s))


def test_automorphy(ev):
    r = np.random.default_rng(3)
    z = r.uniform(-0.5, 0.5, 12) + 1j * r.uniform(0.8, 1.2, 12)
    z = z[(-1 / z).imag >= 0.5]
    assert ev.automorphy_residual(z).max() < 1e-6
    assert np.max(np.abs(ev(z + 1) - ev(z))) < 1e-10


def test_zeroth_coefficient_is_constant_term(ev):
    for y in (0.8, 1.5, 3.0):
        assert abs(ev.zeroth_coefficient(y) - ev.constant_term(y)) < 1e-8


def test_eigenfunction_second_order(ev):
    z = np.array([0.1 + 1.1j, -0.2 + 1.5j])
    r1, r2 = ev.eigen_residual(z, 0.01), ev.eigen_residual(z, 0.005)
    assert 3.5 < r1 / r2 < 4.5


def test_constant_term_on_critical_line(ev):
    # |phi| = 1 there, so y^{-1/2} |constant term| <= 2
    y = np.linspace(1, 10, 50)
    assert np.all(np.abs(ev.constant_term(y)) / np.sqrt(y) <= 2 + 1e-12)
    assert abs(abs(scattering_phi(ev.s)) - 1) < 1e-12


def test_budget_errors():
    with pytest.raises(BudgetError):
        EisensteinEvaluator(0.5 + 8j, y_min=0.2)
    with pytest.raises(BudgetError):
        EisensteinEvaluator(0.5 + 8j).mode_coeffs(np.array([0.3]))


def test_eta_slow():
    h = 0.01
    L = np.log(1 / h)
    assert eta_slow(h, 2.0) == pytest.approx(2 * np.log(L) / L)
    assert eta_slow(1e-8, 2.0) < eta_slow(1e-2, 2.0)
