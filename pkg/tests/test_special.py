import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cuspml.special import BudgetError, PoleError, bessel_k, completed_xi, divisor_sigma, scattering_phi, zeta


@pytest.mark.parametrize("s", [2.0, 3.0, 0.5 + 14.134725j, 1.5 + 30j, -1.5, 0.25 + 3j, 2 + 80j])
def test_zeta_against_mpmath(s):
    ref = complex(mpmath.zeta(s))
    assert abs(zeta(s) - ref) <= 1e-11 * max(1, abs(ref))


def test_zeta_pole():
    with pytest.raises(PoleError):
        zeta(1.0)


def test_zeta_known_values():
    assert abs(zeta(2) - np.pi ** 2 / 6) < 1e-14
    assert abs(zeta(-1) + 1 / 12) < 1e-13


@given(st.floats(-3, 4), st.floats(-40, 40))
def test_xi_functional_equation(a, b):
    s = complex(a, b)
    if abs(s) < 0.05 or abs(s - 1) < 0.05:
        return
    x1, x2 = completed_xi(s), completed_xi(1 - s)
    assert abs(x1 - x2) <= 1e-9 * max(abs(x1), 1e-300)


@given(st.floats(0.5, 60))
def test_phi_unitary_on_critical_line(t):
    assert abs(abs(scattering_phi(0.5 + 1j * t)) - 1) < 1e-10


def test_phi_symmetry():
    s = 0.8 + 3j
    assert abs(scattering_phi(s) * scattering_phi(1 - s) - 1) < 1e-10


def test_divisor_sigma_small():
    assert divisor_sigma(12, 1) == pytest.approx(28)
    assert divisor_sigma(6, 0) == pytest.approx(4)
    assert divisor_sigma(10, -1) == pytest.approx(1 + 1 / 2 + 1 / 5 + 1 / 10)


@pytest.mark.parametrize("nu,x", [(0.5, 1.0), (0.3j, 2.0), (7.5j, 3.0), (7.5j, 12.0), (0.2 + 4j, 0.5),
                                  (20j, 40.0)])
def test_bessel_k_against_mpmath(nu, x):
    ref = complex(mpmath.besselk(nu, x))
    got = bessel_k(nu, x)
    assert abs(got - ref) <= 1e-9 * abs(ref) + 1e-300


def test_bessel_k_half_closed_form():
    x = np.linspace(0.2, 8, 40)
    exact = np.sqrt(np.pi / (2 * x)) * np.exp(-x)
    assert np.max(np.abs(bessel_k(0.5, x) - exact) / exact) < 1e-10


def test_budget_error_is_runtime_error():
    assert issubclass(BudgetError, RuntimeError)
