import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from cuspml.calculus import (change_quantization_expansion, commutator_residual, composition_residual,
                             hs_parseval, loglog_slope, moyal_compose, requantization_residual)
from cuspml.quantization import desk_grid
from cuspml.symbols import Symbol, coords, gauss_cell, sep_bump, shell_bump

y, th, Y, J = coords(1)


@given(st.floats(0.3, 4.0), st.floats(0.01, 100.0))
def test_loglog_slope_recovers_power(p, c):
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    assert np.isclose(loglog_slope(hs, c * hs ** p), p)


def test_loglog_slope_ignores_zeros():
    assert np.isnan(loglog_slope([0.1, 0.05], [0.0, 1.0]))


def test_moyal_k0_is_product():
    a, b = sep_bump(), shell_bump()
    r = moyal_compose(a, b, 0)
    assert sp.simplify(r.terms[0].expr - a.expr * b.expr) == 0


def test_change_quantization_k0_is_identity():
    a = sep_bump()
    assert sp.simplify(change_quantization_expansion(a, 0.3, 0).terms[0].expr - a.expr) == 0


def test_commutator_beats_composition_at_one_h():
    a, b = gauss_cell(6.47, 0.78, 0.3, 1.1, 1.1), gauss_cell(6.27, 0.78, -0.2, 1.1, 1.1)
    h = 0.2
    g = desk_grid([a, b], h)
    cache = {}
    r0 = composition_residual(a, b, 0, h, g, cache)
    r2 = composition_residual(a, b, 2, h, g, cache)
    rc = commutator_residual(a, b, h, g, cache)
    assert r2 < r0
    assert rc < r0


def test_requantization_improves_with_order():
    # wide cell: the first correction removes most of the Op^{1/2} - Op^0 gap (0.081 -> 0.018)
    a = gauss_cell(6.27, 0.78, 0.3, 1.1, 1.1)
    h = 0.2
    g = desk_grid(a, h)
    r0 = requantization_residual(a, 0.0, 0, h, g)
    r1 = requantization_residual(a, 0.0, 1, h, g)
    assert r0 == pytest.approx(8.06e-2, rel=0.02)
    assert r1 < 0.3 * r0


def test_hs_parseval_one_point():
    a = shell_bump(0.7, 0.25, 0.5, 0.2)
    g = desk_grid(a, 0.1, fac=0.75)
    formula, frob = hs_parseval(a, 0.1, g)
    assert abs(formula - frob) / frob < 1e-3
