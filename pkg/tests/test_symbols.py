import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from cuspml.calculus import moyal_terms
from cuspml.symbols import (CORPUS, Support, Symbol, SymbolError, coords, dir_bump, from_recipe, gauss_cell,
                            make_cusp_cutoff, poisson, sep_bump)

y, th, Y, J = coords(1)


def _pts(n=50, seed=1):
    r = np.random.default_rng(seed)
    return np.stack([np.exp(r.uniform(-1, 3, n)), r.uniform(0, 1, n), r.uniform(-2, 2, n), r.uniform(-2, 2, n)])


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_corpus_symbols_are_real_and_finite(name):
    s = from_recipe({"name": name})
    z = _pts()
    v = s.eval(0.1, z)
    assert np.all(np.isfinite(v))
    assert s.is_real()
    assert np.max(np.abs(v.imag)) == 0.0


def test_unknown_recipe():
    with pytest.raises(SymbolError):
        from_recipe({"name": "nope"})


def test_dir_bump_finite_at_zero_momentum():
    v = dir_bump().eval(0.1, np.array([[2.0], [0.0], [0.0], [0.0]]))
    assert np.isfinite(v).all()


def test_support_mask_zeroes_outside():
    s = gauss_cell()
    z = np.array([[s.support.y_hi * 2, s.support.y_lo / 2], [0, 0], [0, 0], [0, 0]], float)
    assert np.all(s.eval(0.1, z) == 0)


def test_cutoff_profile():
    chi = make_cusp_cutoff(0.5)
    ys = np.array([0.5, np.exp(0.5) * 3.9, np.exp(0.5) * 5.1])
    v = chi.eval(0.1, np.stack([ys, 0 * ys, 0 * ys, 0 * ys])).real
    assert v[0] == 1.0 and v[1] == 1.0 and v[2] == 0.0
    with pytest.raises(SymbolError):
        make_cusp_cutoff(-1.0)


def test_partial_matches_finite_difference():
    s = sep_bump()
    z = _pts(5)
    for idx in range(4):
        e = np.zeros((4, 1))
        e[idx] = 1e-6
        fd = (s.eval(0.1, z + e) - s.eval(0.1, z - e)) / 2e-6
        assert np.allclose(s.partial(0.1, z, (idx,)), fd, atol=1e-6)


coef = st.floats(-2, 2)


@given(coef, coef, coef, coef)
def test_poisson_antisymmetric_and_leibniz(a1, a2, b1, b2):
    a = Symbol(expr=a1 * y * Y + a2 * J * sp.cos(2 * sp.pi * th))
    b = Symbol(expr=b1 * y ** 2 + b2 * Y * J)
    c = Symbol(expr=y * J)
    z = _pts(7)
    ab, ba = poisson(a, b).eval(0.1, z), poisson(b, a).eval(0.1, z)
    assert np.allclose(ab, -ba)
    lhs = poisson(a, b * c).eval(0.1, z)
    rhs = poisson(a, b).eval(0.1, z) * c.eval(0.1, z) + b.eval(0.1, z) * poisson(a, c).eval(0.1, z)
    assert np.allclose(lhs, rhs)


def test_first_moyal_term_is_half_poisson():
    a = Symbol(expr=y ** 2 * Y + J)
    b = Symbol(expr=sp.exp(-Y ** 2) * y)
    t1 = sp.simplify(moyal_terms(a, b, 1) - poisson(a, b).expr / (2 * sp.I))
    assert t1 == 0
    # odd orders antisymmetric, even orders symmetric
    assert sp.simplify(moyal_terms(a, b, 2) - moyal_terms(b, a, 2)) == 0


def test_moyal_position_momentum():
    # y Y = Op(y) Op(Y) has Weyl symbol y Y + (i h / 2) d_Y(Y) d_y(y) in this sign convention
    assert moyal_terms(Symbol(expr=y), Symbol(expr=Y), 1) == sp.I / 2


def test_support_algebra():
    a, b = Support(1, 5, 2.0), Support(2, 8, 1.0, 3.0)
    assert a.intersect(b) == Support(2, 5, 1.0, 3.0)
    assert a.union(b) == Support(1, 8, 2.0, np.inf)
    assert b.eta_max == pytest.approx(np.sqrt(2.0))
