import numpy as np
import pytest
from hypothesis import given, strategies as st

from cuspml.geometry import (CuspChart, GeometryError, PhasePoint, cometric, hamiltonian, modular_point,
                             modular_reduce, mobius, point_from_sl2, reduce_point, sasaki_gram, sl2_from_point)

pos = st.floats(0.05, 50.0)
real = st.floats(-20.0, 20.0)


def test_chart_rejects_bad_lattice():
    with pytest.raises(GeometryError):
        CuspChart(1, ((2.0,),))
    with pytest.raises(GeometryError):
        CuspChart(1, ((1.0,),), a=0.0)


def test_chart_json_roundtrip():
    c = CuspChart(2, ((1.0, 0.0), (0.5, 1.0)), 1.5)
    assert CuspChart.from_json(c.to_json()) == c


@given(real)
def test_theta_reduced_into_cell(th):
    t = CuspChart().reduce_theta([th])
    assert 0.0 <= t[0] < 1.0
    assert abs((t[0] - th) - round(t[0] - th)) < 1e-9


def test_phase_point_validation():
    with pytest.raises(GeometryError):
        PhasePoint(-1.0, [0.0], 1.0, [0.0])
    with pytest.raises(GeometryError):
        PhasePoint(1.0, [0.0, 0.0], 1.0, [0.0])


@given(pos, real, st.floats(-5, 5), st.floats(-5, 5))
def test_hamiltonian_is_half_cometric(y, th, Y, J):
    p = PhasePoint(y, [th], Y, [J])
    assert np.isclose(hamiltonian(p), 0.5 * y * y * (Y * Y + J * J))
    assert np.isclose(cometric(p), 2 * hamiltonian(p))


@given(pos, st.floats(-5, 5), st.floats(-5, 5))
def test_sasaki_gram_positive_with_unit_determinant(y, Y, J):
    p = PhasePoint(y, [0.0], Y, [J])
    if hamiltonian(p) > 10:
        return
    G = sasaki_gram(p)
    assert np.allclose(G, G.T)
    assert np.linalg.eigvalsh(G).min() > 0
    assert abs(np.linalg.det(G) - 1.0) < 1e-10


def test_sasaki_gram_is_horizontal_vertical_split():
    # X_y = horizontal lift + yY X_Y + yJ X_J, X_theta = horizontal lift + yJ X_Y - yY X_J
    p = PhasePoint(1.7, [0.2], 0.4, [-0.9])
    y, Y, J = p.y, p.Y, p.J[0]
    C = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [y * Y, y * J, 1, 0], [y * J, -y * Y, 0, 1]], float)
    assert np.allclose(sasaki_gram(p), C.T @ C)


@given(st.floats(-3, 3), st.floats(0.02, 5.0))
def test_modular_reduce_lands_in_domain(x, y):
    z = complex(x, y)
    zr, g = modular_reduce(z)
    assert abs(zr.real) <= 0.5 + 1e-12
    assert abs(zr) >= 1 - 1e-12
    assert round(np.linalg.det(g)) == 1
    assert abs(mobius(g, z) - zr) < 1e-9 * max(1, abs(zr))


@given(st.floats(-2, 2), st.floats(0.1, 10), st.floats(-np.pi, np.pi))
def test_sl2_roundtrip(x, y, a):
    e = np.exp(1j * a)
    g = sl2_from_point(x, y, e)
    assert np.isclose(np.linalg.det(g), 1.0)
    z, e2 = point_from_sl2(g)
    assert abs(z - complex(x, y)) < 1e-10 * max(1, y)
    assert abs(e2 - e) < 1e-9


def test_reduce_point_keeps_frame_consistent():
    mp = reduce_point(modular_point(3.3, 0.2, np.exp(0.4j)))
    assert abs(mp.x) <= 0.5 + 1e-12 and abs(mp.z) >= 1 - 1e-12
    z, _ = point_from_sl2(mp.direction)
    assert abs(z - mp.z) < 1e-10
