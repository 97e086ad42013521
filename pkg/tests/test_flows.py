import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspml.flows import (BandExit, FullCusp, ModularSurface, cusp_flow_exact, cusp_lyapunov, flow,
                          fundamental_area, homogeneity_defect, integrate_cusp, lyapunov, modular_flow_arr,
                          modular_jacobian, transport_band, variational, vertical_point)
from cuspml.geometry import PhasePoint, hamiltonian, modular_point
from cuspml.symbols import egorov_bump

plane = FullCusp(y_lo=1e-4, y_hi=1e4)

pts = st.builds(lambda y, th, Y, J: PhasePoint(y, [th], Y, [J]),
                st.floats(0.3, 3.0), st.floats(0, 1), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


def test_vertical_geodesic_closed_form():
    p = flow(plane, vertical_point(2.0), 1.0)
    assert np.isclose(p.y, 2 * np.e) and np.isclose(p.Y, np.exp(-1) / 2)


@settings(max_examples=15)
@given(pts, st.floats(-2, 2))
def test_exact_flow_matches_rk4(xi, t):
    if np.hypot(xi.Y, xi.J[0]) * xi.y < 1e-3:
        return
    st_, _ = integrate_cusp(plane, xi, t)
    ex = cusp_flow_exact(xi.as_array(), t)
    a = st_.point.as_array()
    d = a - ex
    d[1] = (d[1] + 0.5) % 1.0 - 0.5
    assert np.max(np.abs(d)) < 1e-7 * max(1, np.max(np.abs(ex)))
    assert st_.energy_drift < 1e-9


@given(pts, st.floats(-3, 3), st.floats(-3, 3))
def test_exact_flow_group_law_and_energy(xi, t, s):
    z = xi.as_array()
    a = cusp_flow_exact(cusp_flow_exact(z, t), s)
    b = cusp_flow_exact(z, t + s)
    d = a - b
    d[1] = (d[1] + 0.5) % 1.0 - 0.5
    assert np.max(np.abs(d)) < 1e-8 * max(1, np.max(np.abs(b)))
    assert np.isclose(hamiltonian(PhasePoint.from_array(b)), hamiltonian(xi), rtol=1e-10)


def test_band_exit_raises():
    with pytest.raises(BandExit):
        flow(FullCusp(y_lo=0.5, y_hi=3.0), vertical_point(2.0), 5.0)


@given(st.floats(0.3, 3.0), st.floats(0.2, 4.0))
def test_modular_jacobian_structure(v, t):
    D = modular_jacobian(v, t)
    assert np.isclose(np.linalg.det(D), 1.0)
    # normal block solves J'' = v^2 J: its spectral radius is e^{vt}
    ev = np.sort(np.abs(np.linalg.eigvals(D[2:, 2:])))
    assert np.allclose(ev, [np.exp(-v * t), np.exp(v * t)])
    assert np.allclose(modular_jacobian(v, 2 * t), D @ D)


@settings(max_examples=8)
@given(pts, st.floats(0.2, 1.5))
def test_plane_variational_matches_modular_jacobian(xi, t):
    # the modular surface is locally the hyperbolic plane; singular values are frame independent
    v = np.sqrt(2 * hamiltonian(xi))
    if v < 0.1:
        return
    V = variational(plane, xi, t)
    sv = np.linalg.svd(V, compute_uv=False)
    sm = np.linalg.svd(modular_jacobian(v, t), compute_uv=False)
    assert np.allclose(sv, sm, rtol=1e-6)


def test_modular_flow_group_law_and_energy():
    Z = np.array([0.1, 1.3, 0.4, -0.7])
    A = modular_flow_arr(modular_flow_arr(Z, 3.3), 4.1)
    B = modular_flow_arr(Z, 7.4)
    assert np.allclose(A, B, atol=1e-9)
    assert np.isclose(A[1] ** 2 * (A[2] ** 2 + A[3] ** 2), Z[1] ** 2 * (Z[2] ** 2 + Z[3] ** 2))


def test_modular_point_flow_stays_in_domain():
    p = flow(ModularSurface(), modular_point(0.1, 1.2, np.exp(0.3j)), 6.0)
    assert abs(p.x) <= 0.5 + 1e-9 and abs(p.z) >= 1 - 1e-9


def test_modular_lyapunov_is_speed():
    v = 1.0
    Z = np.array([0.1, 1.3, 0.0, v / 1.3])
    assert abs(lyapunov(ModularSurface(), Z, 20.0) - v) < 0.05


def test_cusp_lyapunov_close_to_one():
    lam = cusp_lyapunov(PhasePoint(1.0, [0.0], 0.6, [0.8]), 60.0)
    assert 0.9 < lam < 1.02


def test_homogeneity_small():
    assert homogeneity_defect(PhasePoint(1.2, [0.3], 0.5, [0.4]), 1.5) < 1e-8


def test_fundamental_area():
    assert abs(fundamental_area() - np.pi / 3) < 1e-8


def test_transport_band_contains_flowed_support():
    sig = egorov_bump()
    lo, hi = transport_band(sig, 1.0)
    r = np.random.default_rng(0)
    s = sig.support
    for _ in range(200):
        y = np.exp(r.uniform(np.log(s.y_lo), np.log(s.y_hi)))
        J = r.uniform(*sig.j_range)
        vmax = np.sqrt(2 * s.E)
        Y = r.uniform(-1, 1) * np.sqrt(max(vmax ** 2 / y ** 2 - J * J, 0))
        z = cusp_flow_exact(np.array([y, 0.0, Y, J]), r.uniform(-1, 1))
        assert lo * (1 - 1e-12) <= z[0] <= hi * (1 + 1e-12)
