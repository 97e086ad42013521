import numpy as np
import pytest
import sympy as sp

from cuspml.calculus import adjoint_defect
from cuspml.quantization import (DiscreteFunction, GridSpec, OperatorMatrix, QuantizationError, desk_grid,
                                 laplacian_matrix, op_matrix, projector_nonzero, read_binary, sobolev_norm)
from cuspml.symbols import Symbol, coords, sep_bump, shell_bump, y_bump

y, th, Y, J = coords(1)


def test_grid_validation():
    with pytest.raises(QuantizationError):
        GridSpec(y_min=2.0, y_max=1.0)
    with pytest.raises(QuantizationError):
        GridSpec(n_theta=24)
    with pytest.raises(QuantizationError):
        GridSpec(n_theta=8, mode_max=8)


def test_grid_dict_roundtrip_and_refine():
    g = GridSpec(y_min=0.7, y_max=9.0, n_y=31, n_theta=16, mode_max=3)
    assert GridSpec.from_dict(g.to_dict()) == g
    r = g.refine()
    assert r.n_y == 63 and np.isclose(r.du, g.du / 2)
    assert np.allclose(r.y[1::2], g.y)


def test_desk_grid_covers_support():
    s = sep_bump()
    g = desk_grid(s, 0.1)
    assert g.y_min < s.support.y_lo and g.y_max > s.support.y_hi
    assert g.n_theta >= 2 * g.mode_max + 2


def test_discrete_function_mode_roundtrip():
    g = GridSpec(y_min=1.0, y_max=4.0, n_y=12, n_theta=16, mode_max=5)
    f = DiscreteFunction.from_callable(g, lambda yy, tt: np.exp(-yy) * (1 + 0.3 * np.cos(2 * np.pi * 3 * tt)))
    f2 = DiscreteFunction.from_modes(g, f.modes())
    assert np.allclose(f.values, f2.values)
    with pytest.raises(QuantizationError):
        DiscreteFunction(g, np.full((12, 16), np.nan))


def test_multiplication_operator_is_diagonal():
    b = y_bump(1.0, 0.2)
    g = desk_grid(b, 0.1)
    M = op_matrix(b, 0.1, g)
    vals = b.eval(0.1, np.stack([g.y, 0 * g.y, 0 * g.y, 0 * g.y])).real
    for m in (0, 1, -g.mode_max):
        B = M.block(m)
        assert np.allclose(B, np.diag(vals))


def test_identity_symbol():
    g = GridSpec(y_min=1.0, y_max=4.0, n_y=12, n_theta=16, mode_max=5)
    M = op_matrix(Symbol(expr=sp.Integer(1) + 0 * y), 0.1, g)
    assert np.allclose(M.A, np.eye(g.dim))


def test_real_symbol_self_adjoint():
    s = sep_bump()
    g = desk_grid(s, 0.2)
    assert adjoint_defect(s, 0.2, g) < 1e-10


def test_t_quantization_adjoint_relation():
    # Op^t(a)^* = Op^{1-t}(conj a)
    s = shell_bump(1.0, 0.15, 0.5, 0.2) * Symbol(expr=1 + sp.I * y * Y / 3)
    s.support = shell_bump(1.0, 0.15, 0.5, 0.2).support
    g = desk_grid(s, 0.2)
    A0 = op_matrix(s, 0.2, g, t=0.0)
    A1 = op_matrix(s.conj(), 0.2, g, t=1.0)
    assert (A0.adjoint() - A1).norm() < 1e-10 * A0.norm()


def test_block_and_dense_agree():
    g = GridSpec(y_min=1.0, y_max=4.0, n_y=10, n_theta=8, mode_max=2)
    r = np.random.default_rng(0)
    B = r.normal(size=(g.n_modes, g.n_y, g.n_y)) + 0j
    Mb = OperatorMatrix(None, g, 0.1, blocks=B)
    Md = OperatorMatrix(Mb.A, g, 0.1)
    assert np.isclose(Mb.norm(), Md.norm())
    assert np.isclose(Mb.frobenius(), Md.frobenius())
    assert np.allclose((Mb @ Mb).A, (Md @ Md).A)
    assert np.allclose(Mb.adjoint().A, Md.adjoint().A)


def test_laplacian_hermitian_nonnegative():
    g = GridSpec(y_min=0.5, y_max=8.0, n_y=40, n_theta=16, mode_max=4)
    for order in (2, 4, "sinc"):
        P = laplacian_matrix(0.1, g, order)
        for B in P.unitary_blocks():
            assert np.allclose(B, B.conj().T, atol=1e-12)
            assert np.linalg.eigvalsh(B).min() > -1e-12


def test_laplacian_on_power_of_y():
    # P = -h^2 (y^2 d_y^2 + y^2 d_th^2) / 2 maps y^s to -(h^2/2) s (s - 1) y^s for the zero mode
    g = GridSpec(y_min=1.0, y_max=4.0, n_y=200, n_theta=4, mode_max=1)
    P = laplacian_matrix(1.0, g, 4)
    s = 2.5
    B = P.block(0)
    f = g.y ** s
    got = (B @ f)[20:-20]
    want = (-0.5 * s * (s - 1) * f)[20:-20]
    assert np.allclose(got, want, rtol=1e-4)


def test_sobolev_norm_zero_order_is_l2():
    g = GridSpec(y_min=1.0, y_max=4.0, n_y=20, n_theta=8, mode_max=3)
    f = DiscreteFunction.from_callable(g, lambda yy, tt: np.sin(yy) + 0j * tt)
    assert np.isclose(sobolev_norm(f, 0, 0.1), f.norm())


def test_projector_nonzero():
    g = GridSpec(y_min=0.5, y_max=4.0, n_y=20, n_theta=8, mode_max=3)
    Pi = projector_nonzero(g, 1.0)
    assert np.allclose((Pi @ Pi).A, Pi.A)
    with pytest.raises(QuantizationError):
        projector_nonzero(g, 10.0)


def test_binary_export_roundtrip(tmp_path):
    g = GridSpec(y_min=1.0, y_max=4.0, n_y=6, n_theta=8, mode_max=2)
    M = OperatorMatrix(np.arange(g.dim ** 2).reshape(g.dim, g.dim) * (1 + 1j), g, 0.1, label="X")
    M.export(tmp_path / "m.bin")
    A, meta = read_binary(tmp_path / "m.bin")
    assert np.array_equal(A, M.A)
    assert GridSpec.from_dict(meta["grid"]) == g and meta["label"] == "X"
