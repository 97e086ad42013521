import numpy as np
import pytest

from cuspml.egorov import (PropagatorCache, active_modes, egorov_grid, egorov_residual, group_defect,
                           propagator, unitarity_defect, window_projector)
from cuspml.quantization import laplacian_matrix
from cuspml.symbols import egorov_bump, sep_bump

H = 0.1


@pytest.fixture(scope="module")
def setup():
    sig = egorov_bump()
    g = egorov_grid(sig, H, 1.0)
    modes = active_modes(sig, H, g)
    return sig, g, modes, PropagatorCache(H, g, modes=modes)


def test_active_modes_hit_j_bump(setup):
    sig, g, modes, _ = setup
    assert modes == [1]  # J0 = 0.2 pi is 2 pi h m with m = 1 at h = 0.1
    assert active_modes(sep_bump(), H, g) == list(g.modes)


def test_unitary_group(setup):
    _, _, _, cache = setup
    assert unitarity_defect(cache, 0.7) < 1e-12
    assert group_defect(cache, 0.7, -0.3) < 1e-12
    U0 = propagator(cache, 0.0).unitary_blocks()[1 + cache.grid.mode_max]
    assert np.allclose(U0, np.eye(cache.grid.n_y))


def test_propagator_commutes_with_p(setup):
    _, g, modes, cache = setup
    P = laplacian_matrix(H, g, "sinc", modes=modes)
    U = propagator(cache, 0.9)
    assert (U @ P - P @ U).norm() < 1e-10 * P.norm()


def test_egorov_residual_zero_time(setup):
    sig, g, _, cache = setup
    assert egorov_residual(sig, 0.0, H, g, cache) == 0.0


def test_egorov_residual_frozen(setup):
    # value recorded by the acceptance run at h = 0.1, t = 1
    sig, g, _, cache = setup
    assert egorov_residual(sig, 1.0, H, g, cache) == pytest.approx(0.13645, rel=1e-3)


def test_window_projector_idempotent(setup):
    _, g, _, _ = setup
    W = window_projector(g, (1.0, 2.0))
    assert np.allclose((W @ W).blocks, W.blocks)


def test_invariant_needs_window():
    with pytest.raises(ValueError):
        egorov_residual(egorov_bump(), 1.0, H, invariant=True)
