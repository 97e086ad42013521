"""Schrodinger propagator on the discretized cusp band and Egorov residuals."""
from __future__ import annotations

import numpy as np

from .flows import FullCusp, cusp_lyapunov, transport_band, transported_symbol
from .geometry import PhasePoint
from .quantization import GridSpec, OperatorMatrix, QuantizationError, laplacian_matrix, op_matrix
from .symbols import Symbol


class PropagatorCache:
    """Per-mode eigendecomposition of the grid Laplacian P (orthonormal basis), stamped with (h, grid)."""

    def __init__(self, h, grid: GridSpec, order="sinc", modes=None, herm_tol=1e-8, recon_tol=1e-10):
        self.h = h
        self.grid = grid
        self.order = order
        self.P = laplacian_matrix(h, grid, order, modes=modes)
        self.modes = list(grid.modes) if modes is None else sorted(modes)
        self.eig = {}
        for m in self.modes:
            B = self.P.unitary_blocks()[m + grid.mode_max]
            defect = np.linalg.norm(B - B.conj().T) / max(np.linalg.norm(B), 1e-300)
            if defect > herm_tol:
                raise QuantizationError(f"P block {m} is not Hermitian (defect {defect:.2e})")
            lam, V = np.linalg.eigh(0.5 * (B + B.conj().T))
            rec = np.linalg.norm((V * lam) @ V.conj().T - B) / max(np.linalg.norm(B), 1e-300)
            if rec > recon_tol:
                raise QuantizationError(f"eigendecomposition of block {m} reconstructs to {rec:.2e}")
            self.eig[m] = (lam, V)

    def stamp(self):
        return {"h": self.h, "grid": self.grid.to_dict(), "order": self.order}


def propagator(cache: PropagatorCache, t) -> OperatorMatrix:
    """U(t) = exp(-i t P / h), block-diagonal; modes outside the cache are left zero."""
    g = cache.grid
    UB = np.zeros((g.n_modes, g.n_y, g.n_y), dtype=complex)
    for m, (lam, V) in cache.eig.items():
        UB[m + g.mode_max] = (V * np.exp(-1j * t * lam / cache.h)[None, :]) @ V.conj().T
    return OperatorMatrix.from_unitary_blocks(UB, g, cache.h, 0.5, f"U({t:g})")


def unitarity_defect(cache, t):
    """max over cached modes of ||U* U - I|| and of ||U(t)f|| - ||f|| for a fixed random f."""
    U = propagator(cache, t)
    ub = U.unitary_blocks()
    d = 0.0
    for m in cache.modes:
        B = ub[m + cache.grid.mode_max]
        d = max(d, np.linalg.norm(B.conj().T @ B - np.eye(cache.grid.n_y), 2))
    return float(d)


def group_defect(cache, t, s):
    U = propagator
    A = (U(cache, t) @ U(cache, s)).unitary_blocks()
    B = U(cache, t + s).unitary_blocks()
    return float(max(np.linalg.norm(A[m + cache.grid.mode_max] - B[m + cache.grid.mode_max], 2)
                     for m in cache.modes))


def conjugate(cache, A: OperatorMatrix, t):
    """U(-t) A U(t) on the cached modes."""
    return propagator(cache, -t) @ A @ propagator(cache, t)


def active_modes(sig: Symbol, h, grid: GridSpec):
    """theta modes m whose frequency J = 2 pi h m meets the symbol's J-support (all when unknown)."""
    jr = getattr(sig, "j_range", None)
    if jr is None:
        return list(grid.modes)
    J = 2 * np.pi * h * grid.modes
    return [int(m) for m, j in zip(grid.modes, J) if jr[0] <= j <= jr[1]]


def egorov_grid(sig: Symbol, h, t_max, fac=0.7, pad=0.3):
    """Band containing phi_s(supp sigma) for |s| <= t_max with a margin, at Nystrom spacing."""
    lo, hi = transport_band(sig, t_max)
    return _band_grid(sig, h, lo * np.exp(-pad), hi * np.exp(pad), fac)


def invariant_grid(sig: Symbol, h, t_max, window, fac=0.7, pad=1.0):
    """Band for a flow-invariant symbol observed through the y-window: trajectories leaving the window
    region within |t| <= t_max stay inside the band."""
    v = np.sqrt(2 * sig.support.E)
    jr = getattr(sig, "j_range", None)
    hi = max(window[1], v / jr[0] if jr is not None and jr[0] > 0 else window[1] * np.exp(v * t_max))
    lo = window[0] * np.exp(-v * abs(t_max))
    return _band_grid(sig, h, lo * np.exp(-pad), hi * np.exp(0.3), fac)


def _band_grid(sig, h, ymin, ymax, fac):
    v = np.sqrt(2 * sig.support.E)
    jr = getattr(sig, "j_range", None)
    n_y = int(np.ceil(np.log(ymax / ymin) * v / (fac * np.pi * h)))
    if jr is not None:
        M = int(np.ceil(jr[1] / (2 * np.pi * h))) + 1
    else:
        M = int(np.ceil(v / (2 * np.pi * h * ymin))) + 1
    n_theta = 1 << int(np.ceil(np.log2(2 * M + 2)))
    return GridSpec(y_min=ymin, y_max=ymax, n_y=n_y, mode_max=M, n_theta=n_theta)


def window_projector(grid: GridSpec, window) -> OperatorMatrix:
    """Multiplication by the indicator of window[0] <= y <= window[1]."""
    ind = ((grid.y >= window[0]) & (grid.y <= window[1])).astype(complex)
    return OperatorMatrix(None, grid, None, 0.5, "1_window", blocks=np.tile(np.diag(ind), (grid.n_modes, 1, 1)))


def egorov_residual(sig: Symbol, t, h, grid: GridSpec = None, cache: PropagatorCache = None, model=None,
                    invariant=False, window=None):
    """|| U(-t) M(sigma) U(t) - M(sigma o phi_t) ||_op (theta-free symbols, block storage).

    invariant=True compares against M(sigma) itself (sigma o phi_t = sigma); such symbols reach the
    band ends, so the difference is compressed to the y-window, which the flow keeps away from them.
    """
    if not sig.theta_free:
        raise ValueError("egorov_residual is implemented for theta-free symbols")
    if invariant and window is None:
        raise ValueError("flow-invariant symbols need an observation window")
    if grid is None:
        grid = invariant_grid(sig, h, abs(t), window) if invariant else egorov_grid(sig, h, abs(t))
    modes = active_modes(sig, h, grid)
    if t == 0:
        return 0.0
    cache = cache or PropagatorCache(h, grid, modes=modes)
    A = op_matrix(sig, h, grid, modes=modes, check=not invariant)
    if invariant:
        B = A
    else:
        model = model or FullCusp(sig.chart, grid.y_min, grid.y_max)
        B = op_matrix(transported_symbol(sig, t, model), h, grid, modes=modes)
    R = conjugate(cache, A, t) - B
    if window is not None:
        W = window_projector(grid, window)
        R = W @ R @ W
    return R.norm()


def microsupport_norm(sig: Symbol, t, h, window, grid: GridSpec = None, cache: PropagatorCache = None, pad=0.6):
    """|| 1_window U(-t) M(sigma) U(t) || for a y-window away from the transported support."""
    grid = grid or egorov_grid(sig, h, abs(t), pad=pad)
    modes = active_modes(sig, h, grid)
    cache = cache or PropagatorCache(h, grid, modes=modes)
    A = conjugate(cache, op_matrix(sig, h, grid, modes=modes), t)
    return (window_projector(grid, window) @ A).norm()


def measured_lambda(sig: Symbol, p=0.5, T=200.0, n=4, seed=0):
    """Largest Lyapunov exponent over a few points of the energy shell {p} above the symbol's support
    (hyperbolic plane chart, so no band exit)."""
    rng = np.random.default_rng(seed)
    sup = sig.support
    v = np.sqrt(2 * p)
    jr = getattr(sig, "j_range", (0.0, v))
    best = 0.0
    for _ in range(n):
        y = np.exp(rng.uniform(np.log(max(sup.y_lo, 1e-3)), np.log(min(sup.y_hi, 1e3))))
        J = min(rng.uniform(*jr), 0.999 * v / y)
        Y = np.sqrt(max(v * v / (y * y) - J * J, 0.0))
        best = max(best, cusp_lyapunov(PhasePoint(y, [0.0], Y, [J], sig.chart), T))
    return best


def ehrenfest_scan(sig: Symbol, h_list, rho, lam, grids=None):
    """Rows (h, t, residual, residual / (h t e^{2 lam t}), lam, rho) with t(h) = rho |log h| / lam."""
    rows = []
    for k, h in enumerate(h_list):
        t = rho * abs(np.log(h)) / lam if lam > 0 else 0.0
        g = None if grids is None else grids[k]
        r = egorov_residual(sig, t, h, g) if t > 0 else 0.0
        norm = h * t * np.exp(2 * lam * t)
        rows.append({"h": h, "t": t, "residual": r, "ratio": r / norm if t > 0 else 0.0, "lam": lam, "rho": rho})
    ratios = np.array([r["ratio"] for r in rows])
    med = float(np.median(ratios))
    ok = bool(np.all(ratios <= 10 * med) and np.all(ratios >= med / 10)) if med > 0 else bool(np.all(ratios == 0))
    return rows, {"median": med, "pass": ok}
