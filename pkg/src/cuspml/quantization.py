"""Finite matrices for the cusp quantization on a log-y grid times theta Fourier modes (d = 1)."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, asdict
from math import factorial

import numpy as np

from .geometry import CuspChart, DEFAULT_CHART
from .symbols import Symbol


class QuantizationError(ValueError):
    pass


class SupportError(QuantizationError):
    pass


@dataclass(frozen=True)
class GridSpec:
    chart: CuspChart = DEFAULT_CHART
    y_min: float = 1.0
    y_max: float = 20.0
    n_y: int = 96
    n_theta: int = 32
    mode_max: int = 8
    n_Y: int = 12          # Gauss-Legendre nodes per panel
    Y_max: float = 6.0     # cutoff on |yY| when the symbol declares no energy bound
    panel: float = 1.0     # widest Gauss-Legendre panel in the scaled variable yY

    def __post_init__(self):
        if not self.y_min < self.y_max:
            raise QuantizationError("y_min must be below y_max")
        if min(self.n_y, self.n_theta, self.n_Y) <= 0 or self.mode_max < 0 or self.Y_max <= 0:
            raise QuantizationError("grid counts must be positive")
        if self.n_theta & (self.n_theta - 1):
            raise QuantizationError("n_theta must be a power of two")
        if self.n_theta < 2 * self.mode_max + 2:
            raise QuantizationError("n_theta must be at least 2 mode_max + 2")
        if self.chart.d != 1:
            raise QuantizationError("matrix quantization is implemented for d = 1")

    @property
    def du(self):
        return np.log(self.y_max / self.y_min) / (self.n_y + 1)

    @property
    def u(self):
        return np.log(self.y_min) + self.du * np.arange(1, self.n_y + 1)

    @property
    def y(self):
        return np.exp(self.u)

    @property
    def weights(self):
        """Quadrature weights of dy / y^2: y^{-2} * y du."""
        return self.du / self.y

    @property
    def modes(self):
        return np.arange(-self.mode_max, self.mode_max + 1)

    @property
    def n_modes(self):
        return 2 * self.mode_max + 1

    @property
    def dim(self):
        return self.n_modes * self.n_y

    @property
    def theta(self):
        return np.arange(self.n_theta) / self.n_theta

    def to_dict(self):
        d = asdict(self)
        d["chart"] = json.loads(self.chart.to_json())
        return d

    @classmethod
    def from_dict(cls, o):
        o = dict(o)
        ch = o.pop("chart", None)
        chart = CuspChart.from_json(ch) if ch is not None else DEFAULT_CHART
        return cls(chart=chart, **o)

    def refine(self, factor=2):
        """Same band with a finer y-grid (n_y + 1 intervals scaled)."""
        return GridSpec(self.chart, self.y_min, self.y_max, factor * (self.n_y + 1) - 1, self.n_theta,
                        self.mode_max, self.n_Y, self.Y_max, self.panel)

    def index(self, m, j):
        return (m + self.mode_max) * self.n_y + j


def desk_grid(symbols, h, fac=1.5, pad=0.25, Y_max=6.0):
    """Grid covering the declared supports of `symbols` with a pad, resolving |y xi| up to eta_max.

    The y-step is fac * pi * h / eta_max in ln y (fac = 2 is Nyquist for the phase
    (y - y') eta / (h y)); theta modes cover |J| <= eta_max / y_lo.
    """
    if isinstance(symbols, Symbol):
        symbols = [symbols]
    sups = [s.support for s in symbols]
    if any(s is None for s in sups):
        raise QuantizationError("desk_grid needs support hints")
    lo = min(s.y_lo for s in sups)
    hi = max(s.y_hi for s in sups)
    em = max(s.eta_max if np.isfinite(s.eta_max) else Y_max for s in sups)
    if not (lo > 0 and np.isfinite(hi)):
        raise QuantizationError("desk_grid needs a bounded y-support")
    ymin, ymax = lo * np.exp(-pad), hi * np.exp(pad)
    n_y = int(np.ceil(np.log(ymax / ymin) * em / (fac * np.pi * h)))
    M = int(np.ceil(em / (2 * np.pi * h * lo))) + 1
    n_theta = 1 << int(np.ceil(np.log2(2 * M + 2)))
    return GridSpec(y_min=ymin, y_max=ymax, n_y=max(n_y, 8), mode_max=M, n_theta=n_theta, Y_max=Y_max)


def _write_binary(path, A, meta):
    A = np.ascontiguousarray(A, dtype=np.complex128)
    with open(path, "wb") as fh:
        np.array(A.ndim, dtype=np.int64).tofile(fh)
        np.array(A.shape, dtype=np.int64).tofile(fh)
        A.tofile(fh)
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)


def read_binary(path):
    with open(path, "rb") as fh:
        nd = int(np.fromfile(fh, dtype=np.int64, count=1)[0])
        shape = tuple(np.fromfile(fh, dtype=np.int64, count=nd))
        A = np.fromfile(fh, dtype=np.complex128).reshape(shape)
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    return A, meta


class DiscreteFunction:
    """Complex samples on the (y-grid x theta-grid)."""

    def __init__(self, grid: GridSpec, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n_y, grid.n_theta):
            raise QuantizationError("values must have shape (n_y, n_theta)")
        if not np.all(np.isfinite(values)):
            raise QuantizationError("non-finite samples")
        self.grid = grid
        self.values = values

    @classmethod
    def from_callable(cls, grid, f):
        Yg, Tg = np.meshgrid(grid.y, grid.theta, indexing="ij")
        return cls(grid, f(Yg, Tg))

    @classmethod
    def from_modes(cls, grid, vec):
        c = np.asarray(vec).reshape(grid.n_modes, grid.n_y)
        full = np.zeros((grid.n_theta, grid.n_y), dtype=complex)
        full[grid.modes % grid.n_theta] = c
        return cls(grid, (np.fft.ifft(full, axis=0) * grid.n_theta).T)

    def modes(self):
        """Mode-major coefficient vector c_m(y_j), |m| <= mode_max."""
        c = np.fft.fft(self.values, axis=1) / self.grid.n_theta
        return c[:, self.grid.modes % self.grid.n_theta].T.reshape(-1)

    def inner(self, other):
        w = self.grid.weights[:, None] / self.grid.n_theta
        return complex(np.sum(self.values * np.conj(other.values) * w))

    def norm(self):
        return float(np.sqrt(self.inner(self).real))

    def export(self, path):
        _write_binary(path, self.values, {"kind": "DiscreteFunction", "grid": self.grid.to_dict()})


def mode_norm(grid, vec):
    v = np.asarray(vec).reshape(grid.n_modes, grid.n_y)
    return float(np.sqrt(np.sum(np.abs(v) ** 2 * grid.weights[None, :])))


class OperatorMatrix:
    """Matrix acting on mode-major coefficient vectors; the inner product carries the weights dy/y^2.

    Operators that preserve every theta mode are stored as per-mode blocks (shape (n_modes, n_y, n_y));
    everything else as one dense matrix. `A` always returns the dense form.
    """

    def __init__(self, A=None, grid: GridSpec = None, h=None, t=0.5, label="", blocks=None):
        self.grid = grid
        self.h = h
        self.t = t
        self.label = label
        if blocks is not None:
            blocks = np.asarray(blocks, dtype=complex)
            if blocks.shape != (grid.n_modes, grid.n_y, grid.n_y):
                raise QuantizationError("block dimensions do not match the grid")
            self._blocks, self._A = blocks, None
        else:
            A = np.asarray(A, dtype=complex)
            if A.shape != (grid.dim, grid.dim):
                raise QuantizationError("matrix dimensions do not match the grid")
            self._blocks, self._A = None, A

    @property
    def is_block(self):
        return self._blocks is not None

    @property
    def blocks(self):
        if self._blocks is None:
            raise QuantizationError("operator is not mode-diagonal")
        return self._blocks

    @property
    def A(self):
        if self._A is None:
            n = self.grid.n_y
            A = np.zeros((self.grid.dim, self.grid.dim), dtype=complex)
            for i, B in enumerate(self._blocks):
                A[i * n:(i + 1) * n, i * n:(i + 1) * n] = B
            return A
        return self._A

    @property
    def _w(self):
        return np.tile(self.grid.weights, self.grid.n_modes)

    def _like(self, A=None, blocks=None, label=""):
        return OperatorMatrix(A, self.grid, self.h, self.t, label, blocks=blocks)

    def unitary(self):
        """Matrix in the orthonormal basis W^{1/2} A W^{-1/2} (dense)."""
        s = np.sqrt(self._w)
        return s[:, None] * self.A / s[None, :]

    def unitary_blocks(self):
        s = np.sqrt(self.grid.weights)
        return s[None, :, None] * self.blocks / s[None, None, :]

    @classmethod
    def from_unitary(cls, U, grid, h=None, t=0.5, label=""):
        s = np.sqrt(np.tile(grid.weights, grid.n_modes))
        return cls(U / s[:, None] * s[None, :], grid, h, t, label)

    @classmethod
    def from_unitary_blocks(cls, UB, grid, h=None, t=0.5, label=""):
        s = np.sqrt(grid.weights)
        return cls(None, grid, h, t, label, blocks=UB / s[None, :, None] * s[None, None, :])

    def adjoint(self):
        if self.is_block:
            w = self.grid.weights
            B = np.conj(np.swapaxes(self._blocks, 1, 2)) * w[None, None, :] / w[None, :, None]
            return self._like(blocks=B, label=self.label + "^*")
        w = self._w
        return self._like(np.conj(self.A.T) * w[None, :] / w[:, None], label=self.label + "^*")

    def norm(self):
        if self.is_block:
            return float(max(np.linalg.norm(B, 2) for B in self.unitary_blocks()))
        return float(np.linalg.norm(self.unitary(), 2))

    def block_norms(self):
        return np.array([np.linalg.norm(B, 2) for B in self.unitary_blocks()])

    def frobenius(self):
        if self.is_block:
            return float(np.linalg.norm(self.unitary_blocks()))
        return float(np.linalg.norm(self.unitary()))

    def trace(self):
        if self.is_block:
            return complex(np.einsum("mii->", self._blocks))
        return complex(np.trace(self._A))

    def __matmul__(self, o):
        if self.is_block and o.is_block:
            return self._like(blocks=self._blocks @ o._blocks)
        return self._like(self.A @ o.A)

    def _binop(self, o, f):
        if self.is_block and o.is_block:
            return self._like(blocks=f(self._blocks, o._blocks))
        return self._like(f(self.A, o.A))

    def __add__(self, o):
        return self._binop(o, np.add)

    def __sub__(self, o):
        return self._binop(o, np.subtract)

    def __mul__(self, c):
        if self.is_block:
            return self._like(blocks=self._blocks * c)
        return self._like(self._A * c)

    __rmul__ = __mul__

    def apply(self, f):
        if isinstance(f, DiscreteFunction):
            return DiscreteFunction.from_modes(self.grid, self.apply(f.modes()))
        if self.is_block:
            v = np.asarray(f).reshape(self.grid.n_modes, self.grid.n_y)
            return np.einsum("mij,mj->mi", self._blocks, v).reshape(-1)
        return self._A @ f

    def block(self, m, m2=None):
        n = self.grid.n_y
        i, j = m + self.grid.mode_max, (m if m2 is None else m2) + self.grid.mode_max
        if self.is_block:
            return self._blocks[i] if i == j else np.zeros((n, n), dtype=complex)
        return self._A[i * n:(i + 1) * n, j * n:(j + 1) * n]

    def export(self, path):
        _write_binary(path, self.A, {"kind": "OperatorMatrix", "h": self.h, "t": self.t, "label": self.label,
                                     "layout": "mode-major, index = (m + mode_max) * n_y + j",
                                     "grid": self.grid.to_dict()})


# ---- symbol quadrature ----

_GL = {}


def _gl(n):
    if n not in _GL:
        _GL[n] = np.polynomial.legendre.leggauss(n)
    return _GL[n]


def _eta_nodes(eta_max, kappa, n_gl, panel=0.5):
    """Gauss-Legendre panels on [-eta_max, eta_max]: width <= panel for the symbol, and kappa * width / 2 <= 4
    for the phase exp(i kappa eta)."""
    L = 2 * eta_max
    n_pan = int(max(np.ceil(L / panel), np.ceil(abs(kappa) * L / 8.0)))
    x, w = _gl(n_gl)
    edges = np.linspace(-eta_max, eta_max, n_pan + 1)
    half = np.diff(edges) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def eta_max_for(sig: Symbol, grid: GridSpec):
    if sig.support is not None and np.isfinite(sig.support.eta_max):
        return sig.support.eta_max
    return float(grid.Y_max)


def support_band(grid: GridSpec, margin=0.2):
    return grid.y_min * np.exp(margin), grid.y_max * np.exp(-margin)


def check_support(sig: Symbol, grid: GridSpec, h, tol=1e-12, margin=0.2):
    """Reject symbols with non-negligible mass within `margin` ln-units of the band ends."""
    lo, hi = support_band(grid, margin)
    if sig.support is not None and sig.support.y_lo >= lo and sig.support.y_hi <= hi:
        return
    eta_max = eta_max_for(sig, grid)
    u_in = np.linspace(np.log(lo), np.log(hi), 24)
    u_out = np.concatenate([np.linspace(np.log(grid.y_min), np.log(lo), 6),
                            np.linspace(np.log(hi), np.log(grid.y_max), 6)])
    eta = np.linspace(-eta_max, eta_max, 17)
    jt = np.linspace(-eta_max, eta_max, 9)
    th = np.arange(4) / 4

    def sup(u):
        U, T, E, Jt = np.meshgrid(u, th, eta, jt, indexing="ij")
        y = np.exp(U)
        z = np.stack([y.ravel(), T.ravel(), (E / y).ravel(), (Jt / y).ravel()])
        return float(np.max(np.abs(sig.eval(h, z))))

    s_out, s_in = sup(u_out), sup(u_in)
    if s_out > tol * max(s_in, 1.0):
        raise SupportError(f"symbol has mass {s_out:.2e} near the band ends; widen the grid")


def _mode_combos(grid, band):
    """(m, k) pairs with |m|, |m + k| <= mode_max and |k| <= band."""
    M = grid.mode_max
    ms, ks = [], []
    for m in range(-M, M + 1):
        for k in range(-band, band + 1):
            if abs(m + k) <= M:
                ms.append(m)
                ks.append(k)
    return np.array(ms), np.array(ks)


def _theta_band(sig, grid):
    if sig.theta_free:
        return 0
    b = sig.theta_band
    return 2 * grid.mode_max if b is None else min(int(b), 2 * grid.mode_max)


_EVAL_BUDGET = 400_000


def op_matrix(sig: Symbol, h, grid: GridSpec, t=0.5, check=True, kappa_cut=None, drop_tol=1e-15, chunk=48,
              modes=None):
    """Nystrom matrix of Op_h^t(sigma) on the grid (mode-major, f-basis).

    Entry for modes m -> m + k and nodes (y_i, y_j):
      (y_i/y_j) / (2 pi h y_t) int exp(i (y_i - y_j) eta / (h y_t)) sig_k(y_t, eta / y_t, J) d eta * y_j du
    with y_t = t y_i + (1 - t) y_j, J = 2 pi h (m + (1 - t) k) and sig_k the k-th theta coefficient.
    The phase rate depends only on the ln-y offset i - j, so the matrix is assembled one y-diagonal at a
    time; diagonals are dropped once three consecutive ones fall below drop_tol of the largest entry.
    `modes` restricts the computation to couplings between the listed theta-modes (others stay zero).
    """
    if sig.d != 1:
        raise QuantizationError("op_matrix supports d = 1")
    if not 0 <= t <= 1:
        raise QuantizationError("t must lie in [0, 1]")
    if check and not sig.xi_free:  # multiplication operators are local, truncation is exact
        check_support(sig, grid, h)
    if sig.xi_free:
        return _multiplication(sig, h, grid)
    n, M = grid.n_y, grid.mode_max
    y = grid.y
    band = _theta_band(sig, grid)
    if band == 0:
        B = np.zeros((grid.n_modes, n, n), dtype=complex)
    else:
        A = np.zeros((grid.dim, grid.dim), dtype=complex)
    n_th = 1 if band == 0 else 1 << int(np.ceil(np.log2(2 * band + 2)))
    th = np.arange(n_th) / n_th
    ms, ks = _mode_combos(grid, band)
    if modes is not None:
        keep = np.isin(ms, modes) & np.isin(ms + ks, modes)
        ms, ks = ms[keep], ks[keep]
    Jc = 2 * np.pi * h * (ms + (1 - t) * ks)
    Ju, jinv = np.unique(np.round(Jc, 12), return_inverse=True)
    kidx = ks % n_th
    eta_max = eta_max_for(sig, grid)
    weyl = abs(t - 0.5) < 1e-15
    ylo = sig.support.y_lo if sig.support is not None else 0.0
    yhi = sig.support.y_hi if sig.support is not None else np.inf
    rows_m = (ms + ks + M)[None, :] * n
    cols_m = (ms + M)[None, :] * n

    def fill(ii, jj, vals, live):
        if band == 0:
            B[(ms[live] + M)[None, :], ii[:, None], jj[:, None]] = vals
        else:
            A[rows_m[:, live] + ii[:, None], cols_m[:, live] + jj[:, None]] = vals

    def diagonal(off):
        """Entries on the diagonal i - j = off (and i - j = -off for Weyl); returns the largest entry."""
        jj = np.arange(max(0, -off), min(n, n - off))
        ii = jj + off
        yt = t * y[ii] + (1 - t) * y[jj]
        s = (yt >= ylo) & (yt <= yhi)
        if not np.any(s):
            return 0.0
        ii, jj, yt = ii[s], jj[s], yt[s]
        kap = (np.exp(off * grid.du) - 1) / (h * (t * np.exp(off * grid.du) + 1 - t))
        if kappa_cut is not None and abs(kap) > kappa_cut:
            return 0.0
        nodes, wts = _eta_nodes(eta_max, kap, grid.n_Y, grid.panel)
        ph = np.exp(1j * kap * nodes) * wts
        big = 0.0
        # far diagonals of non-Weyl quantizations need many eta nodes; cap the evaluation block size
        step = max(1, min(chunk, _EVAL_BUDGET // (len(nodes) * n_th * len(Ju))))
        for c0 in range(0, len(ii), step):
            ci, cj, cy = ii[c0:c0 + step], jj[c0:c0 + step], yt[c0:c0 + step]
            # only J with |y J| inside the energy ball can see the symbol
            live = np.abs(Jc) * cy.min() <= eta_max * (1 + 1e-9)
            if not np.any(live):
                continue
            ju = np.unique(jinv[live])
            pos = np.searchsorted(ju, jinv[live])
            Z = np.empty((4, len(ci), len(nodes), n_th, len(ju)))
            Z[0] = cy[:, None, None, None]
            Z[1] = th[None, None, :, None]
            Z[2] = nodes[None, :, None, None] / cy[:, None, None, None]
            Z[3] = Ju[ju][None, None, None, :]
            S = sig.eval(h, Z.reshape(4, -1)).reshape(Z.shape[1:])
            if n_th > 1:
                S = np.fft.fft(S, axis=2) / n_th
            Sc = S[:, :, kidx[live], pos]
            pre = (y[ci] / y[cj]) / (2 * np.pi * h * cy) * y[cj] * grid.du
            V = np.einsum("q,pqc->pc", ph, Sc) * pre[:, None]
            fill(ci, cj, V, live)
            big = max(big, np.max(np.abs(V) * np.sqrt(grid.weights[ci] / grid.weights[cj])[:, None]))
            if weyl and off != 0:
                prem = (y[cj] / y[ci]) / (2 * np.pi * h * cy) * y[ci] * grid.du
                Vm = np.einsum("q,pqc->pc", np.conj(ph), Sc) * prem[:, None]
                fill(cj, ci, Vm, live)
                big = max(big, np.max(np.abs(Vm) * np.sqrt(grid.weights[cj] / grid.weights[ci])[:, None]))
        return big

    top = diagonal(0)
    quiet = 0
    for k in range(1, n):
        big = diagonal(k) if weyl else max(diagonal(k), diagonal(-k))
        top = max(top, big)
        quiet = quiet + 1 if big <= drop_tol * top else 0
        if quiet >= 3:
            break
    if band == 0:
        return OperatorMatrix(None, grid, h, t, sig.name, blocks=B)
    return OperatorMatrix(A, grid, h, t, sig.name)


def _multiplication(sig, h, grid):
    """Exact matrix of multiplication by sigma(y, theta)."""
    n, M = grid.n_y, grid.mode_max
    th = grid.theta
    Yg, Tg = np.meshgrid(grid.y, th, indexing="ij")
    z = np.stack([Yg.ravel(), Tg.ravel(), np.zeros(Yg.size), np.zeros(Yg.size)])
    v = sig.eval(h, z).reshape(Yg.shape)
    c = np.fft.fft(v, axis=1) / grid.n_theta
    if sig.theta_free:
        B = np.zeros((grid.n_modes, n, n), dtype=complex)
        B[:, np.arange(n), np.arange(n)] = c[None, :, 0]
        return OperatorMatrix(None, grid, h, 0.5, sig.name, blocks=B)
    A = np.zeros((grid.dim, grid.dim), dtype=complex)
    idx = np.arange(n)
    for m in range(-M, M + 1):
        for m2 in range(-M, M + 1):
            k = m2 - m
            A[(m2 + M) * n + idx, (m + M) * n + idx] = c[:, k % grid.n_theta]
    return OperatorMatrix(A, grid, h, 0.5, sig.name)


def weyl_kernel(sig: Symbol, h, x, x2, grid: GridSpec, tol=1e-10, max_modes=400):
    """Schwartz kernel (Lebesgue measure dy' dtheta') of Op_h(sigma) at x = (y, theta), x2 = (y', theta').

    The lattice-translate sum is evaluated in its Poisson-dual form as a sum over theta modes
    (m, m') of K_{m'm}(y, y') exp(2 pi i (m' theta - m theta')), grown until the outermost shell
    is below tol of the partial sum.
    """
    (y1, t1), (y2, t2) = x, x2
    yt = 0.5 * (y1 + y2)
    kap = (y1 - y2) / (h * yt)
    eta_max = eta_max_for(sig, grid)
    nodes, wts = _eta_nodes(eta_max, kap, grid.n_Y, grid.panel)
    n_th = 1 if sig.theta_free else grid.n_theta
    th = np.arange(n_th) / n_th
    pre = (y1 / y2) / (2 * np.pi * h * yt)
    ph = np.exp(1j * kap * nodes) * wts

    def coeffs(Js):
        T, E, Jg = np.meshgrid(th, nodes, Js, indexing="ij")
        z = np.stack([np.full(T.size, yt), T.ravel(), E.ravel() / yt, Jg.ravel()])
        S = sig.eval(h, z).reshape(T.shape)
        S = np.fft.fft(S, axis=0) / n_th
        return np.einsum("q,kqr->kr", ph, S) * pre  # (k, J)

    total = 0j
    R = 0
    while True:
        # shell of mode pairs with max(|m|, |m'|) == R
        pairs = [(m, m2) for m in range(-R, R + 1) for m2 in range(-R, R + 1) if max(abs(m), abs(m2)) == R]
        if not sig.theta_free:
            pairs = [(m, m2) for m, m2 in pairs if abs(m2 - m) < n_th // 2]
        else:
            pairs = [(m, m2) for m, m2 in pairs if m == m2]
        Js = np.array([np.pi * h * (m + m2) for m, m2 in pairs])
        if len(pairs):
            C = coeffs(Js)
            shell = sum(C[(m2 - m) % n_th, r] * np.exp(2j * np.pi * (m2 * t1 - m * t2))
                        for r, (m, m2) in enumerate(pairs))
        else:
            shell = 0j
        total += shell
        if R > 2 and abs(shell) <= tol * max(abs(total), 1e-300):
            return complex(total)
        R += 1
        if R > max_modes:
            warnings.warn("lattice truncation: last retained modes exceed tolerance")
            return complex(total)


# ---- Laplacian ----

def fd_second_coeffs(order):
    """Centered coefficients c_0..c_m of the second derivative, accuracy order 2m."""
    m = order // 2
    c = np.zeros(m + 1)
    for k in range(1, m + 1):
        c[k] = 2 * (-1) ** (k + 1) * factorial(m) ** 2 / (k ** 2 * factorial(m - k) * factorial(m + k))
    c[0] = -2 * c[1:].sum()
    return c


def sinc_second_derivative(n, du):
    """Sinc-collocation second derivative on n uniform nodes (zero extension beyond the ends)."""
    k = np.arange(n)
    d = k[:, None] - k[None, :]
    with np.errstate(divide="ignore"):
        D2 = -2.0 * (-1.0) ** d / np.where(d == 0, 1, d) ** 2
    D2[k, k] = -np.pi ** 2 / 3
    return D2 / du ** 2


def laplacian_unitary_block(h, grid: GridSpec, m, order=2):
    """Mode-m block of P = -h^2 Delta / 2 in the orthonormal basis g = sqrt(w) f.

    order is the accuracy of the centered difference in ln y (Dirichlet ends), or "sinc" for the
    spectral rule.
    """
    n = grid.n_y
    if order == "sinc":
        D2 = sinc_second_derivative(n, grid.du)
    else:
        c = fd_second_coeffs(order)
        D2 = np.zeros((n, n))
        for k, ck in enumerate(c):
            if k == 0:
                D2 += ck * np.eye(n)
            else:
                D2 += ck * (np.eye(n, k=k) + np.eye(n, k=-k))
        D2 /= grid.du ** 2
    y = grid.y
    pot = 0.5 * h ** 2 * (0.25 + 4 * np.pi ** 2 * m ** 2 * y ** 2)
    return -0.5 * h ** 2 * D2 + np.diag(pot)


def laplacian_matrix(h, grid: GridSpec, order=2, modes=None) -> OperatorMatrix:
    """Block-diagonal P; blocks outside `modes` (when given) are left zero."""
    UB = np.zeros((grid.n_modes, grid.n_y, grid.n_y), dtype=complex)
    for i, m in enumerate(grid.modes):
        if modes is None or m in modes:
            UB[i] = laplacian_unitary_block(h, grid, m, order)
    return OperatorMatrix.from_unitary_blocks(UB, grid, h, 0.5, "P")


def mode_eigh(op: OperatorMatrix):
    """Per-mode Hermitian eigendecomposition of a block-diagonal operator (unitary basis)."""
    out = []
    for B in op.unitary_blocks():
        B = 0.5 * (B + B.conj().T)
        out.append(np.linalg.eigh(B))
    return out


def function_of_operator(op: OperatorMatrix, f) -> OperatorMatrix:
    """f(P) for a block-diagonal Hermitian P via per-mode eigendecomposition."""
    R = np.stack([(V * f(lam)[None, :]) @ V.conj().T for lam, V in mode_eigh(op)])
    return OperatorMatrix.from_unitary_blocks(R, op.grid, op.h, 0.5, "f(P)")


def sobolev_norm(f, s, h, grid: GridSpec = None, order=2):
    """||(P + 1)^{s/2} f|| with P the grid Laplacian at semiclassical parameter h."""
    if isinstance(f, DiscreteFunction):
        grid = f.grid
        vec = f.modes()
    else:
        vec = np.asarray(f)
    P = laplacian_matrix(h, grid, order)
    g = np.sqrt(np.tile(grid.weights, grid.n_modes)) * vec
    n = grid.n_y
    tot = 0.0
    for i, (lam, V) in enumerate(mode_eigh(P)):
        if np.any(lam + 1 < -1e-10):
            raise QuantizationError("P + 1 has a negative eigenvalue: discretization failure")
        c = V.conj().T @ g[i * n:(i + 1) * n]
        tot += np.sum(np.abs(c) ** 2 * np.clip(lam + 1, 0, None) ** s)
    return float(np.sqrt(tot))


def projector_nonzero(grid: GridSpec, a) -> OperatorMatrix:
    """Pi* f = f - 1(y > a) int f dtheta."""
    if not grid.y_min <= a <= grid.y_max:
        raise QuantizationError("a must lie in the y-band")
    B = np.tile(np.eye(grid.n_y, dtype=complex), (grid.n_modes, 1, 1))
    j = np.nonzero(grid.y > a)[0]
    B[grid.mode_max, j, j] = 0.0
    return OperatorMatrix(None, grid, None, 0.5, "Pi*", blocks=B)


def theta_synthesis(grid):
    """Map mode coefficients to theta-grid samples, shape (n_theta, n_modes)."""
    return np.exp(2j * np.pi * np.outer(grid.theta, grid.modes))


def schur_bound(M: OperatorMatrix, tau, d=1):
    """Discrete Schur constant C(A, tau) for the kernel of M against dy dtheta.

    C = sup_x sum_x' (y'/y)^{d+1+tau} |K| dx' * sup_x' sum_x (y/y')^tau |K| dx.
    Returns inf (with a warning) when a weighted row or column sum is not finite.
    """
    g = M.grid
    n, nt = g.n_y, g.n_theta
    S = theta_synthesis(g)
    A = S.conj().T / nt
    A4 = M.A.reshape(g.n_modes, n, g.n_modes, n)
    # grid operator G[(l, i), (l', j)] = sum S[l, m2] A4[m2, i, m, j] Anal[m, l']
    G = np.einsum("am,minj,nb->aibj", S, A4, A)
    dy = g.y * g.du
    dth = 1.0 / nt
    K = np.abs(G) / (dy[None, None, None, :] * dth)
    yi = g.y[None, :, None, None]
    yj = g.y[None, None, None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        rows = np.sum(K * (yj / yi) ** (d + 1 + tau) * dy[None, None, None, :] * dth, axis=(2, 3))
        cols = np.sum(K * (yi / yj) ** tau * dy[None, :, None, None] * dth, axis=(0, 1))
    C = float(rows.max() * cols.max())
    if not np.isfinite(C):
        warnings.warn("Schur integral diverges at this tau")
        return np.inf
    return C
