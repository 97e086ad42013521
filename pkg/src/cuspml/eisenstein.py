"""Eisenstein series of the modular surface, Wigner distributions of Eisenstein states and the
horocycle/Liouville comparison experiments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .flows import (_simpson, _sig_t_min, horocycle_measure, horocycle_profile,
                    liouville_average)
from .quantization import GridSpec, op_matrix
from .special import BudgetError, bessel_k, divisor_sigma, scattering_phi, zeta
from .symbols import Symbol


@dataclass(frozen=True)
class SpectralParameter:
    """s = d/2 + eta + i/h and the rescaled eigenvalue W = (h^2/2) s (d - s)."""
    h: float
    eta: float
    d: int = 1

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")

    @property
    def s(self):
        return complex(self.d / 2 + self.eta, 1.0 / self.h)

    @property
    def W(self):
        s = self.s
        return 0.5 * self.h ** 2 * s * (self.d - s)

    def W_check(self):
        h, e, d = self.h, self.eta, self.d
        return abs(self.W - 0.5 * (1 - 2j * e * h + h * h * (d * d / 4 - e * e)))


def classical_constant(s, scaled=True):
    """4 pi^s / (Gamma(s) zeta(2s)), times e^{-pi |Im s| / 2} when scaled (validation only)."""
    s = complex(s)
    lc = np.log(4) + s * np.log(np.pi) - complex(loggamma(s)) - np.log(zeta(2 * s))
    if scaled:
        lc -= 0.5 * np.pi * abs(s.imag)
    return complex(np.exp(lc))


class EisensteinEvaluator:
    """E(z, s) = y^s + phi(s) y^{1-s} + c sqrt(y) sum_n n^{s-1/2} sigma_{1-2s}(n) K_{s-1/2}(2 pi n y) cos(2 pi n x).

    K is kept in the scaled form e^{pi|Im nu|/2} K_nu, and c absorbs the inverse factor. c is
    fixed by exact automorphy E(-1/z) = E(z) at the calibration point.
    """

    def __init__(self, s, y_min=0.5, tol=1e-14, cal_point=0.2 + 0.95j, n_cap=5000):
        self.s = complex(s)
        if y_min < 0.5:
            raise BudgetError("mode sums are budgeted for y >= 0.5")
        self.y_min = y_min
        self.nu = self.s - 0.5
        self.phi = scattering_phi(self.s)
        self.tol = tol
        self.N_max = self._choose_nmax(n_cap)
        n = np.arange(1, self.N_max + 1)
        self._coef = np.array([k ** self.nu * divisor_sigma(k, 1 - 2 * self.s) for k in n])
        self.cal_point = complex(cal_point)
        self.c = self._calibrate(self.cal_point)

    def _choose_nmax(self, n_cap):
        T = abs(self.nu.imag)
        n = 1
        # past the turning point 2 pi n y = |nu| the terms decay like e^{-2 pi n y}
        n0 = int(np.ceil((T + 1) / (2 * np.pi * self.y_min)))
        n_hi = n0 + int(np.ceil(40.0 / (2 * np.pi * self.y_min))) + 2
        if n_hi > n_cap:
            raise BudgetError(f"mode cutoff {n_hi} exceeds the budget {n_cap}")
        ks = np.arange(1, n_hi + 1)
        mags = np.array([abs(k ** self.nu * divisor_sigma(k, 1 - 2 * self.s)) for k in ks])
        kv = np.abs(np.array([bessel_k(self.nu, 2 * np.pi * k * self.y_min, scaled=True) for k in ks]))
        terms = mags * kv
        big = np.max(np.abs(np.cumsum(terms)))
        keep = np.nonzero(terms > self.tol * big)[0]
        n = int(keep[-1]) + 1 if len(keep) else 1
        return max(n, 1)

    # ---- pieces ----
    def constant_term(self, y):
        y = np.asarray(y, dtype=float)
        return y ** self.s + self.phi * y ** (1 - self.s)

    def mode_coeffs(self, y):
        """a_n(y) = sqrt(y) n^{s-1/2} sigma(n) Kscaled(2 pi n y), shape (N_max,) + y.shape (without c)."""
        y = np.asarray(y, dtype=float)
        if np.any(y < self.y_min * (1 - 1e-12)):
            raise BudgetError(f"y below the budgeted minimum {self.y_min}")
        flat = y.ravel()
        out = np.empty((self.N_max, flat.size), dtype=complex)
        for k in range(self.N_max):
            out[k] = self._coef[k] * bessel_k(self.nu, 2 * np.pi * (k + 1) * flat, scaled=True)
        out *= np.sqrt(flat)[None, :]
        return out.reshape((self.N_max,) + y.shape)

    def _B(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        a = self.mode_coeffs(z.imag)
        n = np.arange(1, self.N_max + 1).reshape((-1,) + (1,) * z.ndim)
        return np.sum(a * np.cos(2 * np.pi * n * z.real[None]), axis=0)

    def _calibrate(self, z):
        zp = -1 / z
        if min(z.imag, zp.imag) < self.y_min:
            raise BudgetError("calibration point and its inversion must satisfy y >= y_min")
        dA = self.constant_term(zp.imag) - self.constant_term(z.imag)
        dB = self._B(zp)[0] - self._B(z)[0]
        return complex(-dA / dB)

    # ---- evaluation ----
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        v = self.constant_term(z.imag) + self.c * self._B(z).reshape(z.shape)
        return v

    def automorphy_residual(self, points):
        pts = np.asarray(points, dtype=complex)
        return np.abs(self(-1 / pts) - self(pts))

    def zeroth_coefficient(self, y, n_x=None):
        """Trapezoid average over x of E(x + iy); exact for trigonometric polynomials of degree < n_x."""
        n_x = n_x or 2 * self.N_max + 2
        x = np.arange(n_x) / n_x
        return complex(np.mean(self(x + 1j * y)))

    def eigen_residual(self, z, delta):
        """max |y^2 (E_xx + E_yy) + s(1-s) E| on the points z with a 5-point stencil of width delta."""
        z = np.asarray(z, dtype=complex)
        E0 = self(z)
        lap = (self(z + delta) + self(z - delta) + self(z + 1j * delta) + self(z - 1j * delta) - 4 * E0) / delta ** 2
        return float(np.max(np.abs(z.imag ** 2 * lap + self.s * (1 - self.s) * E0)))

    def on_grid(self, grid: GridSpec):
        """Mode-major coefficient vector of E restricted to the quantization grid."""
        y = grid.y
        vec = np.zeros((grid.n_modes, grid.n_y), dtype=complex)
        M = grid.mode_max
        vec[M] = self.constant_term(y)
        n_use = min(M, self.N_max)
        if n_use:
            a = self.mode_coeffs(y)[:n_use] * (0.5 * self.c)
            vec[M + 1:M + 1 + n_use] = a
            vec[M - n_use:M][::-1] = a
        return vec.reshape(-1)


def wigner_grid(sig: Symbol, h, fac=1.2, pad=0.25, extra_modes=1):
    """Grid resolving Op(sigma) on the symbol's y-support at semiclassical parameter h."""
    sup = sig.support
    em = sup.eta_max
    ymin, ymax = sup.y_lo * np.exp(-pad), sup.y_hi * np.exp(pad)
    L = np.log(ymax / ymin)
    n_y = int(np.ceil(L * em / (fac * np.pi * h)))
    M = int(np.ceil(em / (2 * np.pi * h * sup.y_lo))) + extra_modes
    n_theta = 1 << int(np.ceil(np.log2(2 * M + 2)))
    return GridSpec(y_min=ymin, y_max=ymax, n_y=n_y, mode_max=M, n_theta=n_theta)


def check_wigner_support(sig: Symbol, grid: GridSpec):
    sup = sig.support
    if sup is None or sup.y_lo < 1.1 or sup.y_hi > grid.y_max * np.exp(-0.2):
        raise ValueError("wigner needs sigma supported in y in [1.1, y_max e^{-0.2}]")


def wigner(sig: Symbol, spar: SpectralParameter, grid: GridSpec = None, evaluator=None, op=None):
    """<Op(sigma) E, E> with the weighted inner product (second slot conjugated)."""
    grid = grid or wigner_grid(sig, spar.h)
    check_wigner_support(sig, grid)
    ev = evaluator or EisensteinEvaluator(spar.s, y_min=max(0.5, min(grid.y_min, 0.9)))
    c = ev.on_grid(grid)
    M = op if op is not None else op_matrix(sig, spar.h, grid)
    Mc = M.apply(c).reshape(grid.n_modes, grid.n_y)
    cc = c.reshape(grid.n_modes, grid.n_y)
    return complex(np.sum(Mc * np.conj(cc) * grid.weights[None, :]))


def _cusp_window(y, T, t, a=1.0):
    """[chi_{T+t} chi](y): chi rises from 0 at 2a to 1 at 3a, chi_s falls from 1 at 4a e^s to 0 at 5a e^s."""
    def step(v):
        v = np.clip(v, 0.0, 1.0)
        f = lambda u: np.where(u > 0, np.exp(-1 / np.where(u > 0, u, 1.0)), 0.0)
        return f(v) / (f(v) + f(1 - v))
    lo = step((y / a - 2.0))
    u = np.log(y / a) - (T + t)
    hi = 1 - step((u - np.log(4)) / (np.log(5) - np.log(4)))
    return lo * hi


def propagated_state_approx(sig: Symbol, spar: SpectralParameter, t, T, a=1.0, n_theta=4096, dt=0.02, seed=0):
    """2 pi a^{2 eta} eta e^{-2 eta t} int dtheta dtau e^{2 eta tau} [chi_{T+t} chi]^2(a e^tau) sigma(phi_{tau-t}(a, theta, 1/a, 0)).

    Written in t' = t - tau this is a weighted horocycle integral over t' in [-T - ln 5, t - ln 2].
    """
    eta = spar.eta
    if sig.support is not None and np.isfinite(sig.support.y_hi) and sig.support.y_hi > a * np.exp(T):
        raise ValueError("sigma must be supported in y <= a e^T")
    t_lo = min(-(T + np.log(5)), _sig_t_min(sig, a))
    t_hi = t - np.log(2)
    if t_hi <= 0:
        return 0.0
    (tn, fn), (tp, fp) = horocycle_profile(sig, t_lo, t_hi, +1, a, n_theta, dt, seed=seed)
    def part(ts, f):
        if not len(ts):
            return 0.0
        w = _cusp_window(a * np.exp(t - ts), T, t, a) ** 2
        return _simpson(f * w * np.exp(-2 * eta * ts), ts[1] - ts[0])
    tot = part(tn, fn) + part(tp, fp)
    return float(2 * np.pi * a ** (2 * eta) * eta * tot)


# The limit constants below refer to a y-quantization with prefactor 1/h instead of 1/(2 pi h).
OP_SCALE = 2 * np.pi


def dyatlov_check(sig: Symbol, nu, h_list, n_theta=4096, seed=0, grids=None):
    """Rows (h, eta, eta Re<Op E, E>, pi mu^+_nu, ratio); fixed eta = nu, Op rescaled by OP_SCALE."""
    mu = horocycle_measure(sig, nu, +1, n_theta=n_theta, seed=seed)
    rows = []
    for k, h in enumerate(h_list):
        spar = SpectralParameter(h, nu)
        w = wigner(sig, spar, grid=None if grids is None else grids[k])
        lhs = OP_SCALE * nu * w.real
        rows.append({"h": h, "eta": nu, "eta_wigner": lhs, "imag_rel": abs(w.imag) / max(abs(w), 1e-300),
                     "pi_mu": np.pi * mu, "ratio": lhs / (np.pi * mu) if mu else np.nan})
    errs = [abs(r["ratio"] - 1) for r in rows]
    trend = all(b <= a for a, b in zip(errs, errs[1:]))
    return rows, {"trend": trend, "mu": mu}


def eta_slow(h, C0):
    L = abs(np.log(h))
    return C0 * np.log(L) / L


def theorem1_scan(sig: Symbol, h_list, C0, grids=None):
    """Rows (h, eta(h), eta Re<Op E, E> / (pi L1(sigma))) with eta(h) = C0 log|log h| / |log h|
    and Op rescaled by OP_SCALE."""
    L1 = liouville_average(sig)
    rows = []
    for k, h in enumerate(h_list):
        eta = eta_slow(h, C0)
        spar = SpectralParameter(h, eta)
        w = wigner(sig, spar, grid=None if grids is None else grids[k])
        lhs = OP_SCALE * eta * w.real
        rows.append({"h": h, "eta": eta, "eta_wigner": lhs, "L1": L1, "ratio": lhs / (np.pi * L1) if L1 else 0.0})
    errs = [abs(r["ratio"] - 1) for r in rows]
    trend = all(b <= a for a, b in zip(errs, errs[1:]))
    return rows, {"trend": trend, "L1": L1}
