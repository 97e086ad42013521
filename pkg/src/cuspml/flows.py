"""Geodesic flow on the cusp chart and on the modular surface, variational flow, Lyapunov
exponents, horocycle measures and Liouville averages."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (DEFAULT_CHART, CuspChart, ModularPoint, PhasePoint, frame_matrix,
                       hamiltonian, point_from_sl2, sasaki_gram)
from .special import BudgetError
from .symbols import Support, Symbol


class FlowError(RuntimeError):
    pass


class BandExit(FlowError):
    pass


@dataclass(frozen=True)
class FullCusp:
    chart: CuspChart = DEFAULT_CHART
    y_lo: float = 0.05
    y_hi: float = 1e3


@dataclass(frozen=True)
class ModularSurface:
    pass


@dataclass
class FlowState:
    point: object
    jac: np.ndarray
    time: float
    exited: bool = False
    energy_drift: float = 0.0


# ---- cusp chart: equations of motion ----

def cusp_rhs(z, d=1):
    """Hamiltonian vector field of p = y^2 (Y^2 + |J|^2) / 2."""
    y, Y, J = z[0], z[d + 1], z[d + 2:2 * d + 2]
    out = np.empty_like(z)
    out[0] = y * y * Y
    out[1:d + 1] = y * y * J
    out[d + 1] = -y * (Y * Y + np.sum(J * J, axis=0))
    out[d + 2:] = 0.0
    return out


def cusp_rhs_jac(z, d=1):
    y, Y, J = z[0], z[d + 1], z[d + 2:2 * d + 2]
    n = 2 * d + 2
    A = np.zeros((n, n))
    A[0, 0] = 2 * y * Y
    A[0, d + 1] = y * y
    for k in range(d):
        A[1 + k, 0] = 2 * y * J[k]
        A[1 + k, d + 2 + k] = y * y
        A[d + 1, d + 2 + k] = -2 * y * J[k]
    A[d + 1, 0] = -(Y * Y + np.dot(J, J))
    A[d + 1, d + 1] = -2 * y * Y
    return A


def _rk4_step(z, Phi, dt, d):
    def f(z, P):
        return cusp_rhs(z, d), cusp_rhs_jac(z, d) @ P
    k1 = f(z, Phi)
    k2 = f(z + 0.5 * dt * k1[0], Phi + 0.5 * dt * k1[1])
    k3 = f(z + 0.5 * dt * k2[0], Phi + 0.5 * dt * k2[1])
    k4 = f(z + dt * k3[0], Phi + dt * k3[1])
    z = z + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    Phi = Phi + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return z, Phi


def integrate_cusp(model: FullCusp, xi: PhasePoint, t, step=1e-3):
    """RK4 for the flow and its coordinate Jacobian; stops with exited=True on leaving the band."""
    d = model.chart.d
    z = xi.as_array().astype(float)
    p0 = hamiltonian(xi)
    Phi = np.eye(2 * d + 2)
    sgn = 1.0 if t >= 0 else -1.0
    T = abs(float(t))
    s = 0.0
    exited = False
    while s < T:
        v = np.linalg.norm(cusp_rhs(z, d))
        dt = min(step * min(1.0, 1.0 / v) if v > 0 else step, T - s)
        z, Phi = _rk4_step(z, Phi, sgn * dt, d)
        s += dt
        if not model.y_lo <= z[0] <= model.y_hi:
            exited = True
            break
    pt = PhasePoint.from_array(z, model.chart)
    drift = abs(hamiltonian(pt) - p0)
    return FlowState(pt, Phi, sgn * s, exited, drift), Phi


def cusp_flow_exact(Z, t, chart: CuspChart = DEFAULT_CHART):
    """Closed-form cusp geodesic flow on stacked arrays Z of shape (2d+2, ...).

    Each geodesic lies in the vertical half-plane spanned by d/dy and the J direction, where the
    motion is the hyperbolic-plane flow g -> g diag(e^{vt/2}, e^{-vt/2}).
    """
    d = chart.d
    Z = np.asarray(Z, dtype=float)
    shape = Z.shape[1:]
    Z = Z.reshape(2 * d + 2, -1)
    y, th, Y, J = Z[0], Z[1:d + 1], Z[d + 1], Z[d + 2:]
    Jn = np.sqrt(np.sum(J * J, axis=0))
    v = y * np.sqrt(Y * Y + Jn * Jn)
    t = np.broadcast_to(np.asarray(t, dtype=float), y.shape)
    e = np.where(v > 0, (Jn + 1j * Y) / np.where(v > 0, v / y, 1.0), 1j)
    a, b, c, dd = _sl2_arrays(np.zeros_like(y), y, e)
    s = np.exp(0.5 * v * t)
    a, c = a * s, c * s
    b, dd = b / s, dd / s
    x2, y2, e2 = _frame_point(a, b, c, dd)
    xi_abs = np.where(v > 0, v / y2, 0.0)
    out = np.empty_like(Z)
    out[0] = y2
    Jhat = np.where(Jn > 0, J / np.where(Jn > 0, Jn, 1.0), 0.0)
    theta = th + x2 * Jhat
    out[1:d + 1] = chart.reduce_theta(theta) if d > 1 else np.mod(theta, chart.L[0, 0])
    out[d + 1] = xi_abs * e2.imag
    out[d + 2:] = J
    return out.reshape((2 * d + 2,) + shape)


def _sl2_arrays(x, y, e):
    """Vectorized n_x a_y k_phi with phi = arg(-i e)/2; returns the four entries."""
    phi = 0.5 * np.angle(-1j * e)
    c, s = np.cos(phi), np.sin(phi)
    sy = np.sqrt(y)
    return sy * c - x / sy * s, sy * s + x / sy * c, -s / sy, c / sy


def _frame_point(a, b, c, d):
    n = c * c + d * d
    x = (a * c + b * d) / n
    y = 1.0 / n
    w = 1j * c + d
    e = 1j * np.conj(w) / w
    return x, y, e


# ---- modular surface ----

def _reduce_arrays(a, b, c, d, tol=1e-13, max_iter=10_000):
    """Left-multiply each frame by the element of PSL2(Z) moving its base point into the
    fundamental domain {|x| <= 1/2, |z| >= 1}."""
    a, b, c, d = (np.array(v, dtype=float, copy=True) for v in (a, b, c, d))
    for _ in range(max_iter):
        x, y, _ = _frame_point(a, b, c, d)
        n = np.ceil(x - 0.5 - tol)
        a -= n * c
        b -= n * d
        x = x - n
        r2 = x * x + y * y
        inv = (r2 < 1 - tol) | ((np.abs(r2 - 1) <= tol) & (x < -tol))
        if not inv.any():
            return a, b, c, d
        a[inv], b[inv], c[inv], d[inv] = -c[inv], -d[inv], a[inv].copy(), b[inv].copy()
    raise FlowError("modular reduction did not terminate")


def modular_arrays(Z):
    """(x, y, Y, J) stacked arrays -> frame entries and speed v = sqrt(2p)."""
    x, y, Y, J = (np.asarray(v, dtype=float) for v in Z)
    v = y * np.sqrt(Y * Y + J * J)
    e = np.where(v > 0, (J + 1j * Y) / np.where(v > 0, v / y, 1.0), 1j)
    return _sl2_arrays(x, y, e), v


def modular_phase(a, b, c, d, v):
    x, y, e = _frame_point(a, b, c, d)
    xi = np.where(v > 0, v / y, 0.0)
    return np.stack([x, y, xi * e.imag, xi * e.real])


class ModularTrajectories:
    """Incremental exact flow of many modular phase points with reduction after every step."""

    def __init__(self, Z, dt=0.5):
        (self.a, self.b, self.c, self.d), self.v = modular_arrays(Z)
        self.a, self.b, self.c, self.d = _reduce_arrays(self.a, self.b, self.c, self.d)
        self.dt = dt
        self.t = 0.0

    def advance(self, t):
        """Advance every point by time t (either sign)."""
        n = max(1, int(np.ceil(abs(t) / self.dt)))
        s = np.exp(0.5 * self.v * t / n)
        for _ in range(n):
            self.a *= s
            self.c *= s
            self.b /= s
            self.d /= s
            self.a, self.b, self.c, self.d = _reduce_arrays(self.a, self.b, self.c, self.d)
        self.t += t
        return self

    def state(self):
        return modular_phase(self.a, self.b, self.c, self.d, self.v)


def modular_flow_arr(Z, t, dt=0.5):
    Z = np.asarray(Z, dtype=float)
    shp = Z.shape[1:]
    tr = ModularTrajectories(Z.reshape(4, -1), dt).advance(t)
    return tr.state().reshape((4,) + shp)


def _modular_state(p):
    """ModularPoint plus speed from a PhasePoint-like (x, y, Y, J) input."""
    if isinstance(p, PhasePoint):
        return np.array([p.theta[0], p.y, p.Y, p.J[0]])
    return np.asarray(p, dtype=float)


# ---- generic API ----

def flow(model, xi, t, allow_exit=False):
    """phi_t(xi).  FullCusp: RK4 in the chart; ModularSurface: exact SL(2) algebra plus reduction.

    For the modular surface xi is a ModularPoint (frame g, unit speed) or an (x, y, Y, J) array.
    """
    if isinstance(model, FullCusp):
        st, _ = integrate_cusp(model, xi, t)
        if st.exited and not allow_exit:
            raise BandExit(f"trajectory left the band [{model.y_lo}, {model.y_hi}] at t={st.time:.4f}")
        return st.point
    if isinstance(model, ModularSurface):
        if isinstance(xi, ModularPoint):
            g = xi.direction
            n = max(1, int(np.ceil(abs(t) / 0.5)))
            s = np.exp(0.5 * t / n)
            a, b, c, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
            for _ in range(n):
                a, b, c, d = _reduce_arrays(a * s, b / s, c * s, d / s)
            G = np.array([[float(a), float(b)], [float(c), float(d)]])
            z, _ = point_from_sl2(G)
            return ModularPoint(z.real, z.imag, G)
        return modular_flow_arr(_modular_state(xi), t)
    raise TypeError(f"unknown surface model {model!r}")


def orthonormal_factor(pt: PhasePoint):
    """Matrix taking coordinate components to Sasaki-orthonormal components."""
    G = sasaki_gram(pt)
    L = np.linalg.cholesky(G)
    return L.T @ np.linalg.inv(frame_matrix(pt))


def modular_jacobian(v, t):
    """Differential of the modular flow at speed v in a Sasaki-orthonormal frame
    (flow direction, radial, horizontal normal, vertical normal).

    Normal Jacobi fields solve J'' = v^2 J, so the normal block is [[ch, sh / v], [v sh, ch]] at vt.
    """
    ch, sh = np.cosh(v * t), np.sinh(v * t)
    return np.array([[1.0, t, 0, 0], [0, 1.0, 0, 0], [0, 0, ch, sh / v], [0, 0, v * sh, ch]])


def variational(model, xi, t):
    """Differential of phi_t in Sasaki-orthonormal frames at source and target."""
    if isinstance(model, FullCusp):
        st, Phi = integrate_cusp(model, xi, t)
        if st.exited:
            raise BandExit(f"trajectory left the band at t={st.time:.4f}")
        return orthonormal_factor(st.point) @ Phi @ np.linalg.inv(orthonormal_factor(xi))
    if isinstance(model, ModularSurface):
        Z = _modular_state(xi) if not isinstance(xi, ModularPoint) else np.array([xi.x, xi.y, 1 / xi.y, 0.0])
        v = Z[1] * np.hypot(Z[2], Z[3])
        return modular_jacobian(v, t)
    raise TypeError(f"unknown surface model {model!r}")


def lyapunov(model, xi, T, dt=0.5):
    """(1/T) log ||d phi_T|| accumulated with QR re-orthonormalization every dt."""
    n = max(1, int(np.ceil(T / dt)))
    h = T / n
    logs = None
    Q = None
    cur = xi
    for _ in range(n):
        if isinstance(model, FullCusp):
            st, Phi = integrate_cusp(model, cur, h)
            if st.exited:
                raise BandExit(f"trajectory left the band at t={st.time:.4f}")
            Jm = orthonormal_factor(st.point) @ Phi @ np.linalg.inv(orthonormal_factor(cur))
            cur = st.point
        else:
            Jm = variational(model, cur, h)
            cur = flow(model, cur, h) if isinstance(cur, ModularPoint) else flow(model, cur, h)
        M = Jm if Q is None else Jm @ Q
        Q, R = np.linalg.qr(M)
        lr = np.log(np.abs(np.diag(R)))
        logs = lr if logs is None else logs + lr
    return float(np.max(logs) / T)


def cusp_lyapunov(xi: PhasePoint, T, dt=1.0, eps=1e-6):
    """lyapunov() on the hyperbolic-plane chart using the closed-form flow and central differences
    in Sasaki-orthonormal directions; cheap enough for long T.

    Before each step the point is moved to y = 1, theta = 0 by a dilation and a translation. Both are
    isometries whose lifts preserve the Sasaki metric, so the orthonormal-frame differential is unchanged
    while the finite differences keep full precision.
    """
    chart = xi.chart
    d = chart.d
    L = chart.L[0, 0]
    n = max(1, int(np.ceil(T / dt)))
    step = T / n
    z = xi.as_array()
    logs = np.zeros(2 * d + 2)
    Q = np.eye(2 * d + 2)
    for _ in range(n):
        z = np.concatenate([[1.0], np.zeros(d), z[d + 1:] * z[0]])
        pt = PhasePoint.from_array(z, chart)
        D = np.linalg.inv(orthonormal_factor(pt)) * eps
        Zs = np.concatenate([z[:, None] + D, z[:, None] - D], axis=1)
        out = cusp_flow_exact(Zs, step, chart)
        diff = out[:, :2 * d + 2] - out[:, 2 * d + 2:]
        diff[1:d + 1] = (diff[1:d + 1] + L / 2) % L - L / 2
        z = cusp_flow_exact(z[:, None], step, chart)[:, 0]
        Jm = orthonormal_factor(PhasePoint.from_array(z, chart)) @ diff / (2 * eps)
        Q, R = np.linalg.qr(Jm @ Q)
        logs += np.log(np.abs(np.diag(R)))
    return float(np.max(logs) / T)


def homogeneity_defect(xi: PhasePoint, t, kappa=2.0, step=1e-3):
    """max |phi_t(kappa xi) - kappa . phi_{kappa t}(xi)| in stacked coordinates, RK4 on the full chart;
    kappa acts on the fiber coordinates (Y, J)."""
    d = xi.d
    z = xi.as_array()
    zk = z.copy()
    zk[d + 1:] *= kappa
    model = FullCusp(xi.chart, 1e-12, 1e12)
    a, _ = integrate_cusp(model, PhasePoint.from_array(zk, xi.chart), t, step)
    b, _ = integrate_cusp(model, xi, kappa * t, step / kappa)
    lhs, rhs = a.point.as_array(), b.point.as_array()
    rhs[d + 1:] *= kappa
    diff = lhs - rhs
    L = xi.chart.L[0, 0]
    diff[1:d + 1] = (diff[1:d + 1] + L / 2) % L - L / 2
    return float(np.max(np.abs(diff)))


def vertical_point(y0, theta0=0.0, p=0.5, chart=DEFAULT_CHART):
    """Upward vertical covector of energy p at height y0."""
    return PhasePoint(y0, [theta0] * chart.d, np.sqrt(2 * p) / y0, [0.0] * chart.d, chart)


# ---- transported symbols ----

def transported_symbol(sig: Symbol, t, model: FullCusp = None, margin=0.2, check=True):
    """sigma o phi_t as a callable-backed symbol (closed-form cusp flow)."""
    model = model or FullCusp(sig.chart)
    if check:
        check_transport(sig, t, model, margin)
    chart = sig.chart

    def f(h, z):
        z = np.asarray(z, dtype=float)
        return sig.eval(h, cusp_flow_exact(z, t, chart))

    sup = None
    if sig.support is not None and t != 0:
        # energy is conserved, y-range widened by the corner transport bound
        lo, hi = transport_band(sig, t)
        sup = Support(lo, hi, sig.support.E)
    elif sig.support is not None:
        sup = sig.support
    return Symbol(func=f, d=sig.d, order=sig.order, support=sup, name=f"{sig.name}_t{t:g}",
                  chart=chart, theta_free=sig.theta_free, theta_band=sig.theta_band if sig.theta_free else None)


def transport_band(sig: Symbol, t):
    """y-interval containing phi_{-t}(supp sigma): |ln y(s) - ln y(0)| <= v|s| on the hyperbolic plane."""
    s = sig.support
    if s is None or not np.isfinite(s.E) and not np.isfinite(s.xi_max):
        raise FlowError("transport needs an energy-bounded support hint")
    E = min(s.E, 0.5 * sig.d * s.xi_max ** 2 + 0.5 * s.xi_max ** 2)
    v = np.sqrt(2 * E)
    hi = s.y_hi * np.exp(v * abs(t))
    jr = getattr(sig, "j_range", None)
    if jr is not None and jr[0] > 0:
        hi = min(hi, max(s.y_hi, v / jr[0]))  # geodesics are semicircles of Euclidean radius v / |J|
    return s.y_lo * np.exp(-v * abs(t)), hi


def check_transport(sig, t, model: FullCusp, margin=0.2):
    lo, hi = transport_band(sig, t)
    if np.log(lo / model.y_lo) < margin or np.log(model.y_hi / hi) < margin:
        raise FlowError(f"transported support [{lo:.3g}, {hi:.3g}] leaves the band of model {model}")
    return lo, hi


def c1_growth(sig: Symbol, ts, h=0.0, n=400, seed=0):
    """max |d(sigma o phi_t)| over sampled support points for each t; returns fitted exponent and norms."""
    rng = np.random.default_rng(seed)
    s = sig.support
    v = np.sqrt(2 * s.E)
    y = np.exp(rng.uniform(np.log(s.y_lo), np.log(s.y_hi), n))
    ang = rng.uniform(0, 2 * np.pi, n)
    r = rng.uniform(0, v, n)
    Z = np.stack([y, rng.uniform(0, 1, n), r * np.sin(ang) / y, r * np.cos(ang) / y])
    norms = []
    for t in ts:
        st = transported_symbol(sig, -t, check=False)
        Zs = cusp_flow_exact(Z, t)  # points sampled on the transported support
        g = np.stack([st.partial(h, Zs, (i,)) for i in range(4)])
        # covariant size: scale by frame lengths y and 1/y
        F = np.array([Zs[0], Zs[0], 1 / Zs[0], 1 / Zs[0]])
        norms.append(float(np.max(np.sqrt(np.sum(np.abs(g * F) ** 2, axis=0)))))
    norms = np.array(norms)
    ts = np.asarray(ts, dtype=float)
    k = ts > 0
    slope = np.polyfit(ts[k], np.log(norms[k]), 1)[0] if k.sum() >= 2 else np.nan
    return float(slope), norms


# ---- measures ----

def _gl(n):
    return np.polynomial.legendre.leggauss(n)


def liouville_average(sig: Symbol, model=None, n_x=48, n_w=48, n_ang=64, w_lo=None, h=0.0, p0=0.5):
    """Average of sigma over the unit energy shell {p = p0} of the modular surface (probability
    normalization).  Coordinates: x in [-1/2, 1/2], w = 1/y in (0, 1/sqrt(1-x^2)], direction angle."""
    xg, xw = _gl(n_x)
    x = 0.5 * xg
    xw = 0.5 * xw
    ys = sig.support.y_hi if sig.support is not None else np.inf
    if w_lo is None:
        w_lo = 0.0 if not np.isfinite(ys) else 1.0 / ys
    if w_lo == 0.0 and not np.isfinite(ys):
        raise FlowError("liouville_average needs a y-bounded symbol")
    wg, ww = _gl(n_w)
    ang = 2 * np.pi * np.arange(n_ang) / n_ang
    v = np.sqrt(2 * p0)
    tot = 0.0
    for xi_, xwi in zip(x, xw):
        w_hi = 1.0 / np.sqrt(1 - xi_ ** 2)
        if w_hi <= w_lo:
            continue
        # panels in ln w keep the y-bump resolved
        edges = np.exp(np.linspace(np.log(w_lo if w_lo > 0 else 1e-6), np.log(w_hi), 5))
        for lo, hi in zip(edges[:-1], edges[1:]):
            w = 0.5 * (hi - lo) * wg + 0.5 * (hi + lo)
            wq = 0.5 * (hi - lo) * ww
            y = 1.0 / w
            Y_ = (v / y)[:, None] * np.sin(ang)[None, :]
            J_ = (v / y)[:, None] * np.cos(ang)[None, :]
            yy = np.broadcast_to(y[:, None], Y_.shape)
            th = np.full(Y_.shape, np.mod(xi_, 1.0))
            vals = sig.eval(h, np.stack([yy, th, Y_, J_])).real
            tot += xwi * np.sum(wq * vals.mean(axis=1))
    return float(tot / (np.pi / 3))


def fundamental_area(n_x=64):
    xg, xw = _gl(n_x)
    x = 0.5 * xg
    return float(np.sum(0.5 * xw / np.sqrt(1 - x ** 2)))


def horocycle_profile(sig: Symbol, t_lo, t_hi, sign=+1, a=1.0, n_theta=4096, dt=0.02, h=0.0, seed=0):
    """theta-averages f(t) = <sigma(phi_{-sign t}(a, theta, sign/a, 0))>_theta on a uniform t-grid
    over [t_lo, t_hi] (t_lo <= 0 <= t_hi) with an even number of steps on each side of 0.

    t < 0 is the straight excursion into the cusp (closed form); t > 0 follows the exact modular
    flow with reduction.  theta is sampled by jittered strata, since equispaced rational samples
    all run up the cusp together once e^{-t} drops below the squared spacing.
    """
    rng = np.random.default_rng(seed)
    theta = (np.arange(n_theta) + rng.uniform(0, 1, n_theta)) / n_theta
    ts_neg = np.zeros(0)
    f_neg = np.zeros(0)
    if t_lo < 0:
        m = max(2, int(np.ceil(-t_lo / dt)))
        m += m % 2
        ts_neg = np.linspace(t_lo, 0.0, m + 1)
        f_neg = np.empty(m + 1)
        for k, tt in enumerate(ts_neg):
            yy = a * np.exp(-tt)
            Z = np.stack([np.full(n_theta, yy), theta, np.full(n_theta, sign / yy), np.zeros(n_theta)])
            f_neg[k] = sig.eval(h, Z).real.mean()
    m = max(2, int(np.ceil(t_hi / dt)))
    m += m % 2
    step = t_hi / m
    ts_pos = np.linspace(0.0, t_hi, m + 1)
    f_pos = np.empty(m + 1)
    tr = ModularTrajectories(np.stack([theta - 0.5, np.full(n_theta, a), np.full(n_theta, sign / a),
                                       np.zeros(n_theta)]), dt=step)
    for k in range(m + 1):
        if k:
            tr.advance(-sign * step)
        x, y, Y, J = tr.state()
        f_pos[k] = sig.eval(h, np.stack([y, np.mod(x, 1.0), Y, J])).real.mean()
    return (ts_neg, f_neg), (ts_pos, f_pos)


def _sig_t_min(sig, a):
    sup = sig.support
    if sup is None or not np.isfinite(sup.y_hi):
        raise FlowError("horocycle quadrature needs a y-bounded symbol")
    return -max(0.0, np.log(sup.y_hi / a))


def horocycle_measure(sig: Symbol, nu, sign=+1, a=1.0, n_theta=4096, dt=0.02, tail=1e-8,
                      t_min=None, t_budget=2000.0, h=0.0, seed=0):
    """mu^{sign}_nu(sigma) = 2 nu a^{2nu} int e^{-2 nu t} sigma(phi_{-sign t}(a, theta, sign/a, 0)) dt dtheta,
    truncated where e^{-2 nu t} < tail; composite Simpson in t."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    T_cut = np.log(1 / tail) / (2 * nu)
    if T_cut > t_budget:
        raise BudgetError(f"T_cut={T_cut:.1f} exceeds the flow budget {t_budget}")
    if t_min is None:
        t_min = _sig_t_min(sig, a)
    (tn, fn), (tp, fp) = horocycle_profile(sig, t_min, T_cut, sign, a, n_theta, dt, h, seed)
    tot = _simpson(fp * np.exp(-2 * nu * tp), tp[1] - tp[0])
    if len(tn):
        tot += _simpson(fn * np.exp(-2 * nu * tn), tn[1] - tn[0])
    return float(2 * nu * a ** (2 * nu) * tot)


def _simpson(f, dx):
    f = np.asarray(f)
    return float(dx / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum()))


def equidistribution_scan(sig: Symbol, nu_list, sign=+1, **kw):
    L1 = liouville_average(sig)
    rows = []
    for nu in nu_list:
        mu = horocycle_measure(sig, nu, sign, **kw)
        rows.append({"nu": float(nu), "mu": mu, "L1": L1, "ratio": mu / L1, "rel_gap": abs(mu / L1 - 1)})
    gaps = [r["rel_gap"] for r in rows]
    mono = all(g2 <= g1 for g1, g2 in zip(gaps, gaps[1:]))
    return rows, {"monotone": mono}


def birkhoff(sig: Symbol, xi, T, dt=0.05, h=0.0):
    """(1/T) int_0^T sigma(phi_s xi) ds on the modular surface; xi is (x, y, Y, J) or a stack of them."""
    Z = np.asarray(xi, dtype=float)
    single = Z.ndim == 1
    Z = Z.reshape(4, -1)
    m = max(2, int(np.ceil(T / dt)))
    m += m % 2
    step = T / m
    tr = ModularTrajectories(Z, dt=step)
    vals = np.empty((m + 1, Z.shape[1]))
    for k in range(m + 1):
        if k:
            tr.advance(step)
        x, y, Y, J = tr.state()
        vals[k] = sig.eval(h, np.stack([y, np.mod(x, 1.0), Y, J])).real
    w = np.full(m + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    out = (step / 3) * (w @ vals) / T
    return float(out[0]) if single else out
