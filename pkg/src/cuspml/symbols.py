"""Symbols on the cusp phase space, the frame fields acting on them, seminorms, Poisson bracket
and principal symbols of differential operators."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy as sp

from .geometry import CuspChart, DEFAULT_CHART


class SymbolError(ValueError):
    pass


H = sp.Symbol("h", positive=True)


def coords(d=1):
    """Sympy coordinates (y, th_1..d, Y, J_1..d)."""
    y = sp.Symbol("y", positive=True)
    th = sp.symbols(" ".join(f"th{i + 1}" for i in range(d)), real=True, seq=True)
    Y = sp.Symbol("Y", real=True)
    J = sp.symbols(" ".join(f"J{i + 1}" for i in range(d)), real=True, seq=True)
    return (y, *th, Y, *J)


def hamiltonian_expr(d=1):
    c = coords(d)
    y, Y, J = c[0], c[d + 1], c[d + 2:]
    return y ** 2 * (Y ** 2 + sum(j ** 2 for j in J)) / 2


def index_of(name, d=1):
    """Map 'y', 'theta_k'/'th_k', 'Y', 'J_k' (k from 1) or an int to the stacked coordinate index."""
    if isinstance(name, (int, np.integer)):
        if not 0 <= name < 2 * d + 2:
            raise SymbolError(f"index {name} out of range")
        return int(name)
    n = name.replace("theta", "th").replace("_", "")
    if n == "y":
        return 0
    if n == "Y":
        return d + 1
    for pref, base in (("th", 1), ("J", d + 2)):
        if n.startswith(pref):
            k = int(n[len(pref):] or 1)
            if not 1 <= k <= d:
                raise SymbolError(f"index {name} out of range")
            return base + k - 1
    raise SymbolError(f"unknown index {name!r}")


@dataclass(frozen=True)
class Support:
    """Declared support: y in [y_lo, y_hi], p <= E and every |y xi_i| <= xi_max."""
    y_lo: float = 0.0
    y_hi: float = np.inf
    E: float = np.inf
    xi_max: float = np.inf

    def intersect(self, o):
        if o is None:
            return self
        return Support(max(self.y_lo, o.y_lo), min(self.y_hi, o.y_hi), min(self.E, o.E), min(self.xi_max, o.xi_max))

    def union(self, o):
        if o is None:
            return None
        return Support(min(self.y_lo, o.y_lo), max(self.y_hi, o.y_hi), max(self.E, o.E), max(self.xi_max, o.xi_max))

    @property
    def eta_max(self):
        """Bound on |y Y| and |y J| implied by the hint."""
        return float(min(np.sqrt(2 * self.E), self.xi_max))

    def mask(self, z, d):
        y = z[0]
        yxi = y * z[d + 1:2 * d + 2]
        p = 0.5 * np.sum(yxi ** 2, axis=0)
        m = (y >= self.y_lo) & (y <= self.y_hi) & (p <= self.E)
        if np.isfinite(self.xi_max):
            m &= np.all(np.abs(yxi) <= self.xi_max, axis=0)
        return m


def _fd_step(x, m):
    return 10.0 ** (-5.0 / m) * (1.0 + np.abs(x))


class Symbol:
    """A symbol sigma(h; y, theta, Y, J).

    Either backed by a sympy expression in (h, coords(d)) or by a plain callable f(h, z) taking
    stacked coordinates z of shape (2d+2, ...). Derivatives come from the expression when present,
    otherwise from Richardson-extrapolated central differences.
    """

    def __init__(self, expr=None, func=None, d=1, order=0.0, rho=0.0, support=None, name="",
                 theta_free=None, xi_free=None, chart: CuspChart = None, theta_band=None):
        if expr is None and func is None:
            raise SymbolError("need an expression or a callable")
        if not 0 <= rho < 0.5:
            raise SymbolError("rho must lie in [0, 1/2)")
        self.expr = sp.sympify(expr) if expr is not None else None
        self._func = func
        self.d = d
        self.order = float(order)
        self.rho = float(rho)
        self.support = support
        self.name = name
        self.chart = chart or (DEFAULT_CHART if d == 1 else CuspChart(d, tuple(tuple(r) for r in np.eye(d)), 1.0))
        c = coords(d)
        if self.expr is not None:
            fs = self.expr.free_symbols
            if theta_free is None:
                theta_free = not any(t in fs for t in c[1:d + 1])
            if xi_free is None:
                xi_free = not any(t in fs for t in c[d + 1:])
        self.theta_free = bool(theta_free)
        self.xi_free = bool(xi_free)
        # highest theta Fourier mode present (None: unknown)
        self.theta_band = 0 if self.theta_free else theta_band
        self._dcache = {}

    # ---- evaluation ----
    @cached_property
    def _lam(self):
        return self._lambdify(self.expr)

    def _lambdify(self, e):
        f = sp.lambdify((H, *coords(self.d)), e, modules="numpy", cse=True)
        return f

    def _call(self, f, h, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(all="ignore"):
            v = f(h, *z)
        return np.broadcast_to(np.asarray(v, dtype=complex), z.shape[1:]).copy()

    def eval(self, h, z):
        z = np.asarray(z, dtype=float)
        if self.expr is not None:
            v = self._call(self._lam, h, z)
        else:
            v = np.asarray(self._func(h, z), dtype=complex)
            v = np.broadcast_to(v, z.shape[1:]).copy()
        if self.support is not None:
            v = np.where(self.support.mask(z, self.d), v, 0.0)
        return v

    __call__ = eval

    def partial(self, h, z, alpha):
        """Coordinate derivative d^alpha sigma, alpha a tuple of indices (names or ints)."""
        alpha = tuple(sorted(index_of(a, self.d) for a in alpha))
        if not alpha:
            return self.eval(h, z)
        if self.expr is not None:
            if alpha not in self._dcache:
                c = coords(self.d)
                e = sp.diff(self.expr, *[c[i] for i in alpha])
                self._dcache[alpha] = self._lambdify(e)
            v = self._call(self._dcache[alpha], h, z)
            if self.support is not None:
                v = np.where(self.support.mask(np.asarray(z, float), self.d), v, 0.0)
            return v
        return self._fd(h, np.asarray(z, dtype=float), alpha, len(alpha))

    def _fd(self, h, z, alpha, m):
        if not alpha:
            return self.eval(h, z)
        i, rest = alpha[0], alpha[1:]
        delta = _fd_step(z[i], m)
        if np.any(delta < 1e4 * np.finfo(float).eps * np.abs(z[i])):
            raise SymbolError("finite-difference step underflow")

        def D(dl):
            zp, zm = z.copy(), z.copy()
            zp[i] = zp[i] + dl
            zm[i] = zm[i] - dl
            return (self._fd(h, zp, rest, m) - self._fd(h, zm, rest, m)) / (2 * dl)

        return (4 * D(delta / 2) - D(delta)) / 3

    # ---- algebra ----
    def _combine(self, other, op, order, support, band):
        if not isinstance(other, Symbol):
            other = Symbol(expr=sp.sympify(other), d=self.d, order=0, chart=self.chart)
        b1, b2 = self.theta_band, other.theta_band
        tb = None if b1 is None or b2 is None else band(b1, b2)
        if self.expr is not None and other.expr is not None:
            return Symbol(expr=op(self.expr, other.expr), d=self.d, order=order, rho=max(self.rho, other.rho),
                          support=support, chart=self.chart, theta_band=tb)
        a, b = self, other
        return Symbol(func=lambda h, z: op(a.eval(h, z), b.eval(h, z)), d=self.d, order=order,
                      rho=max(a.rho, b.rho), support=support, chart=self.chart,
                      theta_free=a.theta_free and b.theta_free, xi_free=a.xi_free and b.xi_free, theta_band=tb)

    def __add__(self, o):
        oo = o.order if isinstance(o, Symbol) else 0.0
        sup = self.support.union(o.support) if isinstance(o, Symbol) and self.support else None
        return self._combine(o, lambda u, v: u + v, max(self.order, oo), sup, max)

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-1) * o

    def __rsub__(self, o):
        return (-1) * self + o

    def __neg__(self):
        return (-1) * self

    def __mul__(self, o):
        if isinstance(o, Symbol):
            sup = self.support.intersect(o.support) if self.support else o.support
            return self._combine(o, lambda u, v: u * v, self.order + o.order, sup, lambda u, v: u + v)
        return self._combine(o, lambda u, v: u * v, self.order, self.support, max)

    __rmul__ = __mul__

    def conj(self):
        if self.expr is not None:
            return Symbol(expr=sp.conjugate(self.expr), d=self.d, order=self.order, rho=self.rho,
                          support=self.support, chart=self.chart, theta_band=self.theta_band)
        a = self
        return Symbol(func=lambda h, z: np.conj(a.eval(h, z)), d=self.d, order=self.order, rho=self.rho,
                      support=self.support, chart=self.chart, theta_free=a.theta_free, xi_free=a.xi_free,
                      theta_band=a.theta_band)

    def with_support(self, support):
        s = Symbol(expr=self.expr, func=self._func, d=self.d, order=self.order, rho=self.rho, support=support,
                   name=self.name, theta_free=self.theta_free, xi_free=self.xi_free, chart=self.chart,
                   theta_band=self.theta_band)
        return s

    def is_real(self):
        return self.expr is not None and _real_expr(self.expr) or getattr(self, "_real", False)

    def __repr__(self):
        return f"Symbol({self.name or self.expr}, n={self.order}, rho={self.rho})"


def _real_expr(e):
    """Structural realness: sympy gives up on Piecewise branches and on sqrt of sums."""
    if e.is_real:
        return True
    if isinstance(e, sp.Piecewise):
        return all(_real_expr(v) for v, _ in e.args)
    if isinstance(e, (sp.Add, sp.Mul)):
        return all(_real_expr(a) for a in e.args)
    if isinstance(e, sp.Pow):
        b, x = e.args
        return _real_expr(b) and (x.is_integer or (_real_expr(x) and b.is_nonnegative is True))
    if isinstance(e, (sp.exp, sp.cos, sp.sin, sp.Abs)):
        return _real_expr(e.args[0])
    return False


def const(c, d=1):
    return Symbol(expr=sp.sympify(c), d=d, order=0)


# ---- frame fields ----

def apply_field(sig: Symbol, idx) -> Symbol:
    """X_idx sigma with X_y = y d_y, X_th = y d_th, X_Y = d_Y / y, X_J = d_J / y."""
    d = sig.d
    i = index_of(idx, d)
    c = coords(d)
    y = c[0]
    dual = i >= d + 1
    order = sig.order - 1 if dual else sig.order
    if sig.expr is not None:
        de = sp.diff(sig.expr, c[i])
        e = de / y if dual else y * de
        return Symbol(expr=e, d=d, order=order, rho=sig.rho, support=sig.support, chart=sig.chart,
                      theta_band=sig.theta_band)

    def f(h, z):
        z = np.asarray(z, float)
        g = sig.partial(h, z, (i,))
        return g / z[0] if dual else g * z[0]

    return Symbol(func=f, d=d, order=order, rho=sig.rho, support=sig.support, chart=sig.chart,
                  theta_free=sig.theta_free, xi_free=sig.xi_free, theta_band=sig.theta_band)


def apply_fields(sig, alpha):
    """X_alpha sigma = X_{a1}(X_{a2}(... sigma))."""
    for a in reversed(tuple(alpha)):
        sig = apply_field(sig, a)
    return sig


def japanese(u):
    return np.sqrt(1.0 + np.abs(u) ** 2)


def seminorm(sig: Symbol, n, alpha, grid, h=1.0) -> float:
    """max over grid of |X_alpha sigma| / <y xi>^{n - (alpha)}, times h^{rho |alpha|}."""
    d = sig.d
    alpha = tuple(alpha)
    n_dual = sum(1 for a in alpha if index_of(a, d) >= d + 1)
    z = np.asarray(grid, dtype=float)
    v = np.abs(apply_fields(sig, alpha).eval(h, z))
    yxi = z[0] * np.sqrt(z[d + 1] ** 2 + np.sum(z[d + 2:] ** 2, axis=0))
    q = float(np.max(v / japanese(yxi) ** (n - n_dual)))
    return q * h ** (sig.rho * len(alpha))


def seminorm_grid(y_lo, y_hi, d=1, n_y=24, n_th=8, n_xi=41, yxi_max=20.0):
    """Log-uniform y, uniform theta on the cell, tensor grid in (yY, yJ) covering |y xi| <= yxi_max."""
    ys = np.exp(np.linspace(np.log(y_lo), np.log(y_hi), n_y))
    th = np.arange(n_th) / n_th
    u = np.linspace(-yxi_max, yxi_max, n_xi)
    axes = [ys] + [th] * d + [u] * (d + 1)
    G = np.meshgrid(*axes, indexing="ij")
    z = np.stack([g.ravel() for g in G])
    z[d + 1:] = z[d + 1:] / z[0]
    return z


def poisson(a: Symbol, b: Symbol) -> Symbol:
    """{a, b} = d_Y a d_y b - d_y a d_Y b + sum_k (d_Jk a d_thk b - d_thk a d_Jk b)."""
    d = a.d
    order = a.order + b.order - 1
    pairs = [(d + 1, 0)] + [(d + 2 + k, 1 + k) for k in range(d)]
    if a.expr is not None and b.expr is not None:
        c = coords(d)
        e = sum(sp.diff(a.expr, c[xi]) * sp.diff(b.expr, c[x]) - sp.diff(a.expr, c[x]) * sp.diff(b.expr, c[xi])
                for xi, x in pairs)
        sup = a.support.intersect(b.support) if a.support else b.support
        tb = None if a.theta_band is None or b.theta_band is None else a.theta_band + b.theta_band
        return Symbol(expr=e, d=d, order=order, support=sup, chart=a.chart, theta_band=tb)

    def f(h, z):
        return sum(a.partial(h, z, (xi,)) * b.partial(h, z, (x,)) - a.partial(h, z, (x,)) * b.partial(h, z, (xi,))
                   for xi, x in pairs)

    return Symbol(func=f, d=d, order=order, chart=a.chart)


# ---- differential operators ----

class DiffOp:
    """sum over terms of h^{|alpha| + i} a_{i, alpha}(y, theta) X_alpha, with alpha over y/theta fields.

    terms: list of (i, alpha, coeff) with alpha a tuple of 0 (X_y) or k (X_theta_k), coeff a sympy
    expression in (y, th_1..d).
    """

    def __init__(self, terms, d=1):
        self.d = d
        self.terms = [(int(i), tuple(int(a) for a in al), sp.sympify(c)) for i, al, c in terms]
        for _, al, _ in self.terms:
            if any(not 0 <= a <= d for a in al):
                raise SymbolError("DiffOp indices must be y (0) or theta_k (1..d)")

    def _field(self, a, f):
        y = coords(self.d)[0]
        return y * sp.diff(f, coords(self.d)[a])

    def _apply_alpha(self, alpha, f):
        for a in reversed(alpha):
            f = self._field(a, f)
        return f

    def apply(self, f, h=H):
        """Apply to a sympy function of (y, theta)."""
        return sp.expand(sum(h ** (len(al) + i) * c * self._apply_alpha(al, f) for i, al, c in self.terms))

    def __matmul__(self, other):
        out = []
        for (i1, a1, c1), (i2, a2, c2) in itertools.product(self.terms, other.terms):
            n = len(a1)
            for r in range(n + 1):
                for S in itertools.combinations(range(n), r):
                    hit = tuple(a1[k] for k in S)
                    rest = tuple(a1[k] for k in range(n) if k not in S)
                    coef = c1 * self._apply_alpha(hit, c2)
                    coef = sp.simplify(coef)
                    if coef != 0:
                        out.append((i1 + i2 + len(S), rest + a2, coef))
        return DiffOp(out, self.d)

    def __add__(self, other):
        return DiffOp(self.terms + other.terms, self.d)


def laplacian_diffop(d=1):
    """P = -(h^2/2)(X_y^2 - d X_y + sum X_th^2), in the term convention of DiffOp."""
    half = sp.Rational(1, 2)
    terms = [(0, (0, 0), -half), (1, (0,), half * d)]
    terms += [(0, (k, k), -half) for k in range(1, d + 1)]
    return DiffOp(terms, d)


def principal_symbol(D: DiffOp) -> Symbol:
    """Keep i = 0 terms and send h X_y -> i yY, h X_th_k -> i yJ_k."""
    d = D.d
    c = coords(d)
    y, Y, J = c[0], c[d + 1], c[d + 2:]
    fac = [sp.I * y * Y] + [sp.I * y * j for j in J]
    e = sp.Integer(0)
    for i, al, coef in D.terms:
        if i == 0:
            e += coef * sp.prod([fac[a] for a in al])
    e = sp.expand(e)
    order = max((len(al) for i, al, _ in D.terms if i == 0), default=0)
    return Symbol(expr=e, d=d, order=order)


# ---- cutoffs and corpus ----

def smoothstep_down(u, u0, u1):
    """Sympy expression equal to 1 for u <= u0, 0 for u >= u1, smooth and monotone in between."""
    v = (u - u0) / (u1 - u0)
    F = lambda t: sp.exp(-1 / t)
    mid = F(1 - v) / (F(v) + F(1 - v))
    return sp.Piecewise((sp.Integer(1), v <= 0), (sp.Integer(0), v >= 1), (mid, True))


def make_cusp_cutoff(s, chart: CuspChart = DEFAULT_CHART) -> Symbol:
    """chi_s(y) = 1 for ln(y/a) <= s + ln 4, 0 for ln(y/a) >= s + ln 5."""
    if s < 0:
        raise SymbolError("s must be nonnegative")
    y = coords(chart.d)[0]
    u = sp.log(y / chart.a) - s
    e = smoothstep_down(u, sp.log(4), sp.log(5))
    return Symbol(expr=e, d=chart.d, order=0, name=f"chi_{s}", chart=chart,
                  support=Support(0.0, chart.a * np.exp(s) * 5.0, np.inf))


def smooth_bump(u, c, w):
    """Compactly supported bump exp(1 - 1/(1 - ((u-c)/w)^2)) on |u - c| < w, peak 1."""
    r = ((u - c) / w) ** 2
    return sp.Piecewise((sp.exp(1 - 1 / (1 - r)), r < 1), (sp.Integer(0), True))


def _gauss(u, c, s):
    return sp.exp(-(u - c) ** 2 / (2 * s ** 2))


_TAIL = 8.6  # Gaussian tails below 1e-16 beyond this many widths


def gauss_p(p0=0.5, w=0.1, d=1):
    """f(p) with f Gaussian in p."""
    pe = hamiltonian_expr(d)
    return Symbol(expr=_gauss(pe, p0, w), d=d, order=-np.inf if False else 0.0, name="gauss_p",
                  support=Support(0.0, np.inf, p0 + _TAIL * w))


def sep_bump(c_lny=1.0, s_lny=0.15, amp=0.3, th0=0.0, c_Y=0.5, s_Y=0.25, c_J=0.0, s_J=0.25, d=1):
    """b1(ln y) b2(theta) b3(yY) b4(yJ) with Gaussian factors and a trigonometric theta factor."""
    c = coords(d)
    y, th, Y, J = c[0], c[1:d + 1], c[d + 1], c[d + 2:]
    e = _gauss(sp.log(y), c_lny, s_lny) * _gauss(y * Y, c_Y, s_Y)
    for k in range(d):
        e *= (1 + amp * sp.cos(2 * sp.pi * (th[k] - th0))) * _gauss(y * J[k], c_J, s_J)
    ylo, yhi = np.exp(c_lny - _TAIL * s_lny), np.exp(c_lny + _TAIL * s_lny)
    E = 0.5 * ((abs(c_Y) + _TAIL * s_Y) ** 2 + d * (abs(c_J) + _TAIL * s_J) ** 2)
    return Symbol(expr=e, d=d, order=0.0, name="sep_bump", support=Support(ylo, yhi, E),
                  theta_band=1 if amp else 0)


def shell_bump(c_lny=1.0, s_lny=0.15, p0=0.5, w=0.1, d=1):
    """b1(ln y) f(p), a y-localized energy-shell symbol."""
    y = coords(d)[0]
    e = _gauss(sp.log(y), c_lny, s_lny) * _gauss(hamiltonian_expr(d), p0, w)
    ylo, yhi = np.exp(c_lny - _TAIL * s_lny), np.exp(c_lny + _TAIL * s_lny)
    return Symbol(expr=e, d=d, order=0.0, name="shell_bump", support=Support(ylo, yhi, p0 + _TAIL * w))


def y_bump(c_lny=1.0, s_lny=0.15, d=1):
    """Multiplication symbol b(ln y)."""
    y = coords(d)[0]
    return Symbol(expr=_gauss(sp.log(y), c_lny, s_lny), d=d, order=0.0, name="y_bump",
                  support=Support(np.exp(c_lny - _TAIL * s_lny), np.exp(c_lny + _TAIL * s_lny), np.inf))


def dir_bump(y_lo=1.3, y_hi=3.0, p0=0.5, w=0.08, c_ang=0.0, s_ang=0.6, d=1):
    """Compact bump in ln y times a shell bump in p times a Gaussian in the direction angle atan2(Y, J)."""
    if d != 1:
        raise SymbolError("dir_bump is defined for d = 1")
    y, th, Y, J = coords(1)
    u = sp.log(y)
    cu, wu = (np.log(y_lo) + np.log(y_hi)) / 2, (np.log(y_hi) - np.log(y_lo)) / 2
    pe = hamiltonian_expr(1)
    # periodic Gaussian in the angle atan2(Y, J); the tiny shift keeps the origin finite
    cos_rel = (J * np.cos(c_ang) + Y * np.sin(c_ang)) / sp.sqrt(J ** 2 + Y ** 2 + sp.Float(1e-300))
    e = smooth_bump(u, cu, wu) * _gauss(pe, p0, w) * sp.exp((cos_rel - 1) / s_ang ** 2)
    return Symbol(expr=e, d=1, order=0.0, name="dir_bump", support=Support(y_lo, y_hi, p0 + _TAIL * w))


def egorov_bump(c_lny=0.5, s_lny=0.25, J0=0.2 * np.pi, dJ=0.05, p0=0.5, w=0.2, compact=False):
    """Gaussians in ln y and p times a narrow compact bump in the conserved momentum J (theta-free, d = 1).

    J only labels theta-modes, so the J-bump selects the modes 2 pi h m near J0; the default J0 is
    hit by m = 1, 2, 4, 8 at h = 0.1, 0.05, 0.025, 0.0125. J > 0 keeps geodesics below sqrt(2E) / J.
    compact=True swaps the Gaussians for compact bumps of half-widths 3 s_lny and 2 w.
    """
    y, th, Y, J = coords(1)
    u, pe = sp.log(y), hamiltonian_expr(1)
    if compact:
        e = smooth_bump(u, c_lny, 3 * s_lny) * smooth_bump(pe, p0, 2 * w)
        E, ulo, uhi = p0 + 2 * w, c_lny - 3 * s_lny, c_lny + 3 * s_lny
    else:
        e = _gauss(u, c_lny, s_lny) * _gauss(pe, p0, w)
        E, ulo, uhi = p0 + _TAIL * w, c_lny - _TAIL * s_lny, c_lny + _TAIL * s_lny
    e = e * smooth_bump(J, J0, dJ)
    ylo, yhi = np.exp(ulo), min(np.exp(uhi), np.sqrt(2 * E) / (J0 - dJ))
    sig = Symbol(expr=e, d=1, order=0.0, name="egorov_bump", support=Support(ylo, yhi, E))
    sig.j_range = (J0 - dJ, J0 + dJ)
    return sig


def gauss_cell(c_lny=6.27, s_lny=0.78, c_Y=0.3, s_Y=1.1, s_J=1.1, d=1):
    """Gaussians in ln y, yY and yJ; the support hint bounds each |y xi_i| instead of the energy."""
    c = coords(d)
    y, Y, J = c[0], c[d + 1], c[d + 2:]
    e = _gauss(sp.log(y), c_lny, s_lny) * _gauss(y * Y, c_Y, s_Y)
    for k in range(d):
        e *= _gauss(y * J[k], 0.0, s_J)
    T = 6.5  # tails below 1e-9
    sup = Support(np.exp(c_lny - T * s_lny), np.exp(c_lny + T * s_lny), xi_max=max(abs(c_Y) + T * s_Y, T * s_J))
    return Symbol(expr=e, d=d, order=0.0, name="gauss_cell", support=sup)


def shell_j_bump(J0=0.2 * np.pi, dJ=0.05, p0=0.5, w=0.2):
    """f(p) b(J): invariant under the cusp geodesic flow (theta-free, d = 1, no compact y-support)."""
    y, th, Y, J = coords(1)
    e = smooth_bump(J, J0, dJ) * _gauss(hamiltonian_expr(1), p0, w)
    E = p0 + _TAIL * w
    sig = Symbol(expr=e, d=1, order=0.0, name="shell_j_bump", support=Support(0.0, np.sqrt(2 * E) / (J0 - dJ), E))
    sig.j_range = (J0 - dJ, J0 + dJ)
    return sig


CORPUS = {
    "gauss_cell": gauss_cell,
    "shell_j_bump": shell_j_bump,
    "egorov_bump": egorov_bump,
    "gauss_p": gauss_p,
    "cutoff": lambda s=0.0, d=1: make_cusp_cutoff(s, DEFAULT_CHART if d == 1 else CuspChart(d, tuple(map(tuple, np.eye(d))), 1.0)),
    "sep_bump": sep_bump,
    "shell_bump": shell_bump,
    "y_bump": y_bump,
    "dir_bump": dir_bump,
}


def from_recipe(recipe) -> Symbol:
    """Build a corpus symbol from {"name": ..., "params": {...}}."""
    name = recipe["name"]
    if name not in CORPUS:
        raise SymbolError(f"unknown symbol recipe {name!r}")
    return CORPUS[name](**recipe.get("params", {}))
