"""Symbolic expansions (Moyal product, change of quantization, T1 oracle) and the numerical
calculus checks on operator matrices."""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
import itertools

import numpy as np
import sympy as sp

from .symbols import Symbol, SymbolError, coords, H, poisson, Support
from .quantization import (GridSpec, OperatorMatrix, op_matrix, laplacian_matrix, function_of_operator,
                           projector_nonzero)


@dataclass
class ExpansionResult:
    """c ~ sum_k h^k c_k; terms[k] is c_k (without the h^k factor)."""
    terms: list
    K: int
    next_term: Symbol = None
    support: Support = None

    def total(self, K=None):
        K = self.K if K is None else K
        e = sum(H ** k * self.terms[k].expr for k in range(K + 1))
        t0 = self.terms[0]
        band = None if any(t.theta_band is None for t in self.terms[:K + 1]) else max(t.theta_band for t in self.terms[:K + 1])
        return Symbol(expr=e, d=t0.d, order=t0.order, support=self.support, name=f"expansion_K{K}", theta_band=band)

    def next_term_sup(self, grid_points, h=0.0):
        if self.next_term is None:
            return 0.0
        return float(np.max(np.abs(self.next_term.eval(h, grid_points))))


def _need_expr(*syms):
    for s in syms:
        if s.expr is None:
            raise SymbolError("analytic (sympy) partials are required for this expansion")


def _pairs(d):
    c = coords(d)
    return [(c[0], c[d + 1])] + [(c[1 + k], c[d + 2 + k]) for k in range(d)]


def moyal_terms(a: Symbol, b: Symbol, k: int):
    """Order-k term of the Weyl product: (i/2)^k / k! (grad_x1.grad_xi2 - grad_x2.grad_xi1)^k a(1) b(2) on the diagonal."""
    d = a.d
    P = _pairs(d)
    # derivative multi-indices: distribute k derivative pairs over (x1 xi2) and (x2 xi1) slots
    tot = sp.Integer(0)
    slots = [(0, j) for j in range(d + 1)] + [(1, j) for j in range(d + 1)]
    for combo in itertools.product(range(len(slots)), repeat=k):
        da, db = [], []
        sign = 1
        for c in combo:
            kind, j = slots[c]
            x, xi = P[j]
            if kind == 0:   # d_x1 on a, d_xi2 on b
                da.append(x)
                db.append(xi)
            else:           # -d_x2 on b, d_xi1 on a
                da.append(xi)
                db.append(x)
                sign = -sign
        ta = sp.diff(a.expr, *da) if da else a.expr
        tb = sp.diff(b.expr, *db) if db else b.expr
        tot += sign * ta * tb
    return (sp.I / 2) ** k / factorial(k) * tot


def moyal_compose(a: Symbol, b: Symbol, K: int) -> ExpansionResult:
    """Expansion of the symbol of Op(a) Op(b) up to h^K."""
    if K >= 1:
        _need_expr(a, b)
    terms = []
    sup = a.support.intersect(b.support) if a.support else b.support
    band = None if a.theta_band is None or b.theta_band is None else a.theta_band + b.theta_band
    for k in range(K + 2):
        if k == 0 and (a.expr is None or b.expr is None):
            terms.append(a * b)
            continue
        e = moyal_terms(a, b, k)
        terms.append(Symbol(expr=e, d=a.d, order=a.order + b.order - k, support=sup, name=f"moyal_{k}",
                            theta_band=band))
    return ExpansionResult(terms[:K + 1], K, terms[K + 1], sup)


def _dot_grad(e, d):
    return sum(sp.diff(e, x, xi) for x, xi in _pairs(d))


def change_quantization_expansion(a: Symbol, t, K: int) -> ExpansionResult:
    """Symbol b_t with Op^{1/2}(a) = Op^t(b_t): b_t ~ sum_k (i h (1/2 - t))^k / k! (grad_x . grad_xi)^k a."""
    _need_expr(a)
    c = sp.Rational(1, 2) - sp.nsimplify(t)
    terms = []
    e = a.expr
    for k in range(K + 2):
        # no simplify: it folds log(y) powers into log(y**poly), which overflows
        terms.append(Symbol(expr=(sp.I * c) ** k / factorial(k) * e if k else e, d=a.d,
                            order=a.order - k, support=a.support, name=f"requant_{k}", theta_band=a.theta_band))
        e = _dot_grad(e, a.d)
    return ExpansionResult(terms[:K + 1], K, terms[K + 1], a.support)


# ---- stationary phase oracle ----

@dataclass
class TwoPointSymbol:
    """sigma(x, xi; x1, xi1) for d = 1 as a sympy expression in (y, th, Y, J, y1, th1, Y1, J1)."""
    expr: sp.Expr
    depends_on_second: bool = True

    @staticmethod
    def variables():
        return sp.symbols("y th Y J y1 th1 Y1 J1", real=True)


def t1_expansion(s2: TwoPointSymbol, K: int):
    """sum_{k<=K} (i h)^k / k! (grad_x1 . grad_xi1)^k sigma on the diagonal, as a function of (h, y, th, Y, J)."""
    y, th, Y, J, y1, th1, Y1, J1 = TwoPointSymbol.variables()
    e = s2.expr
    out = sp.Integer(0)
    for k in range(K + 1):
        out += (sp.I * H) ** k / factorial(k) * e
        e = sp.diff(e, y1, Y1) + sp.diff(e, th1, J1)
    out = out.subs({y1: y, th1: th, Y1: Y, J1: J})
    return sp.lambdify((H, y, th, Y, J), out, "numpy")


def t1_oracle(s2: TwoPointSymbol, h, x, xi, n=64, W=8.0, V=8.0, tol=1e-8):
    """Brute-force T1 sigma(x, xi) = (2 pi h)^{-2} int exp(i <x1 - x, xi1 - xi> / h) sigma(x, xi; x1, xi1).

    With x1 = x + h w, xi1 = xi + v this is (2 pi)^{-2} int exp(i <w, v>) sigma dw dv. The v-integrals are
    computed first (Gauss-Legendre on [-V, V]), then w on [-W, W]; the result is compared against a
    run with doubled node counts and the achieved error is returned alongside the value.
    """
    vars_ = TwoPointSymbol.variables()
    if not s2.depends_on_second:
        f = sp.lambdify(vars_[:4], s2.expr, "numpy")
        return complex(f(x[0], x[1], xi[0], xi[1])), 0.0
    f = sp.lambdify(vars_, s2.expr, "numpy")

    def run(nn):
        g, wg = np.polynomial.legendre.leggauss(nn)
        w = W * g
        ww = W * wg
        v = V * g
        wv = V * wg
        # per-pair 2d transform: int int exp(i w v) F dw dv, nested 4d over (w_y, v_Y, w_th, v_J)
        Wy, Vy, Wt, Vt = np.meshgrid(w, v, w, v, indexing="ij", sparse=True)
        with np.errstate(all="ignore"):
            F = f(x[0], x[1], xi[0], xi[1], x[0] + h * Wy, x[1] + h * Wt, xi[0] + Vy, xi[1] + Vt)
        F = np.broadcast_to(F, (nn, nn, nn, nn)) * np.exp(1j * (Wy * Vy + Wt * Vt))
        wts = ww[:, None, None, None] * wv[None, :, None, None] * ww[None, None, :, None] * wv[None, None, None, :]
        return np.sum(F * wts) / (2 * np.pi) ** 2

    a, b = run(n), run(2 * n)
    err = abs(a - b)
    return complex(b), float(err)


# ---- numerical checks ----

def loglog_slope(hs, vals):
    hs, vals = np.asarray(hs, float), np.asarray(vals, float)
    ok = vals > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(hs[ok]), np.log(vals[ok]), 1)[0])


def adjoint_defect(sig: Symbol, h, grid: GridSpec):
    M = op_matrix(sig, h, grid)
    return float((M - M.adjoint()).norm() / max(M.norm(), 1e-300))


def composition_residual(a, b, K, h, grid, cache=None):
    c = moyal_compose(a, b, K).total()
    Ma = _cached(cache, a, h, grid)
    Mb = _cached(cache, b, h, grid)
    Mc = op_matrix(c, h, grid)
    return (Ma @ Mb - Mc).norm()


def _cached(cache, s, h, grid, t=0.5):
    if cache is None:
        return op_matrix(s, h, grid, t)
    key = (id(s), h, t)
    if key not in cache:
        cache[key] = op_matrix(s, h, grid, t)
    return cache[key]


def commutator_residual(a, b, h, grid, cache=None):
    Ma = _cached(cache, a, h, grid)
    Mb = _cached(cache, b, h, grid)
    pb = poisson(a, b)
    pb = Symbol(expr=pb.expr, d=a.d, order=pb.order, support=pb.support, theta_band=pb.theta_band) if pb.expr is not None else pb
    Mpb = op_matrix(pb, h, grid)
    return (Ma @ Mb - Mb @ Ma - (h / 1j) * Mpb).norm()


def requantization_residual(a, t, K, h, grid):
    """|| Op^{1/2}(a) - Op^t(b_t^{(K)}) ||."""
    bt = change_quantization_expansion(a, t, K).total()
    return (op_matrix(a, h, grid, 0.5) - op_matrix(bt, h, grid, t)).norm()


def symbol_sup(sig, h, grid, n_eta=201):
    """sup |a| over the quantization grid's phase-space sample."""
    from .quantization import eta_max_for
    em = eta_max_for(sig, grid)
    eta = np.linspace(-em, em, n_eta)
    th = grid.theta if not sig.theta_free else np.array([0.0])
    Yg, T, E, Jt = np.meshgrid(grid.y, th, eta, eta, indexing="ij")
    z = np.stack([Yg.ravel(), T.ravel(), (E / Yg).ravel(), (Jt / Yg).ravel()])
    return float(np.max(np.abs(sig.eval(h, z))))


def l2_norm_check(a, h, grid):
    """(largest singular value of M(a), norm - sup|a|)."""
    nrm = op_matrix(a, h, grid).norm()
    return nrm, nrm - symbol_sup(a, h, grid)


def _gl_interval(lo, hi, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def hs_formula(a, h, grid, n_u=400, n_eta=200, m_max=None):
    """(1/(2 pi h)) sum_{m != 0} int |a(y, th, eta/y, 2 pi h m)|^2 dy dth deta / y, J summed over the dual lattice."""
    from .quantization import eta_max_for
    em = eta_max_for(a, grid)
    ylo = a.support.y_lo if a.support else grid.y_min
    yhi = a.support.y_hi if a.support else grid.y_max
    ylo, yhi = max(ylo, grid.y_min), min(yhi, grid.y_max)
    u, wu = _gl_interval(np.log(ylo), np.log(yhi), n_u)
    eta, we = _gl_interval(-em, em, n_eta)
    th = np.arange(16) / 16 if not a.theta_free else np.array([0.0])
    if m_max is None:
        m_max = int(np.ceil(em / (2 * np.pi * h * ylo))) + 1
    tot = 0.0
    for m in range(-m_max, m_max + 1):
        if m == 0:
            continue
        U, T, E = np.meshgrid(u, th, eta, indexing="ij")
        y = np.exp(U)
        J = 2 * np.pi * h * m
        z = np.stack([y.ravel(), T.ravel(), (E / y).ravel(), np.full(y.size, J)])
        v = np.abs(a.eval(h, z).reshape(U.shape)) ** 2
        # dy dY = (y du)(d eta / y) = du d eta
        tot += np.einsum("i,ite,e->", wu, v, we) / len(th)
    return tot / (2 * np.pi * h)


def hs_parseval(a, h, grid, a_cut=None):
    """(formula value, Frobenius norm squared of M(a) Pi*)."""
    a_cut = grid.y_min if a_cut is None else a_cut
    M = op_matrix(a, h, grid)
    Pi = projector_nonzero(grid, a_cut)
    return hs_formula(a, h, grid), (M @ Pi).frobenius() ** 2


def phase_space_integral(a, h, grid, n_u=400, n_eta=200, weight=None):
    """(2 pi)^{-2} int a dx dxi over y > 0, theta in the cell, with optional weight w(y)."""
    from .quantization import eta_max_for
    em = eta_max_for(a, grid)
    ylo = max(a.support.y_lo if a.support else grid.y_min, grid.y_min)
    yhi = min(a.support.y_hi if a.support else grid.y_max, grid.y_max)
    u, wu = _gl_interval(np.log(ylo), np.log(yhi), n_u)
    eta, we = _gl_interval(-em, em, n_eta)
    th = np.arange(16) / 16 if not a.theta_free else np.array([0.0])
    U, T, E, F = np.meshgrid(u, th, eta, eta, indexing="ij")
    y = np.exp(U)
    z = np.stack([y.ravel(), T.ravel(), (E / y).ravel(), (F / y).ravel()])
    v = a.eval(h, z).reshape(U.shape)
    if weight is not None:
        v = v * weight(y)
    # dy dth dY dJ = (y du) dth (d eta / y)(d f / y) = du dth d eta d f / y
    v = v / y
    return complex(np.einsum("i,itef,e,f->", wu, v, we, we) / len(th)) / (2 * np.pi) ** 2


def riemann_sum(a, h, grid, n_u=400, n_eta=200):
    """h^2 (1/(2 pi h)) sum_{m != 0} int a(y, th, Y, 2 pi h m) dy dth dY scaled like the phase-space integral."""
    from .quantization import eta_max_for
    em = eta_max_for(a, grid)
    ylo = max(a.support.y_lo if a.support else grid.y_min, grid.y_min)
    yhi = min(a.support.y_hi if a.support else grid.y_max, grid.y_max)
    u, wu = _gl_interval(np.log(ylo), np.log(yhi), n_u)
    eta, we = _gl_interval(-em, em, n_eta)
    th = np.arange(16) / 16 if not a.theta_free else np.array([0.0])
    m_max = int(np.ceil(em / (2 * np.pi * h * ylo))) + 1
    tot = 0j
    for m in range(-m_max, m_max + 1):
        if m == 0:
            continue
        U, T, E = np.meshgrid(u, th, eta, indexing="ij")
        y = np.exp(U)
        z = np.stack([y.ravel(), T.ravel(), (E / y).ravel(), np.full(y.size, 2 * np.pi * h * m)])
        v = a.eval(h, z).reshape(U.shape)
        tot += np.einsum("i,ite,e->", wu, v, we) / len(th)
    return complex(tot) / (2 * np.pi * h) * h ** 2


def trace_check(a, chi, h, grid, a_cut=None):
    """(h^2 Tr[M(chi) M(a) M(chi) Pi*], (2 pi)^{-2} int chi^2 a, gap)."""
    a_cut = grid.y_min if a_cut is None else a_cut
    Mchi = op_matrix(chi, h, grid)
    Ma = op_matrix(a, h, grid)
    Pi = projector_nonzero(grid, a_cut)
    tr = h ** 2 * (Mchi @ Ma @ Mchi @ Pi).trace()
    chi2a = chi * chi * a
    lead = phase_space_integral(chi2a, h, grid)
    return complex(tr), lead, abs(tr - lead)


def riemann_gap(a, h, grid):
    return abs(riemann_sum(a, h, grid) - phase_space_integral(a, h, grid))


def function_of_p_check(f, h, grid, chi, order=8):
    """|| M(chi) f(P) M(chi) - M(chi^2 f o p) || with chi a y-cutoff kept away from the Dirichlet ends.

    f is a sympy Lambda in one variable; f(P) uses the per-mode eigendecomposition of the grid Laplacian.
    """
    from .symbols import hamiltonian_expr
    if not isinstance(f, sp.Lambda):
        raise SymbolError("f must be a sympy Lambda")
    fn = sp.lambdify(f.variables[0], f.expr, "numpy")
    P = laplacian_matrix(h, grid, order)
    fP = function_of_operator(P, lambda lam: np.broadcast_to(fn(lam), lam.shape))
    Mchi = op_matrix(chi, h, grid)
    fp = Symbol(expr=f(hamiltonian_expr(1)), d=1, order=0)
    target = chi * chi * fp
    return (Mchi @ fP @ Mchi - op_matrix(target, h, grid)).norm()


def pseudolocal_residual(sig, h, grid, delta=0.3):
    """Operator norm of M(sigma) with the kernel masked by eta(y'/y - y/y'), eta = 0 near 0.

    eta(r) = 1 - smoothstep(|r|; delta, 2 delta), so only entries with |y'/y - y/y'| > delta survive.
    """
    M = op_matrix(sig, h, grid)
    y = grid.y
    r = np.abs(y[None, :] / y[:, None] - y[:, None] / y[None, :])
    v = np.clip((r - delta) / delta, 0, 1)
    with np.errstate(divide="ignore", over="ignore"):
        F = lambda s: np.where(s > 0, np.exp(-1 / np.where(s > 0, s, 1)), 0.0)
        mask = F(v) / (F(v) + F(1 - v))
    if M.is_block:
        return OperatorMatrix(None, grid, h, blocks=M.blocks * mask[None]).norm()
    B = M.A.reshape(grid.n_modes, grid.n_y, grid.n_modes, grid.n_y) * mask[None, :, None, :]
    return OperatorMatrix(B.reshape(grid.dim, grid.dim), grid, h).norm()
