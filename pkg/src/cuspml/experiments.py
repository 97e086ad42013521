"""Acceptance experiments: each criterion runs a small convergence study and returns a pass flag.

Criterion parameters come from the config (presets live in presets/*.json). Every function takes the
parameter dict of its criterion plus a RunContext that carries the seed and shared caches.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import calculus as calc
from .egorov import (PropagatorCache, active_modes, egorov_grid, egorov_residual, ehrenfest_scan,
                     group_defect, measured_lambda, propagator, unitarity_defect)
from .eisenstein import (EisensteinEvaluator, dyatlov_check, theorem1_scan)
from .flows import ModularSurface, equidistribution_scan, homogeneity_defect, lyapunov
from .geometry import PhasePoint
from .quantization import desk_grid
from .special import bessel_k, completed_xi, scattering_phi, zeta
from .symbols import Symbol, from_recipe, make_cusp_cutoff

log = logging.getLogger(__name__)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    rows: list
    summary: dict = field(default_factory=dict)


@dataclass
class RunContext:
    seed: int = 0
    symbols: dict = field(default_factory=dict)
    op_cache: dict = field(default_factory=dict)

    def symbol(self, recipe) -> Symbol:
        key = json.dumps(recipe, sort_keys=True)
        if key not in self.symbols:
            self.symbols[key] = from_recipe(recipe)
        return self.symbols[key]

    def cache_for(self, h, grid):
        return self.op_cache.setdefault((h, json.dumps(grid.to_dict(), sort_keys=True)), {})


def _grid(syms, h, g):
    return desk_grid(syms, h, fac=g.get("fac", 1.5), pad=g.get("pad", 0.25))


def _slope(hs, vals):
    return calc.loglog_slope(hs, vals)


def _local_slopes(hs, vals):
    hs, vals = np.log(np.asarray(hs, float)), np.log(np.asarray(vals, float))
    return list(np.diff(vals) / np.diff(hs))


def _nonincreasing(vals, tol=0.0):
    return all(b <= a + tol for a, b in zip(vals, vals[1:]))


# ---- calculus ----

def c01_adjoint(p, ctx):
    rows = []
    for rec in p["symbols"]:
        sig = ctx.symbol(rec)
        for h in p["h_list"]:
            g = _grid(sig, h, p["grid"])
            rows.append({"symbol": sig.name, "h": h, "n_y": g.n_y, "defect": calc.adjoint_defect(sig, h, g)})
    worst = max(r["defect"] for r in rows)
    return CriterionResult(1, "adjoint", worst < p["tol"], rows, {"max_defect": worst})


def _composition_rows(p, ctx):
    a, b = (ctx.symbol(r) for r in p["symbols"])
    rows = []
    for h in p["h_list"]:
        g = _grid([a, b], h, p["grid"])
        cache = ctx.cache_for(h, g)
        row = {"h": h, "n_y": g.n_y, "mode_max": g.mode_max}
        for K in range(3):
            row[f"K{K}"] = calc.composition_residual(a, b, K, h, g, cache)
        rows.append(row)
    return rows


def c02_composition(p, ctx):
    rows = _composition_rows(p, ctx)
    hs = [r["h"] for r in rows]
    slopes = {f"K{K}": _slope(hs, [r[f"K{K}"] for r in rows]) for K in range(3)}
    ok = all(slopes[f"K{K}"] >= th for K, th in enumerate(p["thresholds"]))
    return CriterionResult(2, "composition", ok, rows, {"slopes": slopes})


def c03_commutator(p, ctx):
    a, b = (ctx.symbol(r) for r in p["symbols"])
    rows = []
    for h in p["h_list"]:
        g = _grid([a, b], h, p["grid"])
        rows.append({"h": h, "residual": calc.commutator_residual(a, b, h, g, ctx.cache_for(h, g))})
    s = _slope(p["h_list"], [r["residual"] for r in rows])
    return CriterionResult(3, "commutator", s >= p["threshold"], rows, {"slope": s})


def c04_l2_bound(p, ctx):
    sig = ctx.symbol(p["symbol"])
    rows = []
    for h in p["h_list"]:
        g = _grid(sig, h, p["grid"])
        norm, gap = calc.l2_norm_check(sig, h, g)
        rows.append({"h": h, "norm": norm, "sup": norm - gap, "gap": gap, "excess": max(gap, 0.0)})
    at = [r for r in rows if np.isclose(r["h"], p["h_check"])]
    bound_ok = bool(at) and at[0]["norm"] <= at[0]["sup"] + p["slack"]
    mono = _nonincreasing([r["excess"] for r in rows])
    return CriterionResult(4, "l2_bound", bound_ok and mono, rows, {"bound_ok": bound_ok, "excess_monotone": mono})


def c05_hs(p, ctx):
    sig = ctx.symbol(p["symbol"])
    h = p["h"]
    g = _grid(sig, h, p["grid"])
    f, F = calc.hs_parseval(sig, h, g)
    gap = abs(f - F) / abs(F)
    return CriterionResult(5, "hs_parseval", gap < p["tol"], [{"h": h, "formula": f, "frobenius": F, "rel_gap": gap}],
                           {"rel_gap": gap})


def c06_trace(p, ctx):
    sig = ctx.symbol(p["symbol"])
    chi = make_cusp_cutoff(p["cutoff_s"])
    rows = []
    for h in p["h_list"]:
        g = _grid(sig, h, p["grid"])
        tr, lead, gap = calc.trace_check(sig, chi, h, g)
        rows.append({"h": h, "trace": tr.real, "integral": lead.real, "gap": gap,
                     "riemann_gap": calc.riemann_gap(sig, h, g)})
    s_tr = _slope(p["h_list"], [r["gap"] for r in rows])
    s_rs = _slope(p["h_list"], [r["riemann_gap"] for r in rows])
    ok = s_tr >= p["threshold"] and s_rs >= p["threshold"]
    return CriterionResult(6, "trace", ok, rows, {"slope_trace": s_tr, "slope_riemann": s_rs})


def c07_pseudolocal(p, ctx):
    sig = ctx.symbol(p["symbol"])
    rows = []
    for h in p["h_list"]:
        g = _grid(sig, h, p["grid"])
        rows.append({"h": h, "masked_norm": calc.pseudolocal_residual(sig, h, g, p["delta"])})
    s = _slope(p["h_list"], [r["masked_norm"] for r in rows])
    return CriterionResult(7, "pseudolocality", s >= p["threshold"], rows, {"slope": s})


def c08_functions_of_p(p, ctx):
    x = sp.Symbol("x")
    f = sp.Lambda(x, sp.exp(-(x - p["p0"]) ** 2 / (2 * p["w"] ** 2)))
    chi = ctx.symbol(p["cutoff"])
    ref = ctx.symbol({"name": "shell_bump", "params": {"c_lny": p["cutoff"]["params"]["c_lny"],
                                                       "s_lny": p["cutoff"]["params"]["s_lny"],
                                                       "p0": p["p0"], "w": p["w"]}})
    rows = []
    for h in p["h_list"]:
        g = _grid(ref, h, p["grid"])
        rows.append({"h": h, "residual": calc.function_of_p_check(f, h, g, chi, order=p["order"])})
    s = _slope(p["h_list"], [r["residual"] for r in rows])
    return CriterionResult(8, "functions_of_p", s >= p["threshold"], rows, {"slope": s})


# ---- propagator and Egorov ----

def c09_propagator(p, ctx):
    sig = ctx.symbol(p["symbol"])
    rows = []
    for h in p["h_list"]:
        g = egorov_grid(sig, h, p["t"])
        modes = active_modes(sig, h, g)
        cache = PropagatorCache(h, g, modes=modes)
        U = propagator(cache, p["t"])
        # mode projector Pi_m: compare U Pi_m and Pi_m U on a random vector
        rng = np.random.default_rng(ctx.seed)
        f = rng.standard_normal(g.dim) + 1j * rng.standard_normal(g.dim)
        m = modes[0]
        Pm = np.zeros(g.dim)
        Pm[g.index(m, 0):g.index(m, 0) + g.n_y] = 1.0
        comm = float(np.max(np.abs(U.apply(Pm * f) - Pm * U.apply(f))))
        zero = float(np.max(np.abs(propagator(cache, 0.0).unitary_blocks()[m + g.mode_max] - np.eye(g.n_y))))
        rows.append({"h": h, "n_y": g.n_y, "modes": len(modes), "unitarity": unitarity_defect(cache, p["t"]),
                     "group_law": group_defect(cache, p["t"], p["s"]), "mode_commutator": comm, "t0_identity": zero})
    ok = all(r["unitarity"] < p["tol"] and r["group_law"] < p["tol"] and r["mode_commutator"] == 0.0
             and r["t0_identity"] < p["tol"] for r in rows)
    worst = {k: max(r[k] for r in rows) for k in ("unitarity", "group_law", "mode_commutator")}
    return CriterionResult(9, "propagator", ok, rows, worst)


def c10_egorov_fixed_time(p, ctx):
    sig = ctx.symbol(p["symbol"])
    inv = ctx.symbol(p["invariant_symbol"])
    rows = []
    for h in p["h_list"]:
        r = egorov_residual(sig, p["t"], h)
        ri = egorov_residual(inv, p["t"], h, invariant=True, window=tuple(p["window"]))
        rows.append({"h": h, "t": p["t"], "residual": r, "residual_over_h": r / h, "invariant_residual": ri})
    hs = p["h_list"]
    gen = [r["residual"] for r in rows]
    s_gen = _slope(hs, gen)
    last = _local_slopes(hs, gen)[-1]
    s_inv = _slope(hs, [r["invariant_residual"] for r in rows])
    bounded = s_gen >= p["bounded_slope"] and last >= p["bounded_slope"]
    ok = bounded and s_inv >= p["invariant_threshold"]
    return CriterionResult(10, "egorov_fixed_time", ok, rows,
                           {"slope_generic": s_gen, "last_slope_generic": last, "slope_invariant": s_inv,
                            "ratio_max_over_min": max(r["residual_over_h"] for r in rows)
                            / min(r["residual_over_h"] for r in rows)})


def c11_ehrenfest(p, ctx):
    sig = ctx.symbol(p["symbol"])
    lam = p["lam"] if p.get("lam") is not None else measured_lambda(sig, p=p["shell"])
    rows, s = ehrenfest_scan(sig, p["h_list"], p["rho"], lam)
    summ = {"lambda": lam, "median": s["median"]}
    if p.get("rho_compare") is not None:
        rows2, _ = ehrenfest_scan(sig, p["h_list"], p["rho_compare"], lam)
        for r, r2 in zip(rows, rows2):
            r["residual_rho_compare"] = r2["residual"]
        summ["smaller_than_rho_compare"] = all(r["residual"] < r["residual_rho_compare"] for r in rows)
    return CriterionResult(11, "ehrenfest_scan", s["pass"], rows, summ)


def c12_lyapunov(p, ctx):
    v = np.sqrt(2 * p["energy"])
    z = np.array([0.1, 1.3, 0.0, v / 1.3])
    lam = lyapunov(ModularSurface(), z, p["T"])
    xi = PhasePoint(1.5, [0.2], 0.3, [0.4])
    hom = homogeneity_defect(xi, p["t"], p["kappa"])
    ok = abs(lam - 1.0) <= p["tol_lambda"] and hom <= p["tol_homogeneity"]
    return CriterionResult(12, "lyapunov", ok, [{"lambda_modular": lam, "T": p["T"], "homogeneity": hom,
                                                 "kappa": p["kappa"]}],
                           {"lambda_modular": lam, "homogeneity": hom})


# ---- special functions and Eisenstein ----

def c13_special(p, ctx):
    rng = np.random.default_rng(ctx.seed)
    z2 = abs(zeta(2) - np.pi ** 2 / 6)
    pts = rng.uniform(0.05, 0.95, p["n_points"]) + 1j * rng.uniform(-30, 30, p["n_points"])
    xi_err = max(abs(completed_xi(s) - completed_xi(1 - s)) / abs(completed_xi(s)) for s in pts)
    spts = 0.5 + rng.uniform(0.05, 0.45, p["n_points"]) + 1j * rng.uniform(-30, 30, p["n_points"])
    phi_err = max(abs(scattering_phi(s) * scattering_phi(1 - s) - 1) for s in spts)
    x = np.linspace(0.1, 20, 40)
    k_err = float(np.max(np.abs(bessel_k(0.5, x) - np.sqrt(np.pi / (2 * x)) * np.exp(-x))
                         / (np.sqrt(np.pi / (2 * x)) * np.exp(-x))))
    row = {"zeta2": z2, "xi_symmetry": xi_err, "phi_unitarity": phi_err, "k_half": k_err}
    ok = z2 < p["tol_zeta"] and xi_err < p["tol_xi"] and phi_err < p["tol_phi"] and k_err < p["tol_k"]
    return CriterionResult(13, "special_functions", ok, [row], dict(row))


def c14_eisenstein(p, ctx):
    s = complex(p["s_re"], p["s_im"])
    ev = EisensteinEvaluator(s)
    rng = np.random.default_rng(ctx.seed)
    pts = []
    while len(pts) < p["n_points"]:
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.3))
        if (-1 / z).imag >= ev.y_min and abs(z - ev.cal_point) > 1e-3:
            pts.append(z)
    auto = float(ev.automorphy_residual(pts).max())
    zc = max(abs(ev.zeroth_coefficient(y) - ev.constant_term(y)) for y in p["zeroth_y"])
    zs = np.array([0.1 + 1.1j, 0.3 + 0.9j, -0.2 + 1.5j])
    res = [ev.eigen_residual(zs, d) for d in p["deltas"]]
    ratios = [a / b for a, b in zip(res, res[1:])]
    rows = [{"delta": d, "eigen_residual": r} for d, r in zip(p["deltas"], res)]
    ok = auto < p["tol_automorphy"] and zc < p["tol_zeroth"] and min(ratios) >= p["min_ratio"]
    return CriterionResult(14, "eisenstein", ok, rows, {"automorphy": auto, "zeroth": zc, "ratios": ratios,
                                                        "N_max": ev.N_max})


def c15_dyatlov(p, ctx):
    sig = ctx.symbol(p["symbol"])
    rows, meta = dyatlov_check(sig, p["nu"], p["h_list"], n_theta=p["n_theta"], seed=ctx.seed)
    err = [abs(r["ratio"] - 1) for r in rows]
    ok = _nonincreasing(err) and err[-1] < p["tol"]
    return CriterionResult(15, "dyatlov", ok, rows, {"mu": meta["mu"], "errors": err})


def c16_equidistribution(p, ctx):
    sig = ctx.symbol(p["symbol"])
    rows, meta = equidistribution_scan(sig, p["nu_list"], n_theta=p["n_theta"], seed=ctx.seed,
                                       t_budget=p["t_budget"])
    err = [abs(r["ratio"] - 1) for r in rows]
    ok = _nonincreasing(err) and err[-1] < p["tol"]
    return CriterionResult(16, "equidistribution", ok, rows, {"errors": err})


def c17_theorem1(p, ctx):
    sig = ctx.symbol(p["symbol"])
    rows, meta = theorem1_scan(sig, p["h_list"], p["C0"])
    err = [abs(r["ratio"] - 1) for r in rows]
    ok = _nonincreasing(err) and err[-1] < p["tol"]
    return CriterionResult(17, "theorem1_trend", ok, rows, {"L1": meta["L1"], "errors": err})


CRITERIA = {
    1: c01_adjoint, 2: c02_composition, 3: c03_commutator, 4: c04_l2_bound, 5: c05_hs, 6: c06_trace,
    7: c07_pseudolocal, 8: c08_functions_of_p, 9: c09_propagator, 10: c10_egorov_fixed_time,
    11: c11_ehrenfest, 12: c12_lyapunov, 13: c13_special, 14: c14_eisenstein, 15: c15_dyatlov,
    16: c16_equidistribution, 17: c17_theorem1,
}

EXPERIMENTS = {
    "calculus": [1, 2, 3, 4, 5, 6, 7, 8],
    "egorov": [9, 10, 11, 12],
    "eisenstein": [13, 14],
    "wigner-dyatlov": [15],
    "equidistribution": [16],
    "wigner-theorem1": [17],
}

SELF_TEST = {"eisenstein": [13]}


def run_criterion(n, params, ctx: RunContext) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[n](params, ctx)
    log.info("criterion %d (%s): %s in %.1fs", n, res.name, "PASS" if res.passed else "FAIL",
             time.perf_counter() - t0)
    return res
