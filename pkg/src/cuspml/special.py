"""Riemann zeta, completed xi, scattering coefficient and complex-order K-Bessel."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import bernoulli, loggamma


class PoleError(ValueError):
    pass


class BudgetError(RuntimeError):
    pass


_B2K = bernoulli(30)[2::2]  # B_2, B_4, ..., B_30
_FACT = np.cumprod(np.arange(1, 31, dtype=float))


def zeta(s, n_direct=30, n_corr=15):
    """Riemann zeta by Euler-Maclaurin with n_direct terms and n_corr Bernoulli corrections.

    The direct-sum length grows with |Im s| so that the correction series stays convergent.
    """
    s = complex(s)
    if abs(s - 1) < 1e-6:
        raise PoleError("zeta has a pole at s = 1")
    N = max(n_direct, int(np.ceil(abs(s.imag) / (2 * np.pi * 0.25))))
    n = np.arange(1, N, dtype=float)
    total = np.sum(n ** (-s))
    total += N ** (1 - s) / (s - 1) + 0.5 * N ** (-s)
    # sum_k B_2k/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
    rising = s
    term_pow = N ** (-s - 1)
    for k in range(1, n_corr + 1):
        total += _B2K[k - 1] / _FACT[2 * k - 1] * rising * term_pow
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        term_pow /= N * N
    return complex(total)


def log_completed_xi(s):
    s = complex(s)
    if abs(s) < 1e-6 or abs(s - 1) < 1e-6:
        raise PoleError("xi has poles at s = 0, 1")
    if s.real < 0.5:
        # reflect: Gamma(s/2) zeta(s) is 0 * inf at the trivial zeros
        return log_completed_xi(1 - s)
    return -0.5 * s * np.log(np.pi) + complex(loggamma(s / 2)) + np.log(zeta(s))


def completed_xi(s):
    """xi(s) = pi^{-s/2} Gamma(s/2) zeta(s)."""
    return complex(np.exp(log_completed_xi(s)))


def scattering_phi(s):
    """phi(s) = xi(2s-1)/xi(2s) for the modular surface."""
    s = complex(s)
    return complex(np.exp(log_completed_xi(2 * s - 1) - log_completed_xi(2 * s)))


def divisor_sigma(n, w):
    """sigma_w(n) = sum_{d | n} d^w, complex w."""
    n = int(n)
    ds = [k for k in range(1, math.isqrt(n) + 1) if n % k == 0]
    ds = sorted(set(ds + [n // k for k in ds]))
    return complex(np.sum(np.asarray(ds, dtype=float) ** complex(w)))


def _contour(nu, x):
    """Imaginary shift beta(x) of the path w = u + i beta, and trapezoid step du(x)."""
    T = nu.imag
    x = np.asarray(x, dtype=float)
    if abs(T) < 1e-14:
        beta = np.zeros_like(x)
    else:
        # saddle of -x cosh w + nu w sits at sinh w = nu / x
        beta0 = np.abs(np.arcsinh(nu / x).imag)
        eps = max(min(3.0 / abs(T), 0.5), 0.02)
        beta = np.sign(T) * np.minimum(beta0, np.pi / 2 - eps)
    # resolve both the analyticity strip and the peak width ~ (x cos beta)^{-1/2}
    du = np.minimum.reduce([np.full_like(x, 0.05), 2 * np.pi * (np.pi / 2 - np.abs(beta)) / 80,
                            0.3 / np.sqrt(1 + x * np.cos(beta))])
    return beta, du


def _bisect(f, lo, hi, n=80):
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        pos = f(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return hi


def bessel_k(nu, x, scaled=False, chunk=128):
    """Modified Bessel K_nu(x) for complex order nu and real x > 0.

    Trapezoid rule on 1/2 int_R exp(-x cosh w + nu w) dw along w = u + i beta, where beta follows
    the saddle so the integrand does not cancel when Im nu is large. The rule is truncated where
    the integrand drops below 1e-18 of its maximum. With scaled=True returns
    exp(pi |Im nu| / 2) K_nu(x).
    """
    nu = complex(nu)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if np.any(x_arr <= 0):
        raise ValueError("x must be positive")
    if abs(nu.real) >= 30:
        raise BudgetError("|Re nu| must be < 30")
    if np.any(x_arr < 1e-3) and abs(nu.imag) > 10:
        raise BudgetError("x < 1e-3 with large |Im nu| overflows the quadrature")
    beta, du = _contour(nu, x_arr)
    xc = x_arr * np.cos(beta)
    shift = 0.5 * np.pi * abs(nu.imag) if scaled else 0.0

    # peak of the magnitude and the two cut points
    u_star = np.arcsinh(nu.real / xc)
    def logmag(u):
        return -xc * np.cosh(u) + nu.real * u
    top = logmag(u_star)
    drop = np.log(1e18)
    def g(u):
        return top - drop - logmag(u)
    u_hi = _bisect(g, u_star, u_star + 200.0)
    u_lo = -_bisect(lambda v: g(-v), -u_star, -u_star + 200.0)
    k_lo = np.floor(u_lo / du).astype(int)
    k_hi = np.ceil(u_hi / du).astype(int)

    out = np.empty(x_arr.shape, dtype=complex)
    for c0 in range(0, len(x_arr), chunk):
        sl = slice(c0, c0 + chunk)
        kmin, kmax = k_lo[sl].min(), k_hi[sl].max()
        k = np.arange(kmin, kmax + 1)
        w = k[None, :] * du[sl, None] + 1j * beta[sl, None]
        mask = (k[None, :] >= k_lo[sl, None]) & (k[None, :] <= k_hi[sl, None])
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            f = np.exp(-x_arr[sl, None] * np.cosh(w) + nu * w + shift)
        f = np.where(mask, f, 0.0)
        out[sl] = 0.5 * du[sl] * f.sum(axis=1)
    return out.reshape(np.shape(x)) if np.ndim(x) else complex(out[0])
