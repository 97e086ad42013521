"""Model cusp charts, (co)metric, Sasaki Gram matrix and the modular-surface point model."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class CuspChart:
    d: int = 1
    lattice: tuple = ((1.0,),)
    a: float = 1.0

    def __post_init__(self):
        L = np.asarray(self.lattice, dtype=float)
        if self.d < 1 or L.shape != (self.d, self.d):
            raise GeometryError(f"lattice must be {self.d}x{self.d}")
        if abs(abs(np.linalg.det(L)) - 1.0) > 1e-12:
            raise GeometryError("lattice must have covolume 1")
        if not self.a > 0:
            raise GeometryError("base height must be positive")
        object.__setattr__(self, "lattice", tuple(tuple(float(v) for v in row) for row in L))

    @property
    def L(self):
        return np.asarray(self.lattice)

    def reduce_theta(self, theta):
        """Representative of theta in the cell [0,1)^d (lattice coordinates)."""
        theta = np.asarray(theta, dtype=float)
        c = np.linalg.solve(self.L.T, theta.reshape(self.d, -1))
        c = c - np.floor(c)
        c[c >= 1.0] = 0.0  # floor rounding for tiny negative inputs
        return (self.L.T @ c).reshape(theta.shape)

    def to_json(self):
        return json.dumps({"d": self.d, "lattice": [list(r) for r in self.lattice], "a": self.a})

    @classmethod
    def from_json(cls, s):
        o = json.loads(s) if isinstance(s, str) else s
        return cls(int(o["d"]), tuple(tuple(r) for r in o["lattice"]), float(o["a"]))


DEFAULT_CHART = CuspChart()


@dataclass(frozen=True)
class PhasePoint:
    y: float
    theta: np.ndarray
    Y: float
    J: np.ndarray
    chart: CuspChart = field(default=DEFAULT_CHART, compare=False)

    def __post_init__(self):
        if not self.y > 0:
            raise GeometryError("y must be positive")
        th = np.atleast_1d(np.asarray(self.theta, dtype=float))
        J = np.atleast_1d(np.asarray(self.J, dtype=float))
        if th.shape != (self.chart.d,) or J.shape != (self.chart.d,):
            raise GeometryError("theta and J must have length d")
        object.__setattr__(self, "theta", self.chart.reduce_theta(th))
        object.__setattr__(self, "J", J)

    @property
    def d(self):
        return self.chart.d

    def as_array(self):
        """Stacked coordinates (y, theta_1..d, Y, J_1..d)."""
        return np.concatenate([[self.y], self.theta, [self.Y], self.J])

    @classmethod
    def from_array(cls, z, chart=DEFAULT_CHART):
        d = chart.d
        z = np.asarray(z, dtype=float)
        return cls(z[0], z[1:1 + d], z[1 + d], z[2 + d:2 + 2 * d], chart)


def split(z, d):
    """Split stacked coordinates z[(2d+2), ...] into (y, theta, Y, J)."""
    z = np.asarray(z)
    return z[0], z[1:1 + d], z[1 + d], z[2 + d:2 + 2 * d]


def cometric(p: PhasePoint) -> float:
    return float(p.y ** 2 * (p.Y ** 2 + np.dot(p.J, p.J)))


def hamiltonian(p: PhasePoint) -> float:
    return 0.5 * cometric(p)


def cometric_arr(z, d=1):
    y, _, Y, J = split(z, d)
    return y ** 2 * (Y ** 2 + np.sum(J ** 2, axis=0))


def sasaki_gram(p: PhasePoint) -> np.ndarray:
    """Gram matrix in the frame (X_y, X_theta, X_Y, X_J).

    Pullback of the Sasaki metric under xi = v / y^2 (the y-dependence of the identification
    contributes to dv), i.e. (dy^2 + |dth|^2) / y^2 + y^2 ((dY + (Y dy + J.dth) / y)^2 + |dJ + (J dy - Y dth) / y|^2).
    """
    d = p.d
    y, Y, J = p.y, p.Y, p.J
    pe = hamiltonian(p)
    n = 2 * d + 2
    G = np.eye(n)
    iy, ith, iY, iJ = 0, np.arange(1, d + 1), d + 1, np.arange(d + 2, 2 * d + 2)
    G[iy, iy] = 1 + 2 * pe
    G[ith, ith] = 1 + 2 * pe
    G[iy, iY] = G[iY, iy] = y * Y
    G[iy, iJ] = G[iJ, iy] = y * J
    G[ith, iY] = G[iY, ith] = y * J
    G[ith, iJ] = G[iJ, ith] = -y * Y
    return G


def frame_matrix(p: PhasePoint) -> np.ndarray:
    """Coordinate components of the frame fields (columns): X_y=y d_y, X_th=y d_th, X_Y=d_Y/y, X_J=d_J/y."""
    d = p.d
    return np.diag([p.y] * (d + 1) + [1.0 / p.y] * (d + 1))


FRAME_NAMES = ("y", "theta", "Y", "J")


def _parse_index(idx, d):
    if isinstance(idx, str):
        if idx == "y":
            return ("y", 0)
        m = re.fullmatch(r"th(?:eta)?_?(\d*)", idx)
        if m:
            k = int(m.group(1) or 1)
            if not 1 <= k <= d:
                raise GeometryError(f"index {idx} out of range")
            return ("theta", k)
    if isinstance(idx, tuple) and idx[0] in ("y", "theta"):
        if idx[0] == "theta" and not 1 <= idx[1] <= d:
            raise GeometryError(f"index {idx} out of range")
        return idx
    raise GeometryError(f"covariant table is defined on y/theta indices only, got {idx!r}")


def covariant_table(i, j, d=1) -> dict:
    """nabla_{X_i} X_j as {frame index: coefficient}; indices 'y' or 'theta_k'."""
    a = _parse_index(i, d)
    b = _parse_index(j, d)
    if a[0] == "y":
        return {}
    if b[0] == "y":
        return {("theta", a[1]): -1.0}
    return {("y", 0): 1.0} if a[1] == b[1] else {}


# ---- modular surface ----

@dataclass(frozen=True)
class ModularPoint:
    x: float
    y: float
    direction: np.ndarray

    def __post_init__(self):
        if not self.y > 0:
            raise GeometryError("y must be positive")
        g = np.asarray(self.direction, dtype=float)
        if g.shape != (2, 2) or abs(np.linalg.det(g) - 1) > 1e-10:
            raise GeometryError("direction must be a 2x2 matrix of determinant 1")
        object.__setattr__(self, "direction", g)

    @property
    def z(self):
        return complex(self.x, self.y)


def mobius(g, z):
    return (g[0][0] * z + g[0][1]) / (g[1][0] * z + g[1][1])


def modular_reduce(z, max_steps=10_000, tol=1e-13):
    """Reduce z into the closed fundamental domain; returns (z_reduced, gamma) with z_reduced = gamma.z."""
    z = complex(z)
    if not z.imag > 0:
        raise GeometryError("point must lie in the upper half plane")
    gamma = np.eye(2, dtype=np.int64)
    for _ in range(max_steps):
        # translate so that Re z lies in (-1/2, 1/2]
        n = int(np.ceil(z.real - 0.5 - tol))
        if n != 0:
            z = z - n
            gamma = np.array([[1, -n], [0, 1]]) @ gamma
        r2 = z.real ** 2 + z.imag ** 2
        if r2 < 1 - tol or (abs(r2 - 1) <= tol and z.real < -tol):
            z = -1 / z
            gamma = np.array([[0, -1], [1, 0]]) @ gamma
            continue
        return z, gamma
    raise GeometryError("modular reduction did not terminate (point too close to the real axis)")


def sl2_from_point(x, y, e):
    """Group element n_x a_y k_phi carrying (i, upward unit vector) to (x+iy, unit direction e)."""
    phi = 0.5 * np.angle(-1j * e)
    c, s = np.cos(phi), np.sin(phi)
    sy = np.sqrt(y)
    # n_x a_y = [[sqrt y, x/sqrt y],[0, 1/sqrt y]], k_phi = [[c, s],[-s, c]]
    A = np.array([[sy, x / sy], [0.0, 1.0 / sy]])
    K = np.array([[c, s], [-s, c]])
    return A @ K


def point_from_sl2(g):
    """(z, unit Euclidean direction) of the frame g.(i, up)."""
    a, b, c, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    w = c * 1j + d
    z = (a * 1j + b) / w
    e = 1j * np.conj(w) / w
    return z, e


def modular_point(x, y, e=1j):
    """ModularPoint at x+iy pointing along unit direction e."""
    return ModularPoint(x, y, sl2_from_point(x, y, e))


def reduce_point(mp: ModularPoint):
    """Reduce the base point into the fundamental domain, carrying the frame along."""
    _, gamma = modular_reduce(mp.z)
    g = gamma.astype(float) @ mp.direction
    z, _ = point_from_sl2(g)
    return ModularPoint(z.real, z.imag, g)
