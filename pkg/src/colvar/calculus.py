"""Per-eps calculus on grid nets: difference operators, quadrature, mollification, delta nets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _spi

from .asymptotics import classify_samples, simpson_weights
from .nets import (
    EpsGrid,
    GenNumber,
    GridNet,
    RESOLUTION,
    NetError,
    SpatialGrid,
    eps_map,
    interp_cubic,
    resolved_grid,
)

# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def fornberg(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Weights for the m-th derivative at z from values at nodes x (Fornberg's recursion)."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@lru_cache(maxsize=None)
def _stencils(order: int):
    """(central half-width, central weights, one-sided size) for fourth-order accuracy on a unit grid."""
    if order not in (1, 2, 3, 4):
        raise NetError("derivative order must be 1..4")
    half = (order + 3) // 2 if order % 2 == 1 else (order + 2) // 2
    offs = np.arange(-half, half + 1, dtype=float)
    return half, fornberg(0.0, offs, order), order + 4


@lru_cache(maxsize=None)
def _onesided(order: int, pos: int, size: int) -> np.ndarray:
    return fornberg(float(pos), np.arange(size, dtype=float), order)


def diff_array(v: np.ndarray, h: float, order: int) -> np.ndarray:
    """order-th derivative of uniform samples, fourth-order accurate everywhere."""
    half, w, size = _stencils(order)
    n = len(v)
    if n < max(size, 2 * half + 1):
        raise NetError(f"grid too coarse: {n} nodes for derivative order {order}")
    out = np.empty(n)
    core = np.zeros(n - 2 * half)
    for k, wk in enumerate(w):
        if wk != 0:
            core += wk * v[k : n - 2 * half + k]
    out[half : n - half] = core
    for i in range(half):
        out[i] = _onesided(order, i, size) @ v[:size]
        j = n - 1 - i
        out[j] = _onesided(order, size - 1 - i, size) @ v[n - size :]
    return out / h**order


def differentiate(u: GridNet, order: int) -> GridNet:
    """Fourth-order difference derivative of every eps-slice."""
    vals = [diff_array(v, s.h, order) for s, v in zip(u.spatial, u.values)]
    return GridNet(u.grid, u.spatial, tuple(vals))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (8, 48, 96, 192)}


def integrate_array(x: np.ndarray, v: np.ndarray, sub: tuple | None = None) -> float:
    """Simpson on uniform nodes; a sub-interval off the nodes gets cubic end pieces."""
    n = len(x)
    h = (x[-1] - x[0]) / (n - 1)
    if sub is None:
        return float(simpson_weights(n, h) @ v)
    lo, hi = sub
    tol = 1e-9 * h
    if lo < x[0] - tol or hi > x[-1] + tol or hi < lo:
        raise NetError(f"sub-interval {sub} outside [{x[0]}, {x[-1]}]")
    i = int(math.ceil((lo - x[0]) / h - 1e-9))
    j = int(math.floor((hi - x[0]) / h + 1e-9))
    t, w = _GL[8]

    def piece(a, b):
        if b - a <= tol:
            return 0.0
        y = 0.5 * (b - a) * t + 0.5 * (a + b)
        return 0.5 * (b - a) * float(w @ interp_cubic(x, v, y))

    if j < i:
        return piece(lo, hi)
    total = piece(lo, x[i]) + piece(x[j], hi)
    if j > i:
        total += float(simpson_weights(j - i + 1, h) @ v[i : j + 1])
    return total


def integrate(u: GridNet, sub: tuple | None = None) -> GenNumber:
    """Per-eps integral over the domain or a sub-interval."""
    vals = [integrate_array(x, v, sub) for _, x, v in u.items()]
    return GenNumber(u.grid, np.array(vals))


def cumulative(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Running integral from x[0], fourth-order (cubic through neighbours on each cell)."""
    n = len(x)
    h = x[1] - x[0]
    if n < 4:
        return np.concatenate([[0.0], np.cumsum(0.5 * h * (v[1:] + v[:-1]))])
    cell = np.empty(n - 1)
    # interior cells: 4-point rule (-1, 13, 13, -1)/24
    cell[1:-1] = h * (-v[:-3] + 13 * v[1:-2] + 13 * v[2:-1] - v[3:]) / 24
    cell[0] = h * (9 * v[0] + 19 * v[1] - 5 * v[2] + v[3]) / 24
    cell[-1] = h * (9 * v[-1] + 19 * v[-2] - 5 * v[-3] + v[-4]) / 24
    return np.concatenate([[0.0], np.cumsum(cell)])


# ---------------------------------------------------------------------------
# mollifiers
# ---------------------------------------------------------------------------


def _bump_raw(y):
    y = np.asarray(y, float)
    out = np.zeros_like(y)
    m = np.abs(y) < 1
    out[m] = np.exp(-1.0 / (1.0 - y[m] ** 2))
    return out


def _panel_integral(g: Callable, a: float, b: float, panels: int, n: int = 96) -> float:
    t, w = _GL[n]
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    y = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    return float(np.sum(0.5 * (hi - lo) * (np.asarray(g(y), float) @ w[:, None])))


@dataclass(frozen=True)
class Mollifier:
    """Even bump supported in [-1, 1] with unit integral."""

    shape: Callable = _bump_raw
    norm: float = field(default=0.0)

    def __post_init__(self):
        if self.norm == 0.0:
            object.__setattr__(self, "norm", _panel_integral(self.shape, -1.0, 1.0, 8))
        t, w = _GL[192]
        if abs(float(w @ self(t)) - 1.0) > 1e-12:
            raise NetError("mollifier does not integrate to 1")

    def __call__(self, y):
        return self.shape(y) / self.norm

    def scaled(self, eps: float, y):
        """m_eps(y) = m(y/eps)/eps."""
        return self(np.asarray(y, float) / eps) / eps


DEFAULT_MOLLIFIER = Mollifier()


def _convolve_nodes(f: Callable, breaks: Sequence[float], m: Mollifier, eps: float, x: np.ndarray, npts: int) -> np.ndarray:
    t, w = _GL[npts]
    brk = np.sort(np.asarray(breaks, float))
    out = np.empty_like(x)
    chunk = max(1, 400_000 // (npts * (len(brk) + 1)))
    for s in range(0, len(x), chunk):
        xs = x[s : s + chunk]
        # panel edges in the mollifier variable y, where f(xs - eps*y) may jump
        if len(brk):
            yk = np.clip((xs[:, None] - brk[None, :]) / eps, -1.0, 1.0)
            edges = np.sort(np.concatenate([-np.ones((len(xs), 1)), yk, np.ones((len(xs), 1))], axis=1), axis=1)
        else:
            edges = np.tile([-1.0, 1.0], (len(xs), 1))
        lo, hi = edges[:, :-1], edges[:, 1:]
        half = 0.5 * (hi - lo)
        y = lo[..., None] + half[..., None] * (t + 1.0)
        vals = np.asarray(f(xs[:, None, None] - eps * y), float) * m(y)
        out[s : s + chunk] = np.einsum("ijk,k,ij->i", vals, w, half)
    return out


def convolve(f: Callable, breaks: Sequence[float], m: Mollifier, eps: float, x: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """(f * m_eps)(x) by Gauss-Legendre panels split at the breakpoints of f."""
    a = _convolve_nodes(f, breaks, m, eps, x, 48)
    b = _convolve_nodes(f, breaks, m, eps, x, 96)
    scale = max(1.0, float(np.max(np.abs(b))))
    if np.max(np.abs(a - b)) <= rtol * scale * 1e3:
        return b
    c = _convolve_nodes(f, breaks, m, eps, x, 192)
    return c


def mollify_embed(f: Callable, grid: EpsGrid, domain: tuple, breaks: Sequence[float] = (),
                  m: Mollifier = DEFAULT_MOLLIFIER, base_n: int = 201) -> GridNet:
    """u_eps = f * m_eps sampled on a per-eps grid with h <= eps/16.

    ``f`` must accept arrays and be defined on a neighbourhood of ``domain``.
    """
    a, b = domain
    spatial = tuple(resolved_grid(a, b, float(e), base_n) for e in grid.values)

    def one(k):
        return convolve(f, breaks, m, float(grid.values[k]), spatial[k].nodes)

    return GridNet(grid, spatial, tuple(eps_map(one, range(len(grid)))))


def step_function(c: float, d: float, at: float = 0.0):
    """c left of ``at``, d right of it (value at the jump is the mean)."""

    def v(x):
        x = np.asarray(x, float)
        return np.where(x < at, c, np.where(x > at, d, 0.5 * (c + d)))

    v.breakpoints = [at]
    return v


# ---------------------------------------------------------------------------
# delta nets
# ---------------------------------------------------------------------------


@dataclass
class DeltaFamily:
    """Model delta (1/eps) phi((x-x0)/eps), or a strict delta given per eps.

    ``checks`` records support shrinkage, total mass and absolute mass per eps.
    """

    kind: str
    grid: EpsGrid
    density: Callable  # (eps, x) -> array
    support: Callable  # eps -> half-width of the support around x0
    x0: float = 0.0
    weight: float = 1.0
    checks: dict = field(default_factory=dict)

    def __call__(self, eps: float, x):
        return self.weight * self.density(eps, np.asarray(x, float) - self.x0)

    def realize(self, domain: tuple, base_n: int = 201, per_eps: int = RESOLUTION) -> GridNet:
        a, b = domain
        spatial = tuple(resolved_grid(a, b, float(e), base_n, per_eps) for e in self.grid.values)
        vals = tuple(self(float(e), s.nodes) for e, s in zip(self.grid.values, spatial))
        return GridNet(self.grid, spatial, vals)

    def mass(self, eps: float, absolute: bool = False, n: int = 96) -> float:
        """Integral of the density over its support, panels of width eps/4."""
        r = self.support(eps)
        edges = np.linspace(-r, r, max(8, int(math.ceil(8 * r / eps))) + 1)
        t, w = _GL[n]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            y = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
            d = self.density(eps, y)
            total += 0.5 * (hi - lo) * float(w @ (np.abs(d) if absolute else d))
        return total

    def run_checks(self, mass_tol: float = 1e-8) -> dict:
        e = self.grid.values
        sup = np.array([self.support(float(x)) for x in e])
        mass = np.array([self.mass(float(x)) for x in e])
        absm = np.array([self.mass(float(x), absolute=True) for x in e])
        shrink = bool(np.all(np.diff(sup) <= 0) and sup[-1] < sup[0])
        tail = self.grid.tail
        if self.kind == "model":
            mass_ok = bool(np.all(np.abs(mass - 1.0) <= mass_tol))
        else:
            dev = np.abs(mass - 1.0)
            mass_ok = bool(dev[-1] <= max(mass_tol, dev[0]))
        bounded = classify_samples(e, absm).cls == "Moderate" and classify_samples(e, absm).N == 0
        self.checks = {
            "support_shrinks": shrink,
            "mass_to_one": mass_ok,
            "abs_mass_bounded": bool(bounded),
            "support_halfwidth": sup.tolist(),
            "mass": mass.tolist(),
            "abs_mass": absm.tolist(),
            "max_abs_mass": float(absm[tail].max()),
        }
        if not (shrink and mass_ok and bounded):
            raise NetError(f"delta family fails its defining checks: {self.checks}")
        return self.checks


def make_delta(kind: str, grid: EpsGrid, shape: Callable | None = None, x0: float = 0.0,
               weight: float = 1.0, radius: float = 1.0) -> DeltaFamily:
    """Build and check a delta net.

    kind "model": ``shape`` is phi (default: the normalized bump), supported in
    [-radius, radius]; kind "strict": ``shape`` is (eps, y) -> rho_eps(y) with
    support in [-radius*eps, radius*eps].
    """
    if kind == "model":
        phi = shape if shape is not None else DEFAULT_MOLLIFIER
        dens = lambda e, y: phi(np.asarray(y, float) / e) / e
    elif kind == "strict":
        if shape is None:
            shape = signed_strict_delta
        dens = shape
    else:
        raise NetError(f"unknown delta kind {kind!r}")
    fam = DeltaFamily(kind, grid, dens, lambda e: radius * e, x0, weight)
    fam.run_checks()
    return fam


def signed_strict_delta(eps: float, y):
    """(bump - 0.3 * bump shifted onto [0, 1]) / 0.7, scaled to width eps."""
    s = np.asarray(y, float) / eps
    m = DEFAULT_MOLLIFIER
    return (m(s) - 0.3 * 2.0 * m(2.0 * s - 1.0)) / 0.7 / eps
