"""Extremum tests for eps-families of smooth functions on R^p.

A minimum in the generalized sense has to hold against points that move with
eps, so the probe set mixes fixed points, points x0 + c*eps^k d and points
picked separately at each eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .asymptotics import AsymptoticReport, classify, classify_definiteness, is_strictly_positive
from .nets import EpsGrid, GenMatrix, GenNumber, GenPoint, NetError

MACHEPS = np.finfo(float).eps
EPS_EXPONENTS = (0.5, 1.0, 2.0)


@dataclass
class EpsFunctionFamily:
    """f(eps, x) on the box ``domain`` (list of (lo, hi) per coordinate).

    ``grad`` and ``hess`` are optional analytic callables with the same
    signature; otherwise central differences with step max(1e-5, eps/64) are used.
    """

    grid: EpsGrid
    f: Callable
    domain: list
    grad: Callable | None = None
    hess: Callable | None = None

    @property
    def dim(self) -> int:
        return len(self.domain)

    def step(self, eps: float) -> float:
        return max(1e-5, eps / 64)

    def value(self, eps: float, x) -> float:
        return float(self.f(eps, np.asarray(x, float)))

    def gradient(self, eps: float, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.grad is not None:
            return np.atleast_1d(np.asarray(self.grad(eps, x), float))
        h = self.step(eps)
        g = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            g[i] = (self.value(eps, x + e) - self.value(eps, x - e)) / (2 * h)
        return g

    def hessian(self, eps: float, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.hess is not None:
            return np.atleast_2d(np.asarray(self.hess(eps, x), float))
        h = self.step(eps)
        p = self.dim
        H = np.empty((p, p))
        f0 = self.value(eps, x)
        I = np.eye(p) * h
        for i in range(p):
            H[i, i] = (self.value(eps, x + I[i]) - 2 * f0 + self.value(eps, x - I[i])) / h**2
            for j in range(i):
                H[i, j] = H[j, i] = (
                    self.value(eps, x + I[i] + I[j])
                    - self.value(eps, x + I[i] - I[j])
                    - self.value(eps, x - I[i] + I[j])
                    + self.value(eps, x - I[i] - I[j])
                ) / (4 * h * h)
        return H

    def roundoff(self, eps: float, x) -> float:
        """Rounding level of the difference gradient at x (0 for analytic gradients)."""
        if self.grad is not None:
            return 0.0
        return 64 * MACHEPS * max(1.0, abs(self.value(eps, x))) / self.step(eps)

    def interior(self, x) -> bool:
        x = np.atleast_1d(x)
        return all(lo < xi < hi for xi, (lo, hi) in zip(x, self.domain))

    def inside(self, x) -> bool:
        x = np.atleast_1d(x)
        return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, self.domain))


@dataclass
class CriticalReport:
    grad_report: AsymptoticReport
    hessian: str
    hessian_eigs: list

    def to_dict(self) -> dict:
        return {"gradient": self.grad_report.to_dict(), "hessian": self.hessian, "hessian_eigenvalues": self.hessian_eigs}


def _x0(f: EpsFunctionFamily, x0) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x0, float))
    if x.shape != (f.dim,):
        raise NetError("base point has the wrong dimension")
    if not f.interior(x):
        raise NetError("base point must be interior to the domain")
    return x


def hessian_matrix(f: EpsFunctionFamily, coords: np.ndarray) -> GenMatrix:
    """Hessians along a point net; coords has shape (n_eps, p)."""
    H = np.array([f.hessian(float(e), c) for e, c in zip(f.grid.values, coords)])
    H = 0.5 * (H + np.swapaxes(H, 1, 2))
    return GenMatrix(f.grid, H)


def check_critical(f: EpsFunctionFamily, x0) -> CriticalReport:
    x = _x0(f, x0)
    e = f.grid.values
    g = np.array([np.max(np.abs(f.gradient(float(ei), x))) for ei in e])
    floor = np.array([f.roundoff(float(ei), x) for ei in e])
    rep = classify(GenNumber(f.grid, g), floor=floor)
    A = hessian_matrix(f, np.tile(x, (len(e), 1)))
    eigs = np.linalg.eigvalsh(A.samples)
    return CriticalReport(rep, classify_definiteness(A), eigs.tolist())


# ---------------------------------------------------------------------------
# probing the neighbourhood
# ---------------------------------------------------------------------------


def directions(p: int) -> np.ndarray:
    """Up to 8 unit directions: +-coordinate axes first, then +-diagonals."""
    if p == 1:
        return np.array([[1.0], [-1.0]])
    d = []
    for i in range(p):
        e = np.zeros(p)
        e[i] = 1.0
        d += [e, -e]
    diag = np.ones(p) / math.sqrt(p)
    alt = np.array([(-1.0) ** i for i in range(p)]) / math.sqrt(p)
    d += [diag, -diag, alt, -alt]
    return np.array(d[:8])


def radii(radius: float) -> np.ndarray:
    return radius * np.geomspace(1.0, 1e-3, 5)


def scale_factors(radius: float) -> np.ndarray:
    """Magnitudes c for near-standard probes x0 + c eps^k d."""
    dense = np.linspace(0.125, 2.0, 16)
    return np.concatenate([radii(radius), dense[~np.isin(dense, radii(radius))]])


@dataclass
class Probe:
    kind: str
    point: GenPoint
    label: str


def probe_points(f: EpsFunctionFamily, x0: np.ndarray, radius: float) -> list[Probe]:
    e = f.grid.values
    n = len(e)
    out: list[Probe] = []
    dirs = directions(f.dim)
    for r in radii(radius):
        for d in dirs:
            c = x0 + r * d
            if f.inside(c):
                out.append(Probe("classical", GenPoint(f.grid, np.tile(c, (n, 1)), "classical"), f"x0+{r:.6g}*d"))
    # harmonic classical points x0 + radius/k, where eps-sized bumps may sit
    for k in range(2, 41):
        for d in dirs:
            c = x0 + (radius / k) * d
            if f.inside(c):
                out.append(Probe("classical", GenPoint(f.grid, np.tile(c, (n, 1)), "classical"), f"x0+{radius}/{k}*d"))
    for k in EPS_EXPONENTS:
        for c in scale_factors(radius):
            for d in dirs:
                coords = x0[None, :] + c * (e[:, None] ** k) * d[None, :]
                if all(f.inside(p) for p in coords):
                    out.append(Probe("near-standard", GenPoint(f.grid, coords, "near-standard", x0.tolist()),
                                     f"x0+{c:.6g}*eps^{k}*d"))
    return out


@dataclass
class MinTestResult:
    verdict: str  # IsMinimumOnProbes | FailsAt
    witness: GenPoint | None = None
    value: GenNumber | None = None
    label: str = ""
    probes: int = 0

    @property
    def fails(self) -> bool:
        return self.verdict == "FailsAt"

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict, "probes": self.probes, "scope": "on probes"}
        if self.witness is not None:
            d["witness"] = {"label": self.label, **self.witness.to_dict()}
            d["difference"] = [{"epsilon": float(e), "value": float(v)} for e, v in zip(self.value.eps, self.value.samples)]
        return d


def _difference(f: EpsFunctionFamily, pt: GenPoint, base: np.ndarray) -> GenNumber:
    return GenNumber(f.grid, np.array([f.value(float(e), c) for e, c in zip(f.grid.values, pt.coords)]) - base)


def neighborhood_min_test(f: EpsFunctionFamily, x0, radius: float) -> MinTestResult:
    """Look for a point where f - f(x0) is strictly negative as a generalized number."""
    x = _x0(f, x0)
    e = f.grid.values
    base = np.array([f.value(float(ei), x) for ei in e])
    probes = probe_points(f, x, radius)
    diffs = []
    for pr in probes:
        dv = _difference(f, pr.point, base)
        diffs.append(dv.samples)
        if is_strictly_positive(-dv).strictly_positive:
            return MinTestResult("FailsAt", pr.point, dv, pr.label, len(diffs))
    # interleaved point: at each eps take the probe with the lowest value
    D = np.array(diffs)
    pick = np.argmin(D, axis=0)
    coords = np.array([np.atleast_1d(probes[j].point.coords[k]) for k, j in enumerate(pick)])
    dv = GenNumber(f.grid, D[pick, np.arange(len(e))])
    if is_strictly_positive(-dv).strictly_positive:
        return MinTestResult("FailsAt", GenPoint(f.grid, coords, "general"), dv, "per-eps argmin", len(diffs) + 1)
    return MinTestResult("IsMinimumOnProbes", probes=len(diffs) + 1)


@dataclass
class SufficientResult:
    verdict: str  # UniqueMinimum | Minimum | Inconclusive
    worst: str
    cross_check_conflict: bool = False

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "worst_hessian": self.worst, "cross_check_conflict": self.cross_check_conflict,
                "scope": "on probes"}


def sufficient_min_check(f: EpsFunctionFamily, x0, radius: float) -> SufficientResult:
    """Hessian semidefinite at every probe => Minimum; definite everywhere => UniqueMinimum."""
    x = _x0(f, x0)
    crit = check_critical(f, x)
    if not crit.grad_report.negligible:
        raise NetError("x0 is not a critical point (gradient not negligible)")
    verdicts = [crit.hessian]
    for pr in probe_points(f, x, radius):
        coords = np.asarray(pr.point.coords).reshape(len(f.grid), f.dim)
        verdicts.append(classify_definiteness(hessian_matrix(f, coords)))
    if all(v == "PositiveDefinite" for v in verdicts):
        verdict, worst = "UniqueMinimum", "PositiveDefinite"
    elif all(v in ("PositiveDefinite", "PositiveSemidefinite") for v in verdicts):
        verdict, worst = "Minimum", "PositiveSemidefinite"
    else:
        verdict = "Inconclusive"
        worst = next(v for v in verdicts if v not in ("PositiveDefinite", "PositiveSemidefinite"))
    conflict = False
    if verdict != "Inconclusive" and neighborhood_min_test(f, x, radius).fails:
        verdict, conflict = "Inconclusive", True
    return SufficientResult(verdict, worst, conflict)


# ---------------------------------------------------------------------------
# the two counterexample families
# ---------------------------------------------------------------------------


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, float)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def well_bump(x):
    """Equals x^2 on |x| <= 1/2, equals -1 on 3/4 <= |x| <= 5/4, vanishes for |x| >= 7/4."""
    ax = np.abs(np.asarray(x, float))
    c1 = 1.0 - smooth_step((ax - 0.5) / 0.25)
    c2 = 1.0 - smooth_step((ax - 1.25) / 0.5)
    return c1 * ax**2 - (1.0 - c1) * c2


def dip(x):
    """-1 on |x| <= 1/2, 0 for |x| >= 9/10."""
    return -(1.0 - smooth_step((np.abs(np.asarray(x, float)) - 0.5) / 0.4))


def bump_family(grid: EpsGrid, domain=(-1.0, 1.0)) -> EpsFunctionFamily:
    """f_eps(x) = well_bump(x/eps): f''(0) = 2/eps^2 yet f(eps) = -1."""
    return EpsFunctionFamily(grid, lambda e, x: float(well_bump(x[0] / e)), [tuple(domain)])


def series_family(grid: EpsGrid, terms: int = 12, domain=(-1.5, 1.5)) -> EpsFunctionFamily:
    """F_eps(x) = sum_n eps^n dip((x - 1/n)/eps), n = 1..terms."""
    n = np.arange(1, terms + 1)

    def F(e, x):
        return float(np.sum(e**n * dip((x[0] - 1.0 / n) / e)))

    return EpsFunctionFamily(grid, F, [tuple(domain)])


def zero_divisor_family(grid: EpsGrid, alpha: GenNumber, domain=(-1.0, 1.0)) -> EpsFunctionFamily:
    a = dict(zip(grid.values.tolist(), alpha.samples.tolist()))
    return EpsFunctionFamily(grid, lambda e, x: a[float(e)] * float(x[0]) ** 2, [tuple(domain)])
