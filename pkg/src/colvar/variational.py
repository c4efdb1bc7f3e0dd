"""Integral functionals of jets on an interval: variations, Euler-Lagrange residuals,
the fundamental-lemma witness, association tests and a 1D quadratic BVP solver.

Jets are passed to densities as ``(eps, x, J)`` where ``J[k]`` holds the k-th
derivative of every component, shape ``(q, m)`` for ``m`` sample points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .asymptotics import (
    M_MAX,
    TOL_WEAK,
    AsymptoticReport,
    classify,
    classify_samples,
    fit_slope,
    invertibility_exponent,
    simpson_weights,
    tail_limit,
)
from .calculus import _GL, diff_array, differentiate, integrate_array
from .gen_opt import smooth_step
from .nets import EpsGrid, GenNumber, GridNet, NetError, SpatialGrid, interp_cubic, resolved_grid

MACHEPS = np.finfo(float).eps
TAUS = (1.0, -1.0, 0.1, -0.1, 0.01, -0.01)


class CrossCheckError(NetError):
    """Two independent evaluations of the same quantity disagree."""


class DegenerateError(NetError):
    """The quadratic form loses coercivity (alpha vanishes somewhere)."""


class NegligibleInput(NetError):
    """No witness exists: the net is negligible."""


# ---------------------------------------------------------------------------
# Lagrangians and functionals
# ---------------------------------------------------------------------------


@dataclass
class Lagrangian:
    """Density L_eps(x, u, u', ..., u^(n)) with optional analytic partials.

    ``partials[k]`` returns dL/du^(k) with shape (q, m); missing entries fall
    back to central differences in the jet coordinate.
    """

    density: Callable
    order: int = 1
    ncomp: int = 1
    partials: dict = field(default_factory=dict)
    growth_tag: str = "polynomial"
    name: str = ""

    def __post_init__(self):
        if self.order not in (1, 2):
            raise NetError("Lagrangian order must be 1 or 2")

    def __call__(self, eps, x, J) -> np.ndarray:
        return np.asarray(self.density(eps, x, J), float)

    def partial(self, k: int, eps, x, J) -> np.ndarray:
        if k in self.partials:
            return np.asarray(self.partials[k](eps, x, J), float).reshape(self.ncomp, -1)
        return self.numeric_partial(k, eps, x, J)

    def numeric_partial(self, k: int, eps, x, J) -> np.ndarray:
        out = np.empty_like(J[k])
        for i in range(self.ncomp):
            h = 6e-6 * (1.0 + np.abs(J[k][i]))
            Jp = [a.copy() for a in J]
            Jm = [a.copy() for a in J]
            Jp[k][i] += h
            Jm[k][i] -= h
            out[i] = (self(eps, x, Jp) - self(eps, x, Jm)) / (2 * h)
        return out

    def check_partials(self, eps: float, rng: np.random.Generator, n: int = 100, box: float = 1.0,
                       x_range=(-1.0, 1.0), tol: float = 1e-6) -> float:
        """Worst relative mismatch between the supplied partials and difference probes."""
        x = rng.uniform(*x_range, n)
        J = [rng.uniform(-box, box, (self.ncomp, n)) for _ in range(self.order + 1)]
        worst = 0.0
        for k in self.partials:
            a = self.partial(k, eps, x, J)
            b = self.numeric_partial(k, eps, x, J)
            worst = max(worst, float(np.max(np.abs(a - b) / (1.0 + np.abs(b)))))
        if worst > tol:
            raise CrossCheckError(f"partials of {self.name or 'L'} disagree with difference probes ({worst:.3g})")
        return worst


@dataclass
class Functional:
    lagrangian: Lagrangian
    domain: tuple
    boundary: object = "natural"  # "natural" or {"left": [...], "right": [...]}

    def __post_init__(self):
        if not self.domain[1] > self.domain[0]:
            raise NetError("degenerate domain")

    @property
    def dirichlet(self) -> bool:
        return self.boundary != "natural"


def _components(u) -> list[GridNet]:
    us = [u] if isinstance(u, GridNet) else list(u)
    for w in us[1:]:
        if w.grid != us[0].grid or w.spatial != us[0].spatial:
            raise NetError("components must share eps and spatial grids")
    return us


def jets(us: list[GridNet], k: int, order: int):
    """(x, J) for the k-th eps slice, derivatives up to ``order``."""
    s = us[0].spatial[k]
    U = np.array([w.values[k] for w in us])
    J = [U] + [np.array([diff_array(row, s.h, d) for row in U]) for d in range(1, order + 1)]
    return s.nodes, J


def evaluate(F: Functional, u) -> GenNumber:
    """Per-eps Simpson quadrature of L_eps along the jet of u_eps."""
    us = _components(u)
    L = F.lagrangian
    out = []
    for k, e in enumerate(us[0].grid.values):
        x, J = jets(us, k, L.order)
        out.append(integrate_array(x, L(float(e), x, J)))
    return GenNumber(us[0].grid, np.array(out))


def _shift(us, vs, s):
    return [u + s * v for u, v in zip(us, vs)]


def _sup(us) -> float:
    return max(float(np.max(np.abs(v))) for w in us for v in w.values)


def _check_admissible(F: Functional, vs):
    if not F.dirichlet:
        return
    for w in vs:
        for v in w.values:
            scale = 1e-10 * (1.0 + float(np.max(np.abs(v))))
            if abs(v[0]) > scale or abs(v[-1]) > scale:
                raise NetError("variation must vanish at Dirichlet ends")


@dataclass
class VariationResult:
    value: GenNumber
    by_difference: GenNumber
    rel_error: float

    def to_dict(self) -> dict:
        return {"value": self.value.samples.tolist(), "by_difference": self.by_difference.samples.tolist(),
                "epsilon": self.value.eps.tolist(), "rel_error": self.rel_error}


def first_variation(F: Functional, u, v, tol: float = 1e-4, detail: bool = False):
    """delta L(u; v) = sum_k int dL/du^(k) . v^(k), cross-checked by a difference quotient in s."""
    us, vs = _components(u), _components(v)
    _check_admissible(F, vs)
    L = F.lagrangian
    s = 1e-4 * (1.0 + _sup(us))

    def central(h):
        return (evaluate(F, _shift(us, vs, h)).samples - evaluate(F, _shift(us, vs, -h)).samples) / (2 * h)

    # Richardson step: eps-scale features make the plain O(s^2) quotient too coarse
    dq = (4 * central(0.5 * s) - central(s)) / 3
    integral, mass = [], []
    for k, e in enumerate(us[0].grid.values):
        x, J = jets(us, k, L.order)
        _, V = jets(vs, k, L.order)
        dens = sum(np.sum(L.partial(d, float(e), x, J) * V[d], axis=0) for d in range(L.order + 1))
        absd = sum(np.sum(np.abs(L.partial(d, float(e), x, J) * V[d]), axis=0) for d in range(L.order + 1))
        integral.append(integrate_array(x, dens))
        mass.append(integrate_array(x, absd))
    integral, mass = np.array(integral), np.array(mass)
    rel = np.abs(dq - integral) / np.maximum(np.maximum(np.abs(integral), mass), 1e-300)
    worst = float(np.max(rel)) if np.any(mass > 0) else 0.0
    if worst > tol:
        raise CrossCheckError(f"first variation: difference quotient and integral form differ (rel {worst:.3g})")
    res = VariationResult(GenNumber(us[0].grid, integral), GenNumber(us[0].grid, dq), worst)
    return res if detail else res.value


def second_variation(F: Functional, u, v, quadratic=None, tol: float = 1e-4, detail: bool = False):
    """delta^2 L(u; v) by a second difference in s; checked against a(v, v) when ``quadratic`` is given."""
    us, vs = _components(u), _components(v)
    _check_admissible(F, vs)
    s = 1e-4 * (1.0 + _sup(us))
    f0 = evaluate(F, us).samples
    val = (evaluate(F, _shift(us, vs, s)).samples - 2 * f0 + evaluate(F, _shift(us, vs, -s)).samples) / s**2
    worst = 0.0
    if quadratic is not None:
        ref = quadratic.a(vs[0], vs[0]).samples
        rel = np.abs(val - ref) / np.maximum(1e-12 + np.abs(ref), 1e-300)
        worst = float(np.max(rel))
        # roundoff of the second difference, relative to the functional's size
        slack = 1e3 * MACHEPS * np.maximum(np.abs(f0), 1.0) / s**2
        if np.any(np.abs(val - ref) > tol * np.abs(ref) + slack):
            raise CrossCheckError(f"second variation disagrees with a(v, v) (rel {worst:.3g})")
        val = ref
    res = VariationResult(GenNumber(us[0].grid, val), GenNumber(us[0].grid, val), worst)
    return res if detail else res.value


def euler_residual(F: Functional, u) -> list[GridNet]:
    """E(L) = dL/du - D dL/du' (+ D^2 dL/du'') per component, by difference operators."""
    us = _components(u)
    L = F.lagrangian
    if L.order > 2:
        raise NetError("order > 2 is not supported")
    per_comp = [[] for _ in range(L.ncomp)]
    for k, e in enumerate(us[0].grid.values):
        x, J = jets(us, k, L.order)
        h = us[0].spatial[k].h
        P = [L.partial(d, float(e), x, J) for d in range(L.order + 1)]
        for i in range(L.ncomp):
            r = P[0][i] - diff_array(P[1][i], h, 1)
            if L.order == 2:
                r = r + diff_array(P[2][i], h, 2)
            per_comp[i].append(r)
    return [GridNet(us[0].grid, us[0].spatial, tuple(c)) for c in per_comp]


def interior(domain: tuple, frac: float = 0.05) -> tuple:
    a, b = domain
    d = frac * (b - a)
    return (a + d, b - d)


def cutoff(domain: tuple):
    """Smooth factor vanishing at both ends; multiplying by it makes variations admissible."""
    a, b = domain
    return lambda x: np.sin(np.pi * (np.asarray(x, float) - a) / (b - a))


def admissible(net: GridNet, domain: tuple) -> GridNet:
    c = cutoff(domain)
    return net.map(lambda e, x, v: v * c(x))


# ---------------------------------------------------------------------------
# fundamental lemma
# ---------------------------------------------------------------------------


def plateau(y):
    """Nonnegative, 1 on |y| <= 1/4, 0 on |y| >= 1/2."""
    return 1.0 - smooth_step((np.abs(np.asarray(y, float)) - 0.25) / 0.25)


@dataclass
class WitnessResult:
    centers: np.ndarray
    scales: np.ndarray
    signs: np.ndarray
    pairing: GenNumber
    l: float
    N: int
    predicted_slope: float
    observed_slope: float
    report: AsymptoticReport

    def phi(self, k: int):
        c, r, s = self.centers[k], self.scales[k], self.signs[k]
        return lambda x: s / r * plateau((np.asarray(x, float) - c) / r)

    def to_dict(self) -> dict:
        return {"l": self.l, "N": self.N, "predicted_slope": self.predicted_slope,
                "observed_slope": self.observed_slope, "pairing_class": self.report.label,
                "pairing": [{"epsilon": float(e), "value": float(v)} for e, v in zip(self.pairing.eps, self.pairing.samples)]}


def fundamental_witness(u: GridNet, K: tuple | None = None) -> WitnessResult:
    """Scaled signed bump phi_eps at a near-maximal point of |u_eps| with int u phi non-negligible.

    The bump has height eps^-(l+N) and width eps^(l+N), where |u_eps(x_eps)| >= eps^l and
    sup|u_eps'| <= eps^-N; the pairing then decays no faster than eps^(l+N-N) = eps^l.
    """
    s0 = u.spatial[0]
    K = K or interior((s0.a, s0.b), 0.1)
    rep = classify(u, K, alpha_max=0)
    if rep.negligible:
        raise NegligibleInput("net is negligible on K; no test function can detect it")
    centers, peaks = [], []
    for _, x, v in u.items():
        idx = np.flatnonzero((x >= K[0]) & (x <= K[1]))
        a = np.abs(v[idx])
        # among near-maximal nodes take the one deepest inside K, so the bump fits
        near = idx[a >= 0.5 * a.max()]
        i = near[np.argmax(np.minimum(x[near] - K[0], K[1] - x[near]))]
        centers.append(x[i])
        peaks.append(v[i])
    centers, peaks = np.array(centers), np.array(peaks)
    l = invertibility_exponent_signed(GenNumber(u.grid, peaks))
    N = classify(differentiate(u, 1).sup(K)).N or 0
    e = u.grid.values
    scales = 0.5 * e ** (l + N)
    # keep the bump inside K
    scales = np.minimum(scales, 0.5 * np.minimum(centers - K[0], K[1] - centers) + 1e-300)
    signs = np.sign(peaks)
    t, w = _GL[96]
    pair = []
    for k, (ek, x, v) in enumerate(u.items()):
        r, c = scales[k], centers[k]
        # bump lives on [c - r/2, c + r/2] in x; integrate on its own Gauss grid
        xs = c + 0.5 * r * t
        phi = signs[k] / r * plateau((xs - c) / r)
        pair.append(0.5 * r * float(w @ (interp_cubic(x, v, xs) * phi)))
    P = GenNumber(u.grid, np.array(pair))
    prep = classify(P)
    tail = u.grid.tail
    slope, _ = fit_slope(e[tail], P.samples[tail])
    return WitnessResult(centers, scales, signs, P, l, N, l, slope, prep)


def invertibility_exponent_signed(x: GenNumber) -> float:
    """Smallest a (any sign) with |x_eps| >= eps^a on the tail."""
    e, v = x.eps[x.grid.tail], np.abs(x.samples[x.grid.tail])
    if np.any(v == 0):
        return math.inf
    return float(np.max(np.log(v) / np.log(e)))


# ---------------------------------------------------------------------------
# association-level optimality
# ---------------------------------------------------------------------------


@dataclass
class AssocVerdict:
    verdict: str  # pass | fail | Indeterminate
    limits: list
    worst: float

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "worst_limit": self.worst, "limits": self.limits}


def _limit(e, v, tol) -> tuple[float, bool]:
    lim = tail_limit(e, v)
    converged = abs(v[-1] - v[-2]) <= max(tol, 0.5 * abs(v[-2] - v[-3]))
    return lim, converged


def _add_test(u: GridNet, phi) -> GridNet:
    return u.map(lambda e, x, v: v + phi(x))


def assoc_minimizer_test(F: Functional, u, tests, taus=TAUS, tol: float = TOL_WEAK) -> AssocVerdict:
    """lim (L(u + tau phi) - L(u)) >= -tol for every test phi and every tau."""
    us = _components(u)
    base = evaluate(F, us).samples
    e = us[0].grid.values[us[0].grid.tail]
    limits, ok, conv = [], True, True
    for j, phi in enumerate(tests):
        for tau in taus:
            sh = [_add_test(us[0], lambda x, p=phi, t=tau: t * p(x))] + us[1:]
            d = (evaluate(F, sh).samples - base)[us[0].grid.tail]
            lim, c = _limit(e, d, tol)
            limits.append({"test": j, "tau": tau, "limit": lim, "converged": c})
            conv &= c
            ok &= lim >= -tol
    worst = min(x["limit"] for x in limits)
    verdict = "pass" if ok and conv else ("fail" if conv else "Indeterminate")
    return AssocVerdict(verdict, limits, worst)


# ---------------------------------------------------------------------------
# quadratic forms
# ---------------------------------------------------------------------------


def _coef(c):
    if callable(c):
        return c
    return lambda e, x, c=float(c): np.full_like(np.asarray(x, float), c)


@dataclass
class QuadraticForm:
    """a(u,v) = int alpha u'v' + beta u v,  f(v) = -int gamma v.

    With this sign of f the stationarity equation is -(alpha u')' + beta u = gamma.
    Coefficients are numbers or callables (eps, x) -> array.
    """

    alpha: object = 1.0
    beta: object = 0.0
    gamma: object = 0.0

    def __post_init__(self):
        self.alpha, self.beta, self.gamma = _coef(self.alpha), _coef(self.beta), _coef(self.gamma)

    def a(self, u: GridNet, v: GridNet) -> GenNumber:
        out = []
        for k, e in enumerate(u.grid.values):
            s = u.spatial[k]
            x = s.nodes
            uu, vv = u.values[k], v.values[k]
            du, dv = diff_array(uu, s.h, 1), diff_array(vv, s.h, 1)
            out.append(integrate_array(x, self.alpha(e, x) * du * dv + self.beta(e, x) * uu * vv))
        return GenNumber(u.grid, np.array(out))

    def f(self, v: GridNet) -> GenNumber:
        out = [-integrate_array(x, self.gamma(e, x) * vv) for e, x, vv in v.items()]
        return GenNumber(v.grid, np.array(out))

    def energy(self, u: GridNet) -> GenNumber:
        return 0.5 * self.a(u, u) + self.f(u)

    def lagrangian(self) -> Lagrangian:
        al, be, ga = self.alpha, self.beta, self.gamma
        return Lagrangian(
            lambda e, x, J: 0.5 * (al(e, x) * J[1][0] ** 2 + be(e, x) * J[0][0] ** 2) - ga(e, x) * J[0][0],
            order=1,
            partials={0: lambda e, x, J: be(e, x) * J[0][0] - ga(e, x), 1: lambda e, x, J: al(e, x) * J[1][0]},
            name="quadratic",
        )

    def functional(self, domain, boundary="natural") -> Functional:
        return Functional(self.lagrangian(), tuple(domain), boundary)

    def symmetry_defect(self, u: GridNet, v: GridNet) -> float:
        auv, avu = self.a(u, v).samples, self.a(v, u).samples
        scale = 1.0 + np.abs(self.a(u, u).samples) + np.abs(self.a(v, v).samples)
        return float(np.max(np.abs(auv - avu) / scale))


def quadratic_stationarity(Q: QuadraticForm, u: GridNet, tests, tol: float = TOL_WEAK) -> AssocVerdict:
    """lim (a(u, phi) + f(phi)) = 0 for every test phi."""
    limits, ok, conv = [], True, True
    tail = u.grid.tail
    e = u.grid.values[tail]
    for j, phi in enumerate(tests):
        pn = u.map(lambda eps, x, v, p=phi: p(x))
        d = (Q.a(u, pn) + Q.f(pn)).samples[tail]
        lim, c = _limit(e, d, tol)
        limits.append({"test": j, "limit": lim, "converged": c})
        conv &= c
        ok &= abs(lim) <= tol
    worst = max(abs(x["limit"]) for x in limits)
    verdict = "pass" if ok and conv else ("fail" if conv else "Indeterminate")
    return AssocVerdict(verdict, limits, worst)


@dataclass
class BVPResult:
    solution: GridNet
    residual: GridNet
    residual_report: AsymptoticReport
    budget: np.ndarray

    def to_dict(self) -> dict:
        return {"residual": self.residual_report.to_dict(), "budget": self.budget.tolist()}


def _solve_slice(Q: QuadraticForm, e: float, s: SpatialGrid, u0) -> np.ndarray:
    x, h = s.nodes, s.h
    al = Q.alpha(e, x)
    if np.any(al < 1e-14):
        raise DegenerateError(f"alpha falls below 1e-14 at eps={e!r}")
    face = 2 * al[:-1] * al[1:] / (al[:-1] + al[1:])
    be, ga = Q.beta(e, x), Q.gamma(e, x)
    n = len(x)
    ab = np.zeros((3, n))
    rhs = ga * h * h
    ab[1, 1:-1] = face[:-1] + face[1:] + be[1:-1] * h * h
    ab[0, 2:] = -face[1:]
    ab[2, :-2] = -face[:-1]
    ab[1, 0] = ab[1, -1] = 1.0
    rhs = rhs.copy()
    rhs[0], rhs[-1] = u0
    try:
        return solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateError(f"singular system at eps={e!r}") from exc


def solve_quadratic_bvp(Q: QuadraticForm, grid: EpsGrid, domain=(0.0, 1.0), u0=(0.0, 0.0),
                        base_n: int = 401, spatial=None) -> BVPResult:
    """Solve -(alpha u')' + beta u = gamma with Dirichlet data per eps (conservative second-order scheme)."""
    a, b = domain
    if spatial is None:
        spatial = tuple(resolved_grid(a, b, float(e), base_n) for e in grid.values)
    sols = tuple(_solve_slice(Q, float(e), s, u0) for e, s in zip(grid.values, spatial))
    u = GridNet(grid, tuple(spatial), sols)
    res_vals, budget = [], []
    for k, e in enumerate(grid.values):
        s = spatial[k]
        x, v = s.nodes, sols[k]
        flux = Q.alpha(e, x) * diff_array(v, s.h, 1)
        r = -diff_array(flux, s.h, 1) + Q.beta(e, x) * v - Q.gamma(e, x)
        res_vals.append(r)
        budget.append(10 * s.h**2 / 12 * float(np.max(np.abs(diff_array(flux, s.h, 3)))) + 1e3 * MACHEPS * float(np.max(np.abs(flux))) / s.h)
    res = GridNet(grid, tuple(spatial), tuple(res_vals))
    sub = interior(domain, 0.0)
    budget = np.array(budget)
    rep = classify_samples(grid.values, res.sup(sub).samples, floor=budget)
    return BVPResult(u, res, rep, budget)
