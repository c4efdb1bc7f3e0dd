"""Projectable vector fields on jet space: prolongation, the infinitesimal symmetry
criterion and conserved currents of first-order Lagrangians.

Every derivative here is numeric.  Partials in jet coordinates use an
eighth-order central stencil; total derivatives are assembled by the chain rule
on the jet, so nothing symbolic is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .asymptotics import AsymptoticReport, classify_samples
from .nets import EpsGrid, GenNumber, NetError
from .variational import Lagrangian

SEED = 0x5EED
N_JETS = 200
# eighth-order central first derivative, offsets 1..4
_C8 = np.array([4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _step(z) -> np.ndarray:
    return 1e-3 * (1.0 + np.abs(z))


def d_dx(F: Callable, eps, x, J) -> np.ndarray:
    h = _step(x)
    out = 0.0
    for j, c in enumerate(_C8, 1):
        out = out + c * (np.asarray(F(eps, x + j * h, J)) - np.asarray(F(eps, x - j * h, J)))
    return out / h


def d_dJ(F: Callable, k: int, i: int, eps, x, J) -> np.ndarray:
    h = _step(J[k][i])
    out = 0.0
    for j, c in enumerate(_C8, 1):
        Jp = [a.copy() for a in J]
        Jm = [a.copy() for a in J]
        Jp[k][i] = Jp[k][i] + j * h
        Jm[k][i] = Jm[k][i] - j * h
        out = out + c * (np.asarray(F(eps, x, Jp)) - np.asarray(F(eps, x, Jm)))
    return out / h


def total_derivative(F: Callable, depth: int) -> Callable:
    """D_x F for F depending on jets up to order ``depth``; result needs order depth+1."""

    def DF(eps, x, J):
        out = d_dx(F, eps, x, J)
        for k in range(depth + 1):
            for i in range(J[0].shape[0]):
                out = out + J[k + 1][i] * d_dJ(F, k, i, eps, x, J)
        return out

    return DF


def pad_jet(J: Sequence[np.ndarray], order: int) -> list[np.ndarray]:
    J = [np.asarray(a, float) for a in J]
    while len(J) < order + 1:
        J.append(np.zeros_like(J[0]))
    return J


@dataclass
class VectorField:
    """v = xi(x) d/dx + sum_a psi_a(x, u) d/du_a (projectable by construction)."""

    xi: Callable  # x -> array
    psi: Sequence[Callable]  # (x, u) -> array, u has shape (q, m)
    name: str = ""

    @property
    def ncomp(self) -> int:
        return len(self.psi)

    def xi_at(self, x) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.xi(np.asarray(x, float)), float), np.shape(x))

    def div_xi(self, x) -> np.ndarray:
        return d_dx(lambda e, y, J: self.xi_at(y), 0.0, np.asarray(x, float), None)

    def to_dict(self) -> dict:
        return {"name": self.name, "components": self.ncomp}


def characteristics(v: VectorField) -> Callable:
    """Q(eps, x, J) with shape (q, m): Q_a = psi_a - xi u_a'."""

    def Q(eps, x, J):
        xi = v.xi_at(x)
        return np.array([np.broadcast_to(p(x, J[0]), np.shape(x)) - xi * J[1][a] for a, p in enumerate(v.psi)])

    return Q


@dataclass
class ProlongedField:
    base: VectorField
    order: int
    coefficients: dict  # (k, a) -> callable(eps, x, J), J of order >= k + 1

    def coefficient(self, k: int, a: int, eps, x, J) -> np.ndarray:
        return self.coefficients[(k, a)](eps, x, pad_jet(J, k + 1))

    def apply(self, F: Callable, eps, x, J) -> np.ndarray:
        """pr v (F) for F depending on jets up to self.order."""
        J = pad_jet(J, self.order + 1)
        out = self.base.xi_at(x) * d_dx(F, eps, x, J)
        for k in range(self.order + 1):
            for a in range(self.base.ncomp):
                out = out + self.coefficient(k, a, eps, x, J) * d_dJ(F, k, a, eps, x, J)
        return out


def prolong(v: VectorField, n: int) -> ProlongedField:
    """psi^(k)_a = D^k Q_a + xi u_a^(k+1), k = 1..n."""
    if n > 2:
        raise NetError("prolongation is implemented up to order 2")
    Q = characteristics(v)
    coefs = {}
    for a in range(v.ncomp):
        coefs[(0, a)] = lambda eps, x, J, a=a: np.broadcast_to(v.psi[a](x, J[0]), np.shape(x))
        Fk = lambda eps, x, J, a=a: Q(eps, x, J)[a]
        for k in range(1, n + 1):
            Fk = total_derivative(Fk, k)
            coefs[(k, a)] = lambda eps, x, J, F=Fk, k=k, a=a: F(eps, x, J) + v.xi_at(x) * J[k + 1][a]
    return ProlongedField(v, n, coefs)


def taylor_check(pv: ProlongedField, jets_x, jets_J, eps: float = 0.0) -> float:
    """Worst relative gap between prolongation coefficients and derivatives of Q along Taylor curves.

    At a jet (x0, u^(j)) the polynomial u(x) = sum u^(j) (x-x0)^j / j! realizes it; D^k Q at x0 is
    then the ordinary k-th derivative of x -> Q(x, u(x), u'(x)).
    """
    v = pv.base
    Q = characteristics(v)
    n = pv.order
    top = n + 2
    J = pad_jet(jets_J, top)
    from math import factorial

    def curve_jet(x0, y):
        # derivatives of the Taylor polynomial at x0 + y
        out = []
        for d in range(top + 1):
            s = 0.0
            for j in range(d, top + 1):
                s = s + J[j] * (y ** (j - d)) / factorial(j - d)
            out.append(s)
        return out

    worst = 0.0
    for k in range(1, n + 1):
        # k-th derivative of q(y) = Q(x0+y, curve) at y=0 by central differences on a small stencil
        h = 2e-3
        offs = np.arange(-4, 5)
        from .calculus import fornberg

        w = fornberg(0.0, offs * h, k)
        qk = sum(wj * Q(eps, jets_x + o * h, curve_jet(jets_x, o * h)) for wj, o in zip(w, offs))
        for a in range(v.ncomp):
            direct = qk[a] + v.xi_at(jets_x) * J[k + 1][a]
            rec = pv.coefficient(k, a, eps, jets_x, J)
            worst = max(worst, float(np.max(np.abs(direct - rec) / (1.0 + np.abs(direct)))))
    return worst


# ---------------------------------------------------------------------------
# jets, criterion, currents
# ---------------------------------------------------------------------------


def sample_jets(ncomp: int, order: int, n: int = N_JETS, seed: int = SEED, x_range=(-1.0, 1.0), ranges=None):
    """Uniform random jets; ranges[k][a] = (lo, hi) for u_a^(k), default (-1, 1)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(*x_range, n)
    J = []
    for k in range(order + 1):
        rows = []
        for a in range(ncomp):
            lo, hi = (ranges[k][a] if ranges is not None else (-1.0, 1.0))
            rows.append(rng.uniform(lo, hi, n))
        J.append(np.array(rows))
    return x, J


@dataclass
class CriterionResult:
    verdict: str
    residual: GenNumber
    report: AsymptoticReport
    floor: np.ndarray

    @property
    def holds(self) -> bool:
        return self.verdict in ("Symmetry", "pass")

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "class": self.report.label,
                "worst_residual": [{"epsilon": float(e), "value": float(v)} for e, v in zip(self.residual.eps, self.residual.samples)]}


def _verdict(grid: EpsGrid, worst, scale, rtol, yes, no) -> CriterionResult:
    floor = rtol * (1.0 + np.asarray(scale))
    rep = classify_samples(grid.values, worst, floor=floor)
    return CriterionResult(yes if rep.negligible else no, GenNumber(grid, np.asarray(worst)), rep, floor)


def infinitesimal_criterion(L: Lagrangian, v: VectorField, grid: EpsGrid, jets=None, rtol: float = 1e-8) -> CriterionResult:
    """pr v (L) + L Div xi over sample jets; Symmetry iff its worst value is negligible."""
    x, J = jets if jets is not None else sample_jets(L.ncomp, L.order)
    pv = prolong(v, L.order)
    worst, scale = [], []
    for e in grid.values:
        Lv = L(float(e), x, J)
        r = pv.apply(L, float(e), x, J) + Lv * v.div_xi(x)
        worst.append(float(np.max(np.abs(r))))
        scale.append(float(np.max(np.abs(Lv))))
    return _verdict(grid, worst, scale, rtol, "Symmetry", "NotSymmetry")


def _calibrate_sign() -> float:
    free = Lagrangian(lambda e, x, J: 0.5 * J[1][0] ** 2)
    t = VectorField(lambda x: np.ones_like(x), [lambda x, u: np.zeros_like(u[0])])
    x = np.array([0.3])
    J = [np.array([[0.2]]), np.array([[0.7]]), np.array([[-1.3]])]
    P = noether_current(free, t, sign=1.0)
    div = total_derivative(P, 1)(0.0, x, J)
    qe = np.sum(characteristics(t)(0.0, x, J) * euler_operator(free)(0.0, x, J), axis=0)
    return float(np.sign(div[0] / qe[0]))


@dataclass
class NoetherCurrent:
    lagrangian: Lagrangian
    field: VectorField
    sign: float
    drop_xi_L: bool = False

    def __call__(self, eps, x, J) -> np.ndarray:
        L, v = self.lagrangian, self.field
        Q = characteristics(v)(eps, x, J)
        out = np.sum(Q * np.array([L.partial(1, eps, x, J)[a] for a in range(L.ncomp)]), axis=0)
        if not self.drop_xi_L:
            out = out + v.xi_at(x) * L(eps, x, J)
        return out


def noether_current(L: Lagrangian, v: VectorField, sign: float | None = None) -> NoetherCurrent:
    """P = sum_a psi_a dL/du_a' + xi L - xi sum_a u_a' dL/du_a'."""
    if L.order != 1:
        raise NetError("currents are implemented for first-order Lagrangians")
    return NoetherCurrent(L, v, SIGN if sign is None else sign)


def euler_operator(L: Lagrangian) -> Callable:
    """E_a(L) = dL/du_a - D_x dL/du_a' on jets of order 2."""

    def E(eps, x, J):
        out = []
        for a in range(L.ncomp):
            p1 = lambda e, y, K, a=a: L.partial(1, e, y, K)[a]
            out.append(L.partial(0, eps, x, J)[a] - total_derivative(p1, 1)(eps, x, J))
        return np.array(out)

    return E


def noether_identity_check(P: NoetherCurrent, grid: EpsGrid, jets=None, rtol: float = 1e-8) -> CriterionResult:
    """Div P - sign * Q . E(L) over sample jets of order 2."""
    L, v = P.lagrangian, P.field
    x, J = jets if jets is not None else sample_jets(L.ncomp, 2)
    J = pad_jet(J, 2)
    Q = characteristics(v)
    E = euler_operator(L)
    worst, scale = [], []
    for e in grid.values:
        div = total_derivative(P, 1)(float(e), x, J)
        qe = np.sum(Q(float(e), x, J) * E(float(e), x, J), axis=0)
        worst.append(float(np.max(np.abs(div - P.sign * qe))))
        scale.append(float(np.max(np.abs(div) + np.abs(qe))))
    return _verdict(grid, worst, scale, rtol, "pass", "fail")


# ---------------------------------------------------------------------------
# conservation along trajectories
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Per-eps samples (t, X, V): X and V have shape (q, m)."""

    grid: EpsGrid
    samples: list
    tolerance: float

    def __post_init__(self):
        if len(self.samples) != len(self.grid):
            raise NetError("one trajectory per eps is required")


@dataclass
class DriftReport:
    drift: GenNumber
    max_drift: float
    report: AsymptoticReport
    tolerance: float

    def to_dict(self) -> dict:
        return {"max_relative_drift": self.max_drift, "solver_tolerance": self.tolerance, "class": self.report.label,
                "per_epsilon": [{"epsilon": float(e), "drift": float(v)} for e, v in zip(self.drift.eps, self.drift.samples)]}


def conservation_drift(P: Callable, traj: Trajectory) -> DriftReport:
    """max_t |P(t) - P(t0)| / (1 + |P(t0)|) per eps."""
    d = []
    for e, (t, X, V) in zip(traj.grid.values, traj.samples):
        vals = np.asarray(P(float(e), np.asarray(t), [np.asarray(X), np.asarray(V)]), float)
        d.append(float(np.max(np.abs(vals - vals[0])) / (1.0 + abs(vals[0]))))
    g = GenNumber(traj.grid, np.array(d))
    return DriftReport(g, float(np.max(d)), classify_samples(traj.grid.values, d), traj.tolerance)


SIGN = _calibrate_sign()


# ---------------------------------------------------------------------------
# standard fields and Lagrangians
# ---------------------------------------------------------------------------


def time_translation(q: int = 1) -> VectorField:
    return VectorField(lambda x: np.ones_like(x), [lambda x, u: np.zeros_like(u[0])] * q, "d/dt")


def translation(q: int = 1, a: int = 0) -> VectorField:
    psi = [(lambda x, u: np.ones_like(u[0])) if i == a else (lambda x, u: np.zeros_like(u[0])) for i in range(q)]
    return VectorField(lambda x: np.zeros_like(x), psi, f"d/du{a}")


def particle_lagrangian(V: Callable, dV: Callable | None = None, m: float = 1.0) -> Lagrangian:
    """L = m/2 x'^2 - V_eps(x) in one space dimension, time as the independent variable."""
    parts = {1: lambda e, t, J: m * J[1][0]}
    if dV is not None:
        parts[0] = lambda e, t, J: -dV(e, J[0][0])
    return Lagrangian(lambda e, t, J: 0.5 * m * J[1][0] ** 2 - V(e, J[0][0]), 1, 1, parts, name="particle")


def central_lagrangian(V: Callable, dV: Callable | None = None, m: float = 1.0) -> Lagrangian:
    """L = m/2 (r'^2 + r^2 phi'^2) - V_eps(r), components (r, phi)."""
    parts = {1: lambda e, t, J: np.array([m * J[1][0], m * J[0][0] ** 2 * J[1][1]])}
    if dV is not None:
        parts[0] = lambda e, t, J: np.array([m * J[0][0] * J[1][1] ** 2 - dV(e, J[0][0]), np.zeros_like(J[0][1])])
    dens = lambda e, t, J: 0.5 * m * (J[1][0] ** 2 + J[0][0] ** 2 * J[1][1] ** 2) - V(e, J[0][0])
    return Lagrangian(dens, 1, 2, parts, name="central")
