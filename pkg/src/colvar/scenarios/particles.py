"""Particle motion in singular potentials and geodesics of eps-dependent metrics."""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from ..asymptotics import classify_samples
from ..calculus import DEFAULT_MOLLIFIER, _GL, convolve, make_delta
from ..nets import EpsGrid, GenMatrix, GridNet, NetError, SpatialGrid, eps_map
from ..asymptotics import classify_definiteness
from ..symmetry import (
    SIGN,
    Trajectory,
    central_lagrangian,
    conservation_drift,
    noether_current,
    noether_identity_check,
    particle_lagrangian,
    sample_jets,
    time_translation,
    translation,
)
from ..variational import Functional, Lagrangian, euler_residual
from . import ScenarioResult, per_eps

RTOL = 1e-10


def particle_grid() -> EpsGrid:
    """2^-3 ... 2^-10."""
    return EpsGrid(2.0 ** -np.arange(3, 11), spacing="dyadic")


def _bump_prime(y):
    """Derivative of the normalized bump."""
    y = np.asarray(y, float)
    out = np.zeros_like(y)
    m = np.abs(y) < 1
    ym = y[m]
    out[m] = DEFAULT_MOLLIFIER(ym) * (-2.0 * ym / (1.0 - ym**2) ** 2)
    return out


_C8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _fd8(f, x, h):
    x = np.asarray(x, float)
    return sum(c * f(x + (k - 4) * h) for k, c in enumerate(_C8) if c != 0.0) / h


def _segments_ivp(rhs, y0, T, inner, vmax, eps, box, rtol=RTOL):
    """Integrate with a step cap while |y[0]| <= inner; returns (t, Y, dense pieces)."""
    t, y = 0.0, np.asarray(y0, float)
    inside = abs(y[0]) < inner
    ts, ys, pieces = [np.array([0.0])], [y[:, None]], []

    side = [1.0]

    def cross(_, s):
        # signed outside, so a long free step cannot jump over the support
        return abs(s[0]) - inner if inside else side[0] * s[0] - inner

    def escape(_, s):
        return abs(s[0]) - box

    cross.terminal = True
    escape.terminal = True
    escape.direction = 1
    while t < T:
        cross.direction = 1 if inside else -1
        side[0] = 1.0 if y[0] >= 0 else -1.0
        cap = eps / (8 * vmax) if inside else np.inf
        sol = solve_ivp(rhs, (t, T), y, method="DOP853", rtol=rtol, atol=rtol, events=(cross, escape),
                        max_step=cap, dense_output=True)
        if not sol.success:
            raise NetError(f"integration failed at eps={eps!r}: {sol.message}")
        if sol.t_events[1].size:
            raise NetError(f"trajectory left the box |x| <= {box} at eps={eps!r}")
        ts.append(sol.t[1:])
        ys.append(sol.y[:, 1:])
        pieces.append((t, sol.t[-1], sol.sol))
        if sol.status == 1 and sol.t_events[0].size:
            t, y = float(sol.t_events[0][0]), sol.y_events[0][0]
            inside = not inside
        else:
            t = T
    return np.concatenate(ts), np.concatenate(ys, axis=1), pieces


def _dense(pieces, t):
    out = np.empty((len(pieces[0][2](0.0 + pieces[0][0])), len(t)))
    for k, tt in enumerate(t):
        for a, b, f in pieces:
            if a <= tt <= b:
                out[:, k] = f(tt)
                break
    return out


def delta_particle(x0: float = 1.0, y0: float = -2.0, delta=None, grid: EpsGrid | None = None, T: float = 2.0,
                   window: float = 0.1, box: float = 10.0, shadow_tol: float = 0.02, n_eval: int = 2001) -> ScenarioResult:
    """x'' = -D_eps'(x) with a delta potential D_eps, compared with sign(x0)|x0 + t y0|."""
    if x0 == 0:
        raise NetError("x0 must be nonzero")
    grid = grid or particle_grid()
    delta = delta or make_delta("model", grid)
    if delta.kind == "model" and delta.x0 == 0.0 and delta.weight == 1.0:
        dD = lambda e, x: _bump_prime(np.asarray(x, float) / e) / e**2
    else:
        dD = lambda e, x: _fd8(lambda z: delta(e, z), x, e * 1e-3)
    D = lambda e, x: delta(e, x)
    L = particle_lagrangian(D, dD)
    P = noether_current(L, time_translation())
    t_eval = np.linspace(0.0, T, n_eval)
    shadow_curve = math.copysign(1.0, x0) * np.abs(x0 + t_eval * y0)
    t_star = -x0 / y0 if y0 != 0 else np.inf
    mask = np.abs(t_eval - t_star) >= window

    def one(k):
        e = float(grid.values[k])
        inner = 2 * delta.support(e) + abs(delta.x0)
        probe = np.linspace(-inner, inner, 801)
        vmax = math.sqrt(y0**2 + 2 * (float(D(e, x0)) + float(np.max(np.abs(D(e, probe))))))
        vmax = max(vmax, 1e-12)
        rhs = lambda _, s: np.array([s[1], -float(dD(e, np.array([s[0]]))[0])])
        t, Y, pieces = _segments_ivp(rhs, [x0, y0], T, inner, vmax, e, box)
        Xe = _dense(pieces, t_eval)
        return t, Y, Xe

    runs = eps_map(one, range(len(grid)))
    samples, tables, sup = [], [], []
    for e, (t, Y, Xe) in zip(grid.values, runs):
        samples.append((t, Y[0][None, :], Y[1][None, :]))
        tables.append((float(e), {"t": t_eval, "x": Xe[0], "v": Xe[1]}))
        sup.append(float(np.max(np.abs(Xe[0] - shadow_curve)[mask])))
    drift = conservation_drift(P, Trajectory(grid, samples, RTOL))
    sup = np.array(sup)
    last4 = sup[-4:]
    checks = {
        "shadow_sup": bool(sup[-1] <= shadow_tol),
        "shadow_monotone": bool(np.all(np.diff(last4) < 0)) if y0 != 0 else True,
        "energy_drift": bool(drift.max_drift <= 10 * RTOL),
    }
    return ScenarioResult(
        "delta_particle",
        {"trajectory": tables},
        {"shadow_distance": classify_samples(grid.values, sup).to_dict(), "delta": dict(delta.checks)},
        {"target": "sign(x0)|x0 + t y0|", "window": window, "t_star": float(t_star) if np.isfinite(t_star) else None,
         "sup_distance": per_eps(grid, sup), "tolerance": shadow_tol},
        {"energy": drift.to_dict()},
        {"x0": x0, "y0": y0, "T": T, "window": window, "box": box, "rtol": RTOL, "delta": delta.kind,
         "grid": grid.to_dict()},
        checks,
    )


# ---------------------------------------------------------------------------
# central field
# ---------------------------------------------------------------------------


def regularized_coulomb(strength: float = 1.0):
    """V_eps = -(g * rho_eps) with g(r) = strength / max(|r|, eps); returns (V, dV)."""
    t, w = _GL[96]
    wr = w * DEFAULT_MOLLIFIER(t)

    def g(e, r):
        return strength / np.maximum(np.abs(r), e)

    def dg(e, r):
        a = np.abs(r)
        return np.where(a > e, -strength * np.sign(r) / np.maximum(a, e) ** 2, 0.0)

    def V(e, r):
        r = np.asarray(r, float)
        return -(g(e, r[..., None] - e * t) @ wr)

    def dV(e, r):
        r = np.asarray(r, float)
        return -(dg(e, r[..., None] - e * t) @ wr)

    return V, dV


def _zero_potential():
    return (lambda e, r: np.zeros_like(np.asarray(r, float)), lambda e, r: np.zeros_like(np.asarray(r, float)))


def central_field(m: float = 1.0, potential: str = "coulomb", r0: float = 1.0, rdot0: float = 0.0,
                  phidot0: float | None = None, T: float | None = None, grid: EpsGrid | None = None,
                  n_jets: int = 200) -> ScenarioResult:
    """(r, phi) Euler-Lagrange system of L = m/2 (r'^2 + r^2 phi'^2) - V_eps(r)."""
    if r0 <= 0:
        raise NetError("r(0) must be positive")
    grid = grid or EpsGrid(np.array([1e-1, 3e-2, 1e-2, 3e-3, 1e-3]))
    V, dV = regularized_coulomb() if potential == "coulomb" else _zero_potential()
    circular = phidot0 is None
    if circular and potential != "coulomb":
        raise NetError("a circular orbit needs an attracting potential")
    L = central_lagrangian(V, dV, m)
    rot = translation(2, 1)
    P_ang = noether_current(L, rot)
    P_en = noether_current(L, time_translation(2))
    tables, samples, rvar, line_err, periods = [], [], [], [], []
    for e in grid.values:
        e = float(e)
        w0 = math.sqrt(float(dV(e, r0)) / (m * r0)) if circular else float(phidot0)
        Te = (2 * math.pi / w0 if circular else 1.0) if T is None else T
        periods.append(Te)

        def rhs(_, s):
            r, ph, rd, pd = s
            if r <= 0:
                raise NetError("collapse r -> 0")
            return [rd, pd, r * pd**2 - float(dV(e, r)) / m, -2 * rd * pd / r]

        collapse = lambda _, s: s[0] - e
        collapse.terminal = True
        sol = solve_ivp(rhs, (0.0, Te), [r0, 0.0, rdot0, w0], method="DOP853", rtol=RTOL, atol=RTOL,
                        events=collapse, dense_output=True)
        if sol.t_events[0].size:
            raise NetError(f"collapse towards r = 0 at eps={e!r}, t={sol.t_events[0][0]!r}")
        X, Vv = sol.y[:2], sol.y[2:]
        samples.append((sol.t, X, Vv))
        tables.append((e, {"t": sol.t, "r": X[0], "phi": X[1], "rdot": Vv[0], "phidot": Vv[1]}))
        rvar.append(float(np.max(np.abs(X[0] - r0))))
        if potential != "coulomb":
            tt = sol.t
            px, py, vx, vy = r0, 0.0, rdot0, r0 * w0
            xa, ya = px + vx * tt, py + vy * tt
            line_err.append(max(float(np.max(np.abs(X[0] - np.hypot(xa, ya)))),
                                float(np.max(np.abs(X[1] - np.unwrap(np.arctan2(ya, xa)))))))
    ang = conservation_drift(P_ang, Trajectory(grid, samples, RTOL))
    en = conservation_drift(P_en, Trajectory(grid, samples, RTOL))
    jets = sample_jets(2, 2, n=n_jets, ranges=[[(0.5, 2.0), (-np.pi, np.pi)], [(-1, 1), (-1, 1)], [(-1, 1), (-1, 1)]])
    ident = noether_identity_check(P_ang, grid, jets)
    checks = {"angular_momentum_drift": ang.max_drift <= 1e-8, "noether_identity": ident.holds}
    shadow = {}
    if circular:
        checks["circular_orbit"] = max(rvar) <= 1e-6
        shadow["radius_deviation"] = per_eps(grid, rvar)
    elif potential != "coulomb":
        checks["straight_line"] = max(line_err) <= 1e-8
        shadow["straight_line_error"] = per_eps(grid, line_err)
    return ScenarioResult(
        "central_field",
        {"orbit": tables},
        {"noether_identity": ident.to_dict(), "angular_momentum_drift": ang.report.to_dict()},
        shadow,
        {"angular_momentum": ang.to_dict(), "energy": en.to_dict(), "current_sign": SIGN},
        {"m": m, "potential": potential, "r0": r0, "rdot0": rdot0, "phidot0": phidot0,
         "T_per_epsilon": per_eps(grid, periods), "rtol": RTOL, "grid": grid.to_dict()},
        checks,
    )


# ---------------------------------------------------------------------------
# geodesics
# ---------------------------------------------------------------------------


def christoffel(metric, e: float, x: np.ndarray, step: float) -> np.ndarray:
    """Gamma[k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij), 8th-order differences.

    ``metric(e, X)`` maps points of shape (..., n) to matrices (..., n, n).
    """
    x = np.asarray(x, float)
    n = len(x)
    offs = np.arange(-4, 5) * step
    pts = np.repeat(x[None, None, :], n, axis=0).repeat(9, axis=1)  # (l, k, n)
    for l in range(n):
        pts[l, :, l] += offs
    G = np.asarray(metric(e, pts), float)  # (l, k, n, n)
    dg = np.einsum("k,lkij->lij", _C8, G) / step  # dg[l] = d_l g
    gi = np.linalg.inv(G[0, 4])
    low = 0.5 * (dg.transpose(2, 0, 1) + dg.transpose(2, 1, 0) - dg)  # low[l, i, j]
    return np.einsum("kl,lij->kij", gi, low)


def euclidean_metric(dim: int = 2):
    return lambda e, X: np.broadcast_to(np.eye(dim), np.shape(X) + (dim,)).copy()


def polar_metric():
    def g(e, X):
        X = np.asarray(X, float)
        out = np.zeros(X.shape + (2,))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = X[..., 0] ** 2
        return out

    return g


def conformal_metric(scale: float = 0.5):
    """g = exp(2 lambda) I, lambda = scale * (|.| * rho_eps)(x_1)."""

    def lam(e, s):
        s = np.atleast_1d(np.asarray(s, float))
        out = scale * np.abs(s)
        near = np.abs(s) < e
        if np.any(near):
            out[near] = scale * convolve(np.abs, [0.0], DEFAULT_MOLLIFIER, e, s[near])
        return out

    def g(e, X):
        X = np.asarray(X, float)
        lv = lam(e, X[..., 0]).reshape(X.shape[:-1])
        return np.exp(2 * lv)[..., None, None] * np.eye(2)

    g.lam = lam
    return g


METRICS = {"euclidean": euclidean_metric, "polar": polar_metric, "conformal": conformal_metric}


def metric_gradient(metric, e: float, X: np.ndarray, step: float) -> np.ndarray:
    """d_l g_ij at points X of shape (m, n); result (m, n, n, n) indexed [point, l, i, j]."""
    X = np.asarray(X, float)
    n = X.shape[1]
    out = np.zeros((X.shape[0], n, n, n))
    for l in range(n):
        for k, c in enumerate(_C8):
            if c != 0.0:
                Y = X.copy()
                Y[:, l] += (k - 4) * step
                out[:, l] += c * np.asarray(metric(e, Y), float)
    return out / step


def energy_lagrangian(metric) -> Lagrangian:
    """L = 1/2 g_ij(x) x'^i x'^j along curves t -> x(t); metric derivatives by 8th-order differences."""

    def p0(e, t, J):
        dg = metric_gradient(metric, e, J[0].T, min(1e-3, e / 128))
        return 0.5 * np.einsum("klij,ik,jk->lk", dg, J[1], J[1])

    def dens(e, t, J):
        G = metric(e, J[0].T)
        return 0.5 * np.einsum("ki,kij,kj->k", J[1].T, G, J[1].T)

    def p1(e, t, J):
        G = metric(e, J[0].T)
        return np.einsum("kij,kj->ik", G, J[1].T)

    return Lagrangian(dens, 1, 2, {0: p0, 1: p1}, name="energy")


def geodesic_energy(metric: str = "conformal", x0=(-0.5, 0.0), v0=(1.0, 0.3), T: float = 1.0,
                    grid: EpsGrid | None = None, rtol: float = 1e-12, residual_tol: float = 1e-6,
                    resolution: int = 64, box: float = 100.0) -> ScenarioResult:
    """x''^k + Gamma^k_ij x'^i x'^j = 0 with numerically differentiated metric."""
    grid = grid or EpsGrid(np.array([1e-1, 3e-2, 1e-2, 3e-3, 1e-3]))
    g = METRICS[metric]()
    x0, v0 = np.asarray(x0, float), np.asarray(v0, float)
    pts = x0 + np.linspace(0, 1, 5)[:, None] * v0 * T
    defin = []
    for p in pts:
        A = GenMatrix(grid, np.array([g(float(e), p) for e in grid.values]))
        defin.append(classify_definiteness(A))
    if any(c != "PositiveDefinite" for c in defin):
        raise NetError(f"metric not positive definite along the initial segment: {defin}")
    L = energy_lagrangian(g)
    speed = 2.0 * float(np.linalg.norm(v0))

    def one(k):
        e = float(grid.values[k])
        hs = min(1e-3, e / 128)

        def rhs(_, y):
            G = christoffel(g, e, y[:2], hs)
            return np.concatenate([y[2:], -np.einsum("kij,i,j->k", G, y[2:], y[2:])])

        # step cap across the layer |x_1| < 2 eps where the metric varies on the eps scale
        _, _, pieces = _segments_ivp(rhs, np.concatenate([x0, v0]), T, 2 * e, speed, e, box, rtol)
        n = max(int(math.ceil(T * resolution * speed / e)) + 1, 401) | 1
        sp = SpatialGrid(0.0, T, n)
        return sp, _dense(pieces, sp.nodes)

    runs = eps_map(one, range(len(grid)))
    spatial = tuple(sp for sp, _ in runs)
    tables = [(float(e), {"t": sp.nodes, "x1": Y[0], "x2": Y[1], "v1": Y[2], "v2": Y[3]})
              for e, (sp, Y) in zip(grid.values, runs)]
    # tolerance plus interpolation noise amplified by one difference quotient
    pmax = np.array([float(np.max(np.abs(L.partial(1, float(e), sp.nodes, [Y[:2], Y[2:]]))))
                     for e, (sp, Y) in zip(grid.values, runs)])
    floor = residual_tol * (1.0 + pmax) + 100 * rtol * pmax / np.array([sp.h for sp in spatial])
    comps = [GridNet(grid, spatial, tuple(Y[i] for _, Y in runs)) for i in range(2)]
    res = euler_residual(Functional(L, (0.0, T)), comps)
    cut = (8 * spatial[0].h, T - 8 * spatial[0].h)
    res_sup = np.max([r.sup(cut).samples for r in res], axis=0)
    rep = classify_samples(grid.values, res_sup, floor=floor)
    checks = {"euler_residual": rep.negligible}
    extra = {}
    if metric == "polar":
        pt = np.array([1.3, 0.2])
        G = christoffel(g, 1.0, pt, 1e-3)
        err = max(abs(G[0, 1, 1] + pt[0]), abs(G[1, 0, 1] - 1 / pt[0]), abs(G[1, 1, 0] - 1 / pt[0]))
        extra["christoffel_error"] = float(err)
        checks["christoffel_polar"] = err <= 1e-8
    if metric == "euclidean":
        checks["christoffel_zero"] = float(np.max(np.abs(christoffel(g, 1.0, x0, 1e-3)))) <= 1e-12
        line = [float(np.max(np.abs(np.vstack([tb["x1"], tb["x2"]]) - (x0[:, None] + v0[:, None] * tb["t"]))))
                for _, tb in tables]
        checks["straight_lines"] = max(line) <= 1e-8
        extra["line_error"] = per_eps(grid, line)
    return ScenarioResult(
        "geodesic_energy",
        {"geodesic": tables},
        {"euler_residual": rep.to_dict(), "definiteness": defin},
        {"euler_residual_sup": per_eps(grid, res_sup), "floor": per_eps(grid, floor), **extra},
        {},
        {"metric": metric, "x0": x0.tolist(), "v0": v0.tolist(), "T": T, "rtol": rtol, "grid": grid.to_dict()},
        checks,
    )
