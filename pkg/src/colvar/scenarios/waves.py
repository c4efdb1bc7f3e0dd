"""Wave equation on a periodic interval with a nonlinear spring concentrated near one point."""

from __future__ import annotations

import math

import numpy as np

from ..asymptotics import classify_samples
from ..calculus import make_delta
from ..nets import EpsGrid, GridNet, NetError, SpatialGrid
from . import ScenarioResult, per_eps

CFL = 0.4
BLOWUP = 1e6

FORCES = {
    "zero": (lambda u: np.zeros_like(u), lambda u: np.zeros_like(u)),
    "linear": (lambda u: u, lambda u: 0.5 * u**2),
    "cubic": (lambda u: u * u * u, lambda u: 0.25 * (u * u) ** 2),
}


def wave_grid() -> EpsGrid:
    return EpsGrid(np.array([0.8, 0.4, 0.2, 0.1, 0.05, 0.025, 0.008]))


def laplacian4(u: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order periodic second difference."""
    p = np.concatenate([u[-2:], u, u[:2]])
    return (16 * (p[1:-3] + p[3:-1]) - (p[:-4] + p[4:]) - 30 * u) / (12 * h * h)


def _simulate(F, W, dens, n: int, T: float, u0, v0, frames: int):
    """RK4 method of lines on [-1, 1) with n nodes; returns (times, u frames, energies)."""
    h = 2.0 / n
    x = -1.0 + h * np.arange(n)
    dt = CFL * h
    steps = int(math.ceil(T / dt))
    dt = T / steps
    if dt > CFL * h * (1 + 1e-12):
        raise NetError("CFL violation")
    d = dens(x)
    u, v = u0(x).astype(float), v0(x).astype(float)

    def acc(w):
        return laplacian4(w, h) - d * F(w)

    def energy(w, p):
        # -w.L4 w written as a sum of squares: |D+ w|^2 + h^2/12 |D2 w|^2
        dp = (np.roll(w, -1) - w) / h
        d2 = (np.roll(w, -1) - 2 * w + np.roll(w, 1)) / (h * h)
        return float(h * np.sum(0.5 * p**2 + 0.5 * (dp**2 + h * h / 12 * d2**2) + d * W(w)))

    every = max(1, steps // frames)
    ts, us, es = [0.0], [u.copy()], [energy(u, v)]
    for k in range(1, steps + 1):
        k1u, k1v = v, acc(u)
        k2u, k2v = v + 0.5 * dt * k1v, acc(u + 0.5 * dt * k1u)
        k3u, k3v = v + 0.5 * dt * k2v, acc(u + 0.5 * dt * k2u)
        k4u, k4v = v + dt * k3v, acc(u + dt * k3u)
        u = u + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if k % every == 0 or k == steps:
            if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP:
                raise NetError(f"blow-up detected at t={k * dt!r}")
            ts.append(k * dt)
            us.append(u.copy())
            es.append(energy(u, v))
    return x, np.array(ts), np.array(us), np.array(es)


def wave_delta_spring(force: str = "linear", x0: float = 0.3, amplitude: float = 0.5, T: float = 2.0,
                      grid: EpsGrid | None = None, resolution: int = 16, frames: int = 40,
                      drift_tol: float | None = None) -> ScenarioResult:
    """u_tt - u_xx + delta_eps(x - x0) F(u) = 0 on the periodic interval [-1, 1), u(0) = A sin(pi x), u_t(0) = 0."""
    if force not in FORCES:
        raise NetError(f"unknown force {force!r}")
    grid = grid or wave_grid()
    F, W = FORCES[force]
    delta = make_delta("model", grid, x0=x0)
    u0 = lambda x: amplitude * np.sin(np.pi * x)
    v0 = lambda x: np.zeros_like(x)
    tol = drift_tol if drift_tol is not None else (1e-5 if force == "cubic" else 1e-6)
    drift, drift_fine, ratio, dalembert, bounded, profiles, spatial = [], [], [], [], [], [], []
    for e in grid.values:
        e = float(e)
        n = _nodes(e, resolution)
        dens = lambda x, e=e: delta(e, _periodic(x - x0) + x0)
        x, ts, us, es = _simulate(F, W, dens, n, T, u0, v0, frames)
        d1 = float(np.max(np.abs(es - es[0])) / abs(es[0]))
        _, _, _, es2 = _simulate(F, W, dens, 2 * n, T, u0, v0, frames)
        d2 = float(np.max(np.abs(es2 - es2[0])) / abs(es2[0]))
        drift.append(d1)
        drift_fine.append(d2)
        ratio.append(d1 / d2 if d2 > 0 else math.inf)
        bounded.append(float(np.max(np.abs(us))))
        if force == "zero":
            exact = amplitude * np.sin(np.pi * x)[None, :] * np.cos(np.pi * ts)[:, None]
            dalembert.append(float(np.max(np.abs(us - exact))))
        profiles.append((e, {"t": np.repeat(ts, n), "x": np.tile(x, len(ts)), "u": us.ravel()}))
        spatial.append((x, us[-1]))
    drift, drift_fine, ratio = np.array(drift), np.array(drift_fine), np.array(ratio)
    checks = {"energy_drift": bool(np.all(drift <= tol)), "bounded": bool(max(bounded) <= 10 * amplitude + 1.0)}
    if force != "zero":
        # the drift must shrink under refinement unless it already sits at roundoff level
        checks["refinement"] = bool(np.all((ratio >= 8) | (drift <= 1e-12)))
    shadow = {}
    if force == "zero":
        checks["dalembert"] = bool(max(dalembert) <= 1e-6)
        shadow["dalembert_error"] = per_eps(grid, dalembert)
    final = GridNet(grid, tuple(SpatialGrid(-1.0, x[-1], len(x)) for x, _ in spatial), tuple(v for _, v in spatial))
    return ScenarioResult(
        "wave_delta_spring",
        {"frames": profiles, "final": final},
        {"drift": classify_samples(grid.values, drift).to_dict()},
        shadow,
        {"energy": {"relative_drift": per_eps(grid, drift), "relative_drift_refined": per_eps(grid, drift_fine),
                    "refinement_ratio": per_eps(grid, ratio), "tolerance": tol}},
        {"force": force, "x0": x0, "amplitude": amplitude, "T": T, "resolution": resolution, "cfl": CFL,
         "grid": grid.to_dict()},
        checks,
    )


def _nodes(e: float, resolution: int, base: int = 200) -> int:
    n = max(base, int(math.ceil(2.0 * resolution / e)))
    return n + (n % 2)


def _periodic(y):
    return (np.asarray(y, float) + 1.0) % 2.0 - 1.0
