"""Asymptotic classification of eps-nets on a finite eps grid.

"For eps small" is read as "on the tail of the grid" (its smallest half).
A bound ``|v_eps| <= C eps^k`` with an unknown constant is tested through the
ratio ``r_eps = |v_eps| / eps^k``: the bound is accepted when no tail sample of
``r`` sets a new record against every larger eps of the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _spi

from .nets import GenMatrix, GenNumber, GridNet, NetError, fmt

M_MAX = 8
N_MAX = 12
ALPHA_MAX = 2
FLOOR = 1e-300
TOL_ASSOC = 1e-6
TOL_WEAK = 1e-3
# log-slack allowed when comparing ratio records
RECORD_SLACK = 1e-3

NEGLIGIBLE = "Negligible"
MODERATE = "Moderate"
NON_MODERATE = "NonModerate"


@dataclass
class AsymptoticReport:
    cls: str
    N: int | None
    slope: float
    r2: float
    witness: float
    eps: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    exponents: dict = field(default_factory=dict)

    @property
    def negligible(self) -> bool:
        return self.cls == NEGLIGIBLE

    @property
    def label(self) -> str:
        return f"Moderate({self.N})" if self.cls == MODERATE else self.cls

    def to_dict(self) -> dict:
        return {
            "class": self.label,
            "N": self.N,
            "slope": self.slope,
            "r2": self.r2,
            "witness_epsilon": self.witness,
            "exponents": self.exponents,
            "per_epsilon": [{"epsilon": float(e), "value": float(v)} for e, v in zip(self.eps, self.values)],
        }


def _records_ok(logr: np.ndarray, start: int) -> bool:
    """True if logr[j] never beats max(logr[:j]) by more than the slack for j >= start."""
    run = np.maximum.accumulate(logr)
    prev = np.concatenate([[-np.inf], run[:-1]])
    return bool(np.all(logr[start:] <= prev[start:] + RECORD_SLACK))


def fit_slope(eps: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and r^2 of log|v| against log eps (values clamped at FLOOR)."""
    x = np.log(eps)
    y = np.log(np.maximum(np.abs(vals), FLOOR))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss == 0 else 1.0 - float(np.sum(resid**2)) / ss
    return float(coef[0]), r2


def classify_samples(eps, vals, m_max: int = M_MAX, n_max: int = N_MAX, floor: float = 0.0) -> AsymptoticReport:
    """Classify one eps-family of nonnegative magnitudes."""
    eps = np.asarray(eps, float)
    a = np.abs(np.asarray(vals, float))
    n = len(eps)
    start = n // 2
    if n - start < 2:
        raise NetError("grid tail is too short to classify")
    zero = (a < FLOOR) | (a <= floor)
    a_c = np.where(zero, FLOOR, a)
    le, la = np.log(eps), np.log(a_c)
    t_e, t_a = eps[start:], a[start:]

    if zero[start:].all():
        return AsymptoticReport(NEGLIGIBLE, 0, math.inf, 1.0, float(t_e[-1]), eps, a, {})

    slope, r2 = fit_slope(t_e, np.where(zero[start:], FLOOR, t_a))
    neg_ok = _records_ok(la - m_max * le, start) and slope >= m_max - 0.1
    if neg_ok:
        w = start + int(np.argmax((la - m_max * le)[start:]))
        return AsymptoticReport(NEGLIGIBLE, 0, slope, r2, float(eps[w]), eps, a, {})
    for N in range(n_max + 1):
        logr = la + N * le
        if _records_ok(logr, start):
            w = start + int(np.argmax(logr[start:]))
            return AsymptoticReport(MODERATE, N, slope, r2, float(eps[w]), eps, a, {})
    logr = la + n_max * le
    w = start + int(np.argmax(logr[start:]))
    return AsymptoticReport(NON_MODERATE, None, slope, r2, float(eps[w]), eps, a, {})


def sup_norms(u: GridNet, K=None, alpha_max: int = ALPHA_MAX) -> list[GenNumber]:
    """sup_K |d^a u_eps| for a = 0..alpha_max."""
    from .calculus import differentiate

    out = [u.sup(K)]
    for k in range(1, alpha_max + 1):
        out.append(differentiate(u, k).sup(K))
    return out


def classify(v, K=None, alpha_max: int = ALPHA_MAX, m_max: int = M_MAX, n_max: int = N_MAX,
             floor: float = 0.0) -> AsymptoticReport:
    """Negligible / Moderate(N) / NonModerate verdict for a GenNumber or GridNet.

    ``floor`` marks magnitudes at or below it as zero; it is how callers pass a
    discretization error budget.
    """
    if isinstance(v, GenNumber):
        return classify_samples(v.eps, v.samples, m_max, n_max, floor)
    if not isinstance(v, GridNet):
        raise TypeError("classify expects a GenNumber or GridNet")
    norms = sup_norms(v, K, alpha_max)
    reps = [classify_samples(nm.eps, nm.samples, m_max, n_max, floor) for nm in norms]
    exps = {str(k): r.label for k, r in enumerate(reps)}
    base = reps[0]
    if all(r.negligible for r in reps):
        cls, N = NEGLIGIBLE, 0
    elif any(r.cls == NON_MODERATE for r in reps):
        cls, N = NON_MODERATE, None
    else:
        cls, N = MODERATE, max(r.N for r in reps)
    return AsymptoticReport(cls, N, base.slope, base.r2, base.witness, base.eps, base.values, exps)


# ---------------------------------------------------------------------------
# order relations
# ---------------------------------------------------------------------------


@dataclass
class OrderVerdict:
    relation: str
    exponent_a: float | None
    nonnegative: bool
    invertible: bool
    strictly_positive: bool

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "exponent_a": self.exponent_a,
            "nonnegative": self.nonnegative,
            "invertible": self.invertible,
            "strictly_positive": self.strictly_positive,
        }


def _tail(x: GenNumber):
    s = x.grid.tail
    return x.eps[s], x.samples[s]


def invertibility_exponent(x: GenNumber) -> float:
    """Smallest a with |x_eps| >= eps^a on the tail (inf if some tail sample is 0)."""
    e, v = _tail(x)
    a = np.abs(v)
    if np.any(a == 0):
        return math.inf
    return max(0.0, float(np.max(np.log(a) / np.log(e))))


def is_invertible(x: GenNumber, m_max: int = M_MAX) -> OrderVerdict:
    a = invertibility_exponent(x)
    inv = a <= m_max
    return OrderVerdict("Invertible" if inv else "Indeterminate", a if inv else None, _nonneg(x, m_max), inv, False)


def _nonneg(x: GenNumber, m_max: int) -> bool:
    e, v = _tail(x)
    return bool(np.all(v >= -(e**m_max)))


def is_strictly_positive(x: GenNumber, m_max: int = M_MAX) -> OrderVerdict:
    e, v = _tail(x)
    iv = is_invertible(x, m_max)
    nonneg = _nonneg(x, m_max)
    sp = bool(np.all(v > 0)) and iv.invertible
    if sp:
        rel = "StrictlyPositive"
    elif iv.invertible:
        rel = "Invertible"
    elif nonneg:
        rel = "NonNegative"
    else:
        rel = "Indeterminate"
    return OrderVerdict(rel, iv.exponent_a, nonneg, iv.invertible, sp)


def lemma_bound_holds(x: GenNumber, y: GenNumber, m_max: int = M_MAX) -> bool:
    """|x_eps| <= eps^m |y_eps| on the tail for m = 1 .. m_max + N_y.

    N_y is the moderate exponent of y; the extra powers absorb the growth of y
    exactly as in the proof that such an x vanishes.
    """
    ry = classify(y, m_max=m_max)
    ny = ry.N if ry.N is not None else N_MAX
    e, vx = _tail(x)
    vy = y.samples[y.grid.tail]
    for m in range(1, m_max + ny + 1):
        if np.any(np.abs(vx) > e**m * np.abs(vy)):
            return False
    return True


def lemma_x0_check(x: GenNumber, y: GenNumber, m_max: int = M_MAX) -> bool:
    """Bound test combined with the negligibility verdict of x."""
    return lemma_bound_holds(x, y, m_max) and classify(x, m_max=m_max).negligible


# ---------------------------------------------------------------------------
# association
# ---------------------------------------------------------------------------


def _richardson(e: np.ndarray, v: np.ndarray) -> float | None:
    """Extrapolate v(eps) -> eps=0 assuming v = L + c eps^p with p estimated from the last three samples."""
    d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
    if d1 == 0 or d2 == 0:
        return float(v[-1])
    q = d2 / d1
    r = e[-1] / e[-2]
    if not (0 < q < 1):
        return None
    p = math.log(q) / math.log(r)
    if p <= 0:
        return None
    return float(v[-1] + d2 * (r**p) / (1 - r**p))


def scalar_association(x: GenNumber, tol: float = TOL_ASSOC) -> float | None:
    """The eps -> 0 limit of x if the tail converges, else None.

    Extrapolated values from consecutive sample triples must agree to ``tol``
    (Cauchy test on the extrapolants); a tail that is already flat to ``tol``
    is accepted as is.
    """
    e, v = _tail(x)
    if len(v) < 3:
        raise NetError("tail too short")
    scale = max(1.0, abs(float(v[-1])))
    if abs(v[-1] - v[-2]) <= tol * scale:
        return float(v[-1])
    ests = [_richardson(e[k - 2 : k + 1], v[k - 2 : k + 1]) for k in range(2, len(v))]
    if any(L is None for L in ests):
        return None
    if len(ests) == 1:
        return ests[0] if abs(ests[0] - v[-1]) <= abs(v[-1] - v[-2]) else None
    if abs(ests[-1] - ests[-2]) <= tol * max(1.0, abs(ests[-1])):
        return float(ests[-1])
    return None


def bump(center: float, radius: float):
    """Smooth test function exp(1 - 1/(1-t^2)), t = (x-center)/radius; value 1 at the center."""

    def phi(x):
        t = (np.asarray(x, float) - center) / radius
        out = np.zeros_like(t)
        m = np.abs(t) < 1
        out[m] = np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
        return out

    phi.support = (center - radius, center + radius)
    return phi


def default_tests(a: float, b: float, count: int = 5) -> list:
    """Bumps inside (a,b); the middle one is centered at the midpoint."""
    L = b - a
    mid = 0.5 * (a + b)
    specs = [(mid, 0.3 * L), (mid - 0.1 * L, 0.25 * L), (mid + 0.12 * L, 0.2 * L), (mid - 0.2 * L, 0.15 * L), (mid + 0.05 * L, 0.4 * L)]
    return [bump(c, r) for c, r in specs[:count]]


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights on n uniform nodes; even n closes with a 3/8 panel."""
    if n < 3:
        return np.full(n, h / 2)
    if n == 4:
        return np.array([1.0, 3.0, 3.0, 1.0]) * 3 * h / 8
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 3
    w[0:m:2] = 2.0
    w[1:m:2] = 4.0
    w[0] = w[m - 1] = 1.0
    w *= h / 3
    if m < n:
        w[n - 4 :] += np.array([1.0, 3.0, 3.0, 1.0]) * 3 * h / 8
    return w


@dataclass
class WeakReport:
    passed: bool
    max_discrepancy: float
    limits: list
    targets: list
    pairings: list  # per test: per-eps values

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_discrepancy": self.max_discrepancy,
            "tail_limits": self.limits,
            "targets": self.targets,
        }


def pairings(u: GridNet, tests) -> np.ndarray:
    """Matrix of int u_eps phi dx, shape (n_tests, n_eps)."""
    out = np.zeros((len(tests), len(u)))
    for k, (e, x, v) in enumerate(u.items()):
        w = simpson_weights(len(x), u.spatial[k].h)
        for j, phi in enumerate(tests):
            out[j, k] = float(np.dot(w, v * phi(x)))
    return out


def _target_pairing(target, phi) -> float:
    if isinstance(target, dict) and "points" in target:
        return float(sum(w * float(phi(np.array([p]))[0]) for p, w in target["points"]))
    if isinstance(target, (int, float)):
        f = lambda x: float(target)
        brk = []
    elif callable(target):
        f, brk = target, list(getattr(target, "breakpoints", []))
    elif isinstance(target, dict) and "function" in target:
        f, brk = target["function"], list(target.get("breakpoints", []))
    else:
        raise TypeError("target must be a number, callable, or {'points': [(x, w), ...]}")
    lo, hi = phi.support
    pts = [p for p in brk if lo < p < hi]
    g = lambda x: float(np.asarray(f(np.array([x])), float).ravel()[0]) * float(phi(np.array([x]))[0])
    val, _ = _spi.quad(g, lo, hi, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-12)
    return float(val)


def tail_limit(e: np.ndarray, v: np.ndarray) -> float:
    if len(v) < 3:
        return float(v[-1])
    lim = _richardson(e, v)
    if lim is None or abs(lim - v[-1]) > 10 * abs(v[-1] - v[-2]) + 1e-14:
        return float(v[-1])
    return lim


def weak_association(u: GridNet, target, tests=None, tol: float = TOL_WEAK) -> WeakReport:
    """Compare tail limits of int u_eps phi with <target, phi> for each test phi.

    ``target`` is a number, a callable (optionally with ``.breakpoints``), a dict
    ``{"function": f, "breakpoints": [...]}``, or ``{"points": [(x_i, w_i), ...]}``
    for a combination of point masses.
    """
    if tests is None:
        s = u.spatial[0]
        tests = default_tests(s.a, s.b)
    for phi in tests:
        lo, hi = getattr(phi, "support", (None, None))
        if lo is None:
            raise NetError("test functions need a .support attribute")
        for s in u.spatial:
            if lo < s.a - 1e-12 or hi > s.b + 1e-12:
                raise NetError("test function support leaves the domain")
    P = pairings(u, tests)
    s = u.grid.tail
    limits, targets = [], []
    for j, phi in enumerate(tests):
        limits.append(tail_limit(u.grid.values[s], P[j, s]))
        targets.append(_target_pairing(target, phi))
    disc = float(np.max(np.abs(np.array(limits) - np.array(targets))))
    return WeakReport(disc < tol, disc, limits, targets, P.tolist())


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


def eigen_families(A: GenMatrix) -> list[GenNumber]:
    ev = np.linalg.eigvalsh(A.samples)  # ascending per eps
    return [GenNumber(A.grid, ev[:, i]) for i in range(A.dim)]


def classify_definiteness(A: GenMatrix, m_max: int = M_MAX) -> str:
    fams = eigen_families(A)
    verdicts = [is_strictly_positive(f, m_max) for f in fams]
    if all(v.strictly_positive for v in verdicts):
        return "PositiveDefinite"
    if all(v.nonnegative for v in verdicts):
        return "PositiveSemidefinite"
    e = A.grid.values[A.grid.tail]
    lo = fams[0].samples[A.grid.tail]
    hi = fams[-1].samples[A.grid.tail]
    if np.all(lo < -(e**m_max)) and np.all(hi > e**m_max):
        return "Indefinite"
    return "Indeterminate"
