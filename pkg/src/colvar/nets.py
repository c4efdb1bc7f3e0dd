"""Epsilon-indexed nets: generalized numbers, grid functions and generalized points.

Every object here is a finite sample of a family indexed by the regularization
parameter ``eps``.  Arithmetic is componentwise per ``eps``; nothing here knows
about asymptotic classes (see :mod:`colvar.asymptotics`).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

#: global cap on spatial nodes per eps
NODE_CAP = 2_000_000
#: feature resolution rule: h_eps <= eps / RESOLUTION
RESOLUTION = 16


class NetError(ValueError):
    """Invalid construction or incompatible operands."""


class ResolutionError(NetError):
    """A spatial grid cannot resolve eps-scale features within the node cap."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def worker_count() -> int:
    env = os.environ.get("COLVAR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def eps_map(fn: Callable, items: Iterable) -> list:
    """Map ``fn`` over per-eps work items; results come back in grid order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# eps grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EpsGrid:
    values: np.ndarray
    spacing: str = "explicit"

    def __post_init__(self):
        v = _frozen(self.values)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or len(v) < 4:
            raise NetError("an eps grid needs at least 4 values")
        if not np.all(np.isfinite(v)) or np.any(v <= 0) or np.any(v > 1):
            raise NetError("eps values must lie in (0, 1]")
        if np.any(np.diff(v) >= 0):
            raise NetError("eps values must be strictly decreasing")
        if v[0] / v[-1] < 100 * (1 - 1e-12):
            raise NetError("eps grid must span at least two decades")

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        return isinstance(other, EpsGrid) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    @property
    def tail(self) -> slice:
        """Index slice of the smallest ceil(n/2) eps values."""
        return slice(len(self) // 2, None)

    def to_dict(self) -> dict:
        return {"spacing": self.spacing, "values": [float(e) for e in self.values]}


def make_eps_grid(e_min: float, e_max: float, count: int) -> EpsGrid:
    """Geometric grid from ``e_max`` down to ``e_min`` with ``count`` points."""
    if not (0 < e_min < e_max <= 1):
        raise NetError(f"need 0 < e_min < e_max <= 1, got ({e_min}, {e_max})")
    if count < 4:
        raise NetError("count must be at least 4")
    ratio = (e_min / e_max) ** (1.0 / (count - 1))
    vals = e_max * ratio ** np.arange(count)
    vals[-1] = e_min
    return EpsGrid(vals, spacing="geometric")


# ---------------------------------------------------------------------------
# generalized numbers, vectors, matrices
# ---------------------------------------------------------------------------


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise NetError("operands live on different eps grids")


@dataclass(frozen=True, eq=False)
class GenNumber:
    """A sampled representative (x_eps) of a generalized number."""

    grid: EpsGrid
    samples: np.ndarray

    def __post_init__(self):
        s = _frozen(self.samples)
        object.__setattr__(self, "samples", s)
        if s.shape != (len(self.grid),):
            raise NetError("one sample per eps is required")
        bad = ~np.isfinite(s)
        if bad.any():
            e = self.grid.values[np.argmax(bad)]
            raise NetError(f"non-finite sample at eps={e!r}")

    @property
    def eps(self):
        return self.grid.values

    def __len__(self):
        return len(self.samples)

    def _coerce(self, other):
        if isinstance(other, GenNumber):
            _check_same_grid(self, other)
            return other.samples
        if isinstance(other, (int, float, np.floating, np.integer)):
            return float(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GenNumber(self.grid, self.samples + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GenNumber(self.grid, self.samples - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GenNumber(self.grid, o - self.samples)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else GenNumber(self.grid, self.samples * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if np.any(np.asarray(o) == 0):
            raise ZeroDivisionError("denominator vanishes at some eps")
        return GenNumber(self.grid, self.samples / o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if np.any(self.samples == 0):
            raise ZeroDivisionError("denominator vanishes at some eps")
        return GenNumber(self.grid, o / self.samples)

    def __neg__(self):
        return GenNumber(self.grid, -self.samples)

    def __abs__(self):
        return GenNumber(self.grid, np.abs(self.samples))

    def __pow__(self, k):
        return GenNumber(self.grid, self.samples**k)

    def to_csv(self, dest=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "value"])
        for e, v in zip(self.grid.values, self.samples):
            w.writerow([fmt(e), fmt(v)])
        return _write_or_return(buf.getvalue(), dest)

    def summary(self, provenance: str = "") -> dict:
        return {"grid": self.grid.to_dict(), "dims": [len(self)], "provenance": provenance}


def gen_number(grid: EpsGrid, rule: Callable[[float], float]) -> GenNumber:
    """Sample ``rule`` at every eps of ``grid``."""
    vals = []
    for e in grid.values:
        v = float(rule(float(e)))
        if not math.isfinite(v):
            raise NetError(f"rule is not finite at eps={e!r}")
        vals.append(v)
    return GenNumber(grid, np.array(vals))


def constant(grid: EpsGrid, c: float) -> GenNumber:
    return GenNumber(grid, np.full(len(grid), float(c)))


def make_zero_divisor_pair(grid: EpsGrid) -> tuple[GenNumber, GenNumber]:
    """Interleaved indicator nets with alpha*omega == 0 exactly."""
    idx = np.arange(len(grid))
    alpha = (idx % 2 == 0).astype(float)
    return GenNumber(grid, alpha), GenNumber(grid, 1.0 - alpha)


@dataclass(frozen=True, eq=False)
class GenVector:
    grid: EpsGrid
    samples: np.ndarray  # (n_eps, p)

    def __post_init__(self):
        s = _frozen(self.samples)
        object.__setattr__(self, "samples", s)
        if s.ndim != 2 or s.shape[0] != len(self.grid):
            raise NetError("GenVector samples must have shape (n_eps, p)")
        if not np.all(np.isfinite(s)):
            raise NetError("non-finite GenVector sample")

    def component(self, i: int) -> GenNumber:
        return GenNumber(self.grid, self.samples[:, i])

    def norm(self) -> GenNumber:
        return GenNumber(self.grid, np.max(np.abs(self.samples), axis=1))


@dataclass(frozen=True, eq=False)
class GenMatrix:
    grid: EpsGrid
    samples: np.ndarray  # (n_eps, p, p)

    def __post_init__(self):
        s = _frozen(self.samples)
        object.__setattr__(self, "samples", s)
        if s.ndim != 3 or s.shape[0] != len(self.grid) or s.shape[1] != s.shape[2]:
            raise NetError("GenMatrix samples must have shape (n_eps, p, p)")
        if not np.all(np.isfinite(s)):
            raise NetError("non-finite GenMatrix sample")
        asym = np.abs(s - np.swapaxes(s, 1, 2)).max(axis=(1, 2))
        scale = np.abs(s).max(axis=(1, 2))
        if np.any(asym > 1e-12 * np.maximum(scale, 1e-300)):
            raise NetError("GenMatrix must be symmetric per eps")

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


# ---------------------------------------------------------------------------
# spatial grids and grid nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpatialGrid:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (self.b > self.a) or self.n < 2:
            raise NetError("degenerate spatial grid")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)


def resolved_grid(a: float, b: float, eps: float, base_n: int = 201, per_eps: int = RESOLUTION) -> SpatialGrid:
    """Uniform grid with step <= eps/per_eps (and at most the base step); odd node count."""
    n_needed = int(math.ceil((b - a) * per_eps / eps)) + 1
    n = max(base_n, n_needed)
    if n % 2 == 0:
        n += 1
    if n > NODE_CAP:
        raise ResolutionError(f"eps={eps:g} needs {n} nodes on [{a}, {b}] (cap {NODE_CAP})")
    return SpatialGrid(float(a), float(b), n)


@dataclass(frozen=True, eq=False)
class GridNet:
    """Per-eps grid function; spatial resolution may differ between eps values."""

    grid: EpsGrid
    spatial: tuple
    values: tuple

    def __post_init__(self):
        sp = tuple(self.spatial)
        vals = tuple(_frozen(v) for v in self.values)
        object.__setattr__(self, "spatial", sp)
        object.__setattr__(self, "values", vals)
        if len(sp) != len(self.grid) or len(vals) != len(self.grid):
            raise NetError("need one spatial grid and one array per eps")
        for e, s, v in zip(self.grid.values, sp, vals):
            if v.shape != (s.n,):
                raise NetError(f"array length mismatch at eps={e!r}")
            if not np.all(np.isfinite(v)):
                raise NetError(f"non-finite values at eps={e!r}")

    @classmethod
    def from_function(cls, grid: EpsGrid, spatial, fn: Callable) -> "GridNet":
        """``spatial`` is one SpatialGrid for all eps or a callable eps -> SpatialGrid."""
        grids = [spatial(float(e)) if callable(spatial) else spatial for e in grid.values]

        def one(k):
            e = float(grid.values[k])
            return np.broadcast_to(np.asarray(fn(e, grids[k].nodes), dtype=float), (grids[k].n,)).copy()

        return cls(grid, tuple(grids), tuple(eps_map(one, range(len(grid)))))

    def __len__(self):
        return len(self.grid)

    def items(self):
        """Yield (eps, nodes, values) per eps in grid order."""
        for e, s, v in zip(self.grid.values, self.spatial, self.values):
            yield float(e), s.nodes, v

    def map(self, fn: Callable) -> "GridNet":
        """Apply ``fn(eps, x, values)`` per eps on the same spatial grids."""
        out = [np.asarray(fn(e, x, v), dtype=float) for e, x, v in self.items()]
        return GridNet(self.grid, self.spatial, tuple(out))

    def _binary(self, other, op):
        if isinstance(other, GridNet):
            _check_same_grid(self, other)
            if self.spatial != other.spatial:
                raise NetError("grid nets have different spatial grids")
            return GridNet(self.grid, self.spatial, tuple(op(a, b) for a, b in zip(self.values, other.values)))
        if isinstance(other, GenNumber):
            _check_same_grid(self, other)
            return GridNet(self.grid, self.spatial, tuple(op(a, s) for a, s in zip(self.values, other.samples)))
        if isinstance(other, (int, float, np.floating, np.integer)):
            return GridNet(self.grid, self.spatial, tuple(op(a, float(other)) for a in self.values))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        def div(a, b):
            if np.any(np.asarray(b) == 0):
                raise ZeroDivisionError("denominator vanishes at some node")
            return a / b

        return self._binary(other, div)

    def __neg__(self):
        return GridNet(self.grid, self.spatial, tuple(-v for v in self.values))

    def sup(self, sub: tuple | None = None) -> GenNumber:
        """sup_K |u_eps| per eps, K = ``sub`` or the whole domain."""
        out = []
        for e, x, v in self.items():
            m = _mask(x, sub)
            out.append(_peak(np.abs(v), m))
        return GenNumber(self.grid, np.array(out))

    def to_csv(self, dest=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "node_index", "x", "value"])
        for e, x, v in self.items():
            se = fmt(e)
            for i, (xi, vi) in enumerate(zip(x, v)):
                w.writerow([se, i, fmt(xi), fmt(vi)])
        return _write_or_return(buf.getvalue(), dest)

    def summary(self, provenance: str = "") -> dict:
        return {
            "grid": self.grid.to_dict(),
            "dims": [[s.n for s in self.spatial]],
            "domain": [[s.a, s.b] for s in self.spatial],
            "provenance": provenance,
        }


def _mask(x, sub):
    if sub is None:
        return np.ones_like(x, dtype=bool)
    lo, hi = sub
    m = (x >= lo - 1e-14) & (x <= hi + 1e-14)
    if not m.any():
        raise NetError(f"sub-domain {sub} contains no nodes")
    return m


def _peak(a: np.ndarray, mask: np.ndarray) -> float:
    """Max of a sampled nonnegative function, refined by a parabola through the top node."""
    idx = np.flatnonzero(mask)
    i = idx[np.argmax(a[idx])]
    top = float(a[i])
    if mask[max(i - 1, 0)] and mask[min(i + 1, len(a) - 1)] and 0 < i < len(a) - 1:
        l, r = float(a[i - 1]), float(a[i + 1])
        curv = l - 2 * top + r
        if curv < 0:
            top = max(top, top - (r - l) ** 2 / (8 * curv))
    return top


# ---------------------------------------------------------------------------
# generalized points and point evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GenPoint:
    grid: EpsGrid
    coords: np.ndarray
    kind: str = "general"
    limit: float | None = None

    def __post_init__(self):
        c = _frozen(self.coords)
        object.__setattr__(self, "coords", c)
        if c.shape[0] != len(self.grid):
            raise NetError("one coordinate per eps is required")
        if self.kind not in ("classical", "near-standard", "general"):
            raise NetError(f"unknown point kind {self.kind!r}")
        if self.kind == "classical" and not np.all(c == c[0]):
            raise NetError("classical points are eps-independent")
        if self.kind == "near-standard":
            if self.limit is None:
                raise NetError("near-standard points need a declared limit")
            dev = np.abs(c[-2:] - np.asarray(self.limit)).reshape(2, -1).max(axis=1)
            if np.any(dev > 0.1 * max(1.0, float(np.max(np.abs(self.limit))))):
                raise NetError("coordinates do not approach the declared limit")

    @classmethod
    def classical(cls, grid: EpsGrid, x) -> "GenPoint":
        return cls(grid, np.broadcast_to(np.asarray(x, float), (len(grid),) + np.shape(x)).copy(), "classical")

    @classmethod
    def near_standard(cls, grid: EpsGrid, rule: Callable[[float], float], limit) -> "GenPoint":
        return cls(grid, np.array([rule(float(e)) for e in grid.values], float), "near-standard", limit)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "limit": self.limit, "coords": self.coords.tolist()}


def interp_cubic(nodes: np.ndarray, values: np.ndarray, x) -> np.ndarray:
    """Four-point Lagrange interpolation on a uniform grid; exact node hits return the node value."""
    x = np.atleast_1d(np.asarray(x, float))
    a, n = nodes[0], len(nodes)
    h = (nodes[-1] - a) / (n - 1)
    t = (x - a) / h
    i0 = np.clip(np.floor(t).astype(int) - 1, 0, max(n - 4, 0))
    out = np.zeros_like(x)
    s = t - i0
    for j in range(4):
        w = np.ones_like(x)
        for k in range(4):
            if k != j:
                w *= (s - k) / (j - k)
        out += w * values[np.minimum(i0 + j, n - 1)]
    hit = np.abs(t - np.rint(t)) < 1e-12
    if hit.any():
        out[hit] = values[np.clip(np.rint(t[hit]).astype(int), 0, n - 1)]
    return out


def eval_at(net: GridNet, x: GenPoint) -> GenNumber:
    """Point value u_eps(x_eps) by cubic interpolation on each eps's grid."""
    if x.grid != net.grid:
        raise NetError("point and net live on different eps grids")
    out = []
    for k, (e, nodes, v) in enumerate(net.items()):
        xe = float(np.ravel(x.coords[k])[0])
        s = net.spatial[k]
        if xe < s.a - 1e-14 or xe > s.b + 1e-14:
            raise NetError(f"point {xe!r} outside [{s.a}, {s.b}] at eps={e!r}")
        out.append(float(interp_cubic(nodes, v, xe)[0]))
    return GenNumber(net.grid, np.array(out))


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits, the reproducible float format used for every artifact."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _write_or_return(text: str, dest) -> str:
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf8", newline="") as f:
            f.write(text)
    return text


def read_csv(text: str):
    """Parse a GenNumber or GridNet CSV.  Raises NetError on malformed input."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise NetError("empty CSV")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    try:
        if header == ["epsilon", "value"]:
            eps = np.array([float(r[0]) for r in body])
            vals = np.array([float(r[1]) for r in body])
            return GenNumber(EpsGrid(eps), vals)
        if header == ["epsilon", "node_index", "x", "value"]:
            groups: dict[float, list] = {}
            for r in body:
                if len(r) != 4:
                    raise NetError("ragged CSV row")
                groups.setdefault(float(r[0]), []).append((int(r[1]), float(r[2]), float(r[3])))
            eps = np.array(list(groups))
            spatial, values = [], []
            for e in eps:
                pts = sorted(groups[e])
                if [p[0] for p in pts] != list(range(len(pts))):
                    raise NetError("node indices must be 0..n-1")
                xs = np.array([p[1] for p in pts])
                sg = SpatialGrid(xs[0], xs[-1], len(xs))
                if not np.allclose(xs, sg.nodes, rtol=0, atol=1e-9 * (sg.b - sg.a)):
                    raise NetError("GridNet CSV nodes must be uniform")
                spatial.append(sg)
                values.append(np.array([p[2] for p in pts]))
            return GridNet(EpsGrid(eps), tuple(spatial), tuple(values))
    except (IndexError, ValueError) as exc:
        raise NetError(f"malformed CSV: {exc}") from exc
    raise NetError(f"unrecognized CSV header {header}")


def dumps(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats and sorted keys."""
    return _enc(obj, 0) + "\n"


def _enc(o, ind):
    pad, pad1 = "  " * ind, "  " * (ind + 1)
    if isinstance(o, bool) or o is None:
        return json.dumps(o)
    if isinstance(o, (float, np.floating)):
        s = fmt(o)
        return s if math.isfinite(float(o)) else json.dumps(s)
    if isinstance(o, (int, np.integer)):
        return str(int(o))
    if isinstance(o, str):
        return json.dumps(o)
    if isinstance(o, np.ndarray):
        return _enc(o.tolist(), ind)
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{pad1}{json.dumps(str(k))}: {_enc(v, ind + 1)}" for k, v in sorted(o.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(o, (list, tuple)):
        if not o:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer, str)) or v is None for v in o):
            return "[" + ", ".join(_enc(v, ind + 1) for v in o) + "]"
        return "[\n" + ",\n".join(pad1 + _enc(v, ind + 1) for v in o) + "\n" + pad + "]"
    if hasattr(o, "to_dict"):
        return _enc(o.to_dict(), ind)
    raise TypeError(f"cannot serialize {type(o).__name__}")
