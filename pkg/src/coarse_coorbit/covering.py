"""Truncated coverings, their nerves, chain metrics and subordination counts.

An infinite covering is represented by a :class:`CoveringFamily`, which
builds finite truncations on demand.  A :class:`Covering` is one such
truncation (or an explicit finite list of sets) together with its nerve.

Edges found by the intersection oracle are certified.  Pairs the oracle
cannot decide are kept separately: they count as edges for upper bounds on
overlap counts and as non-edges for lower bounds.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import exact as ex
from ._interval import Interval, iexp
from .geometry import AffineImage, BaseSet, CoveringSet, DimensionError, Pullback, Tri, intersects
from .groups import ShearletGroupSpec, group_from_json


class CoveringError(ValueError):
    """A covering could not be constructed as requested."""


class OutsideWindowError(ValueError):
    """A query point lies outside the truncation window."""


# ----------------------------------------------------------------- windows


@dataclass(frozen=True)
class AnnulusWindow:
    """Points with lo < |x| < hi (Euclidean norm); optionally x_1 > 0 only."""

    hi: float
    lo: float = 0.0
    positive: bool = False

    def contains(self, x: Sequence[Any]) -> bool:
        xf = np.array([ex.to_float(v) for v in x])
        nrm = float(np.linalg.norm(xf))
        if self.positive and xf[0] <= 0:
            return False
        return self.lo < nrm < self.hi if self.lo > 0 else nrm < self.hi

    def to_json(self) -> dict:
        return {"kind": "annulus", "lo": self.lo, "hi": self.hi, "positive": self.positive}


@dataclass(frozen=True)
class CoordinateWindow:
    """Orbit points p(h(r, t)) with |r| <= R and |t_j| <= R."""

    group: ShearletGroupSpec
    radius: float
    components: tuple = (1,)

    def contains(self, x: Sequence[Any]) -> bool:
        xf = [ex.to_float(v) for v in x]
        if xf[0] == 0:
            return False
        g = self.group.orbit_map_inverse(xf) if (xf[0] > 0 or self.group.include_sign_component) else None
        if g is None or g.eps not in self.components:
            return False
        return abs(g.r) <= self.radius and all(abs(v) <= self.radius for v in g.t)

    def to_json(self) -> dict:
        return {"kind": "coordinate-box", "radius": self.radius, "components": list(self.components)}


@dataclass(frozen=True)
class UnionWindow:
    """The union of the sets themselves (used for explicit coverings)."""

    def contains(self, x: Sequence[Any]) -> bool:  # membership decided by the covering
        return True

    def to_json(self) -> dict:
        return {"kind": "union"}


# ------------------------------------------------------------------- nerve


def _pair_seed(seed: int, i: int, j: int) -> int:
    return int(np.random.SeedSequence([seed, min(i, j), max(i, j)]).generate_state(1)[0])


@dataclass(frozen=True)
class Nerve:
    n: int
    edges: frozenset
    indeterminate: frozenset

    def graph(self, include_indeterminate: bool = False) -> sparse.csr_matrix:
        pairs = list(self.edges) + (list(self.indeterminate) if include_indeterminate else [])
        if not pairs:
            return sparse.csr_matrix((self.n, self.n), dtype=np.int8)
        arr = np.array(pairs, dtype=np.int64)
        rows = np.concatenate([arr[:, 0], arr[:, 1]])
        cols = np.concatenate([arr[:, 1], arr[:, 0]])
        data = np.ones(len(rows), dtype=np.int8)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def degrees(self, include_indeterminate: bool = False) -> np.ndarray:
        g = self.graph(include_indeterminate)
        return np.asarray(g.sum(axis=1)).ravel().astype(int)


@dataclass
class OracleBudget:
    depth: int = 12
    samples: int = 4096
    seed: int = 0
    workers: int = 1


def _interval_bounds(s: CoveringSet) -> tuple[Any, Any] | None:
    """Exact endpoints of a one-dimensional set, when available."""
    if s.dim != 1:
        return None
    a = s.pre_A[0, 0]
    c = s.pre_c[0]
    base = s.base
    half = base.size[0]
    ctr = base.center[0]
    exact = s.is_exact
    if not exact:
        a, c, half, ctr = (ex.to_float(v) for v in (a, c, half, ctr))
    # a x + c in (ctr - half, ctr + half)
    e1 = (ctr - half - c) / a
    e2 = (ctr + half - c) / a
    return (min(e1, e2), max(e1, e2)) if exact else (float(min(e1, e2)), float(max(e1, e2)))


def _decide_pairs(
    sets_a: Sequence[CoveringSet],
    sets_b: Sequence[CoveringSet],
    pairs: Sequence[tuple[int, int]],
    budget: OracleBudget,
    offset_b: int = 0,
) -> tuple[list, list]:
    """Run the oracle on candidate pairs; returns (yes, indeterminate)."""

    def run(chunk):
        yes, ind = [], []
        for i, j in chunk:
            res = intersects(
                sets_a[i], sets_b[j], depth=budget.depth, samples=budget.samples, seed=_pair_seed(budget.seed, i, j + offset_b)
            ).result
            if res is Tri.YES:
                yes.append((i, j))
            elif res is Tri.INDETERMINATE:
                ind.append((i, j))
        return yes, ind

    if budget.workers > 1 and len(pairs) > 64:
        size = math.ceil(len(pairs) / budget.workers)
        chunks = [pairs[k : k + size] for k in range(0, len(pairs), size)]
        with ThreadPoolExecutor(budget.workers) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(pairs)]
    yes = sorted(p for r in results for p in r[0])
    ind = sorted(p for r in results for p in r[1])
    return yes, ind


def _bbox_arrays(sets: Sequence[CoveringSet]) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([s.bbox[0] for s in sets])
    hi = np.array([s.bbox[1] for s in sets])
    return lo, hi


def _candidate_pairs(
    sets_a: Sequence[CoveringSet], sets_b: Sequence[CoveringSet], same: bool
) -> list[tuple[int, int]]:
    """Pairs whose bounding boxes overlap (sweep on axis 0)."""
    if not sets_a or not sets_b:
        return []
    lo_a, hi_a = _bbox_arrays(sets_a)
    lo_b, hi_b = _bbox_arrays(sets_b)
    order = np.argsort(lo_b[:, 0], kind="stable")
    lo_sorted = lo_b[order, 0]
    pairs = []
    for i in range(len(sets_a)):
        stop = np.searchsorted(lo_sorted, hi_a[i, 0], side="left")
        cand = order[:stop]
        if cand.size == 0:
            continue
        ok = np.all((lo_b[cand] < hi_a[i]) & (hi_b[cand] > lo_a[i]), axis=1)
        cand = cand[ok]
        if same:
            cand = cand[cand > i]
        pairs.extend((i, int(j)) for j in cand)
    return pairs


def _interval_pairs(
    sets_a: Sequence[CoveringSet], sets_b: Sequence[CoveringSet], same: bool
) -> tuple[list, list] | None:
    """Exact decision for one-dimensional coverings: open intervals meet iff
    max(lo) < min(hi).  Floats pre-screen; near ties are settled exactly."""
    ia = [_interval_bounds(s) for s in sets_a]
    ib = [_interval_bounds(s) for s in sets_b]
    if any(v is None for v in ia) or any(v is None for v in ib):
        return None
    lo_a = np.array([float(a) for a, _ in ia])
    hi_a = np.array([float(b) for _, b in ia])
    lo_b = np.array([float(a) for a, _ in ib])
    hi_b = np.array([float(b) for _, b in ib])
    order = np.argsort(lo_b, kind="stable")
    lo_sorted = lo_b[order]
    tol = 1e-9
    yes = []
    for i in range(len(ia)):
        scale = tol * max(1.0, abs(hi_a[i]))
        stop = np.searchsorted(lo_sorted, hi_a[i] + scale, side="right")
        cand = order[:stop]
        cand = cand[hi_b[cand] > lo_a[i] - tol * np.maximum(1.0, np.abs(lo_a[i]))]
        if same:
            cand = cand[cand > i]
        for j in cand:
            j = int(j)
            lo = max(ia[i][0], ib[j][0])
            hi = min(ia[i][1], ib[j][1])
            if lo < hi:
                yes.append((i, j))
    return sorted(yes), []


def compute_nerve(sets: Sequence[CoveringSet], budget: OracleBudget) -> Nerve:
    fast = _interval_pairs(sets, sets, same=True)
    if fast is not None:
        yes, ind = fast
    else:
        yes, ind = _decide_pairs(sets, sets, _candidate_pairs(sets, sets, same=True), budget)
    yes = [(min(i, j), max(i, j)) for i, j in yes]
    ind = [(min(i, j), max(i, j)) for i, j in ind]
    return Nerve(len(sets), frozenset(yes), frozenset(ind))


def cross_intersections(
    q: "Covering", p: "Covering", budget: OracleBudget | None = None
) -> tuple[list, list]:
    """All (i, j) with Q_i meeting P_j: (certified, undecided)."""
    budget = budget or q.budget
    fast = _interval_pairs(q.sets, p.sets, same=False)
    if fast is not None:
        return fast
    return _decide_pairs(q.sets, p.sets, _candidate_pairs(q.sets, p.sets, same=False), budget, offset_b=len(q.sets))


# ---------------------------------------------------------------- covering


class Covering:
    """A finite list of open sets with its nerve.

    ``keys`` label the sets with their index in the infinite family (for
    example ``k`` for dyadic bands); ``radius`` records the truncation.
    """

    def __init__(
        self,
        sets: Sequence[CoveringSet],
        *,
        label: str = "",
        window: Any = None,
        keys: Sequence[Any] | None = None,
        radius: float | None = None,
        family: "CoveringFamily | None" = None,
        budget: OracleBudget | None = None,
    ):
        if not sets:
            raise CoveringError("a covering needs at least one set")
        dims = {s.dim for s in sets}
        if len(dims) != 1:
            raise DimensionError("all sets must have the same dimension")
        self.sets = tuple(sets)
        self.dim = dims.pop()
        self.label = label
        self.window = window if window is not None else UnionWindow()
        self.keys = tuple(keys) if keys is not None else tuple(range(len(sets)))
        self.radius = radius
        self.family = family
        self.budget = budget or OracleBudget()

    def __len__(self) -> int:
        return len(self.sets)

    @cached_property
    def nerve(self) -> Nerve:
        return compute_nerve(self.sets, self.budget)

    @cached_property
    def _graph_lower(self) -> sparse.csr_matrix:
        return self.nerve.graph(False)

    @cached_property
    def _graph_upper(self) -> sparse.csr_matrix:
        return self.nerve.graph(True)

    def graph(self, include_indeterminate: bool = False) -> sparse.csr_matrix:
        return self._graph_upper if include_indeterminate else self._graph_lower

    @cached_property
    def _bboxes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lo, hi = _bbox_arrays(self.sets)
        order = np.argsort(lo[:, 0], kind="stable")
        return lo, hi, order

    @cached_property
    def extent(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi, _ = self._bboxes
        return lo.min(axis=0), hi.max(axis=0)

    def locate(self, x: Sequence[Any]) -> list[int]:
        """Indices of all sets containing x (exact when x and the sets are)."""
        x = tuple(x) if not np.isscalar(x) else (x,)
        if len(x) != self.dim:
            raise DimensionError(f"point has dimension {len(x)}, covering has dimension {self.dim}")
        lo, hi, order = self._bboxes
        xf = np.array([ex.to_float(v) for v in x])
        stop = np.searchsorted(lo[order, 0], xf[0], side="right")
        cand = order[:stop]
        cand = cand[np.all((lo[cand] <= xf) & (hi[cand] >= xf), axis=1)]
        return sorted(int(i) for i in cand if self.sets[i].contains(x))

    def locate_many(self, points: np.ndarray) -> list[list[int]]:
        """Float version of :meth:`locate` for an (N, d) array."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi, order = self._bboxes
        lo0 = lo[order, 0]
        out = []
        for xf in pts:
            stop = np.searchsorted(lo0, xf[0], side="right")
            cand = order[:stop]
            cand = cand[np.all((lo[cand] <= xf) & (hi[cand] >= xf), axis=1)]
            hits = [int(i) for i in cand if self.sets[i].contains_array(xf[None, :])[0]]
            out.append(sorted(hits))
        return out

    def check_window(self, x: Sequence[Any]) -> None:
        if not self.window.contains(x):
            raise OutsideWindowError(f"point {tuple(ex.to_float(v) for v in x)} lies outside the truncation window")

    def hop_distances(self, sources: Iterable[int], include_indeterminate: bool = False) -> np.ndarray:
        """Graph distance in the nerve from the nearest source to every set."""
        src = sorted(set(int(s) for s in sources))
        if not src:
            return np.full(len(self.sets), np.inf)
        return csgraph.dijkstra(
            self.graph(include_indeterminate), directed=False, indices=src, unweighted=True, min_only=True
        )

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "dimension": self.dim,
            "radius": self.radius,
            "sets": len(self.sets),
            "window": self.window.to_json(),
        }


def _as_index_set(c: Covering, J: Iterable[int]) -> set[int]:
    J = set(int(j) for j in J)
    bad = [j for j in J if not 0 <= j < len(c)]
    if bad:
        raise IndexError(f"unknown set indices {sorted(bad)}")
    return J


def neighbors(c: Covering, J: Iterable[int], n: int = 1, include_indeterminate: bool = False) -> set[int]:
    """J^{n*}: indices reachable from J in at most n nerve steps."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    current = _as_index_set(c, J)
    g = c.graph(include_indeterminate)
    for _ in range(n):
        nxt = set(current)
        for j in current:
            nxt.update(int(k) for k in g.indices[g.indptr[j] : g.indptr[j + 1]])
        if nxt == current:
            break
        current = nxt
    return current


@dataclass(frozen=True)
class Bound:
    """A count known up to undecided intersections."""

    lower: int
    upper: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> int:
        return self.lower


def admissibility_constant(c: Covering) -> int:
    """max_i #{j : Q_i meets Q_j}, counting i itself; certified edges only.
    Use :func:`admissibility_bounds` when undecided pairs matter."""
    return admissibility_bounds(c).lower


def admissibility_bounds(c: Covering) -> Bound:
    lo = int(c.nerve.degrees(False).max()) + 1
    hi = int(c.nerve.degrees(True).max()) + 1
    return Bound(lo, hi)


@dataclass(frozen=True)
class SubordinationCount:
    lower: np.ndarray
    upper: np.ndarray
    indeterminate_pairs: tuple

    @property
    def max_lower(self) -> int:
        return int(self.lower.max()) if self.lower.size else 0

    @property
    def max_upper(self) -> int:
        return int(self.upper.max()) if self.upper.size else 0

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.lower)) if self.lower.size else -1


def subordination_count(q: Covering, p: Covering, budget: OracleBudget | None = None) -> SubordinationCount:
    """For each Q_i the number of P_j it meets."""
    if q.dim != p.dim:
        raise DimensionError("coverings live in different dimensions")
    if q is p:
        deg_lo = q.nerve.degrees(False) + 1
        deg_hi = q.nerve.degrees(True) + 1
        return SubordinationCount(deg_lo, deg_hi, tuple(sorted(q.nerve.indeterminate)))
    yes, ind = cross_intersections(q, p, budget)
    lower = np.bincount([i for i, _ in yes], minlength=len(q)).astype(int)
    extra = np.bincount([i for i, _ in ind], minlength=len(q)).astype(int)
    return SubordinationCount(lower, lower + extra, tuple(ind))


def _point(x: Any) -> tuple:
    return (x,) if np.isscalar(x) or isinstance(x, Fraction) else tuple(x)


def _same_point(x: tuple, y: tuple) -> bool:
    return all(ex.is_zero(ex.to_sympy(a) - ex.to_sympy(b)) if ex.is_exact(a) and ex.is_exact(b) else a == b for a, b in zip(x, y))


def chain_distance(c: Covering, x: Any, y: Any, include_indeterminate: bool = False) -> float:
    """Length of the shortest chain of overlapping sets from x to y.

    Returns ``math.inf`` when no chain exists inside the truncation (a larger
    truncation might still connect the points).  With certified edges only
    the value is an upper bound for the untruncated distance; including
    undecided pairs gives a lower bound for the same truncation.
    """
    x, y = _point(x), _point(y)
    c.check_window(x)
    c.check_window(y)
    if _same_point(x, y):
        return 0
    sx, sy = c.locate(x), c.locate(y)
    if not sx or not sy:
        raise OutsideWindowError("point is not covered by the truncation")
    dist = c.hop_distances(sx, include_indeterminate)
    best = float(np.min(dist[sy]))
    return math.inf if math.isinf(best) else int(best) + 1


def neighbor_hop_function(c: Covering, x: Any, y: Any, include_indeterminate: bool = False) -> float:
    """inf{n >= 1 : some Q_i^{n*} contains both x and y}; 0 when x = y.

    Not a metric in general; kept to reproduce the triangle-inequality failure.
    """
    x, y = _point(x), _point(y)
    c.check_window(x)
    c.check_window(y)
    if _same_point(x, y):
        return 0
    sx, sy = c.locate(x), c.locate(y)
    if not sx or not sy:
        raise OutsideWindowError("point is not covered by the truncation")
    dx = c.hop_distances(sx, include_indeterminate)
    dy = c.hop_distances(sy, include_indeterminate)
    best = float(np.min(np.maximum(dx, dy)))
    return math.inf if math.isinf(best) else max(1, int(best))


# ---------------------------------------------------------------- weights


@dataclass(frozen=True)
class WeightFamily:
    values: tuple
    keys: tuple
    alpha: Any = None

    def __post_init__(self):
        if any(ex.to_float(v) <= 0 for v in self.values):
            raise ValueError("weights must be positive")

    def as_float(self) -> np.ndarray:
        return np.array([ex.to_float(v) for v in self.values])


def intrinsic_weight(c: Covering, alpha: Any) -> WeightFamily:
    """u_i = |Q_i|^alpha."""
    vals = []
    for s in c.sets:
        v = s.volume()
        if ex.is_exact(v) and isinstance(alpha, int) or (isinstance(alpha, Fraction) and alpha.denominator == 1 and ex.is_exact(v)):
            a = int(alpha)
            vals.append(ex.to_fraction(v) ** a if not hasattr(v, "free_symbols") else ex.simplify(v**a))
        else:
            vals.append(ex.to_float(v) ** float(alpha))
    return WeightFamily(tuple(vals), c.keys, alpha)


def weight_from_keys(c: Covering, fn: Callable[[Any], Any]) -> WeightFamily:
    return WeightFamily(tuple(fn(k) for k in c.keys), c.keys)


def worst_ratio(w: WeightFamily, c: Covering) -> float:
    """max u_i / u_j over certified nerve edges (1 if there are none)."""
    if len(w.values) != len(c):
        raise ValueError("weight family and covering have different index sets")
    logs = np.log(w.as_float())
    pairs = np.array(sorted(c.nerve.edges), dtype=np.int64).reshape(-1, 2)
    if pairs.size == 0:
        return 1.0
    return float(np.exp(np.max(np.abs(logs[pairs[:, 0]] - logs[pairs[:, 1]]))))


@dataclass(frozen=True)
class ModerationResult:
    moderate: bool
    worst_ratio: float
    ratios: tuple
    radii: tuple


def is_moderate(
    w: WeightFamily | Callable[[Any], Any],
    c: "Covering | CoveringFamily",
    radii: Sequence[float] | None = None,
    growth_threshold: float = 2.0,
) -> ModerationResult:
    """Moderateness evidence.

    With a single truncation, the verdict is only that the worst ratio is
    finite.  Pass a family, a weight function of the keys and a list of radii
    to test whether the worst ratio stays bounded as the window grows.
    """
    if radii is None:
        if not isinstance(w, WeightFamily):
            w = weight_from_keys(c, w)
        r = worst_ratio(w, c)
        return ModerationResult(math.isfinite(r), r, (r,), (c.radius,))
    family = c.family if isinstance(c, Covering) else c
    if family is None:
        raise ValueError("radii given but the covering has no family to rebuild from")
    ratios = []
    for R in radii:
        cov = family.build(R)
        wf = weight_from_keys(cov, w) if not isinstance(w, WeightFamily) else w
        ratios.append(worst_ratio(wf, cov))
    grows = len(ratios) >= 3 and all(b > a for a, b in zip(ratios, ratios[1:])) and ratios[-1] >= growth_threshold * ratios[0]
    stable = max(ratios) <= growth_threshold * min(ratios)
    return ModerationResult(stable and not grows, max(ratios), tuple(ratios), tuple(radii))


# ---------------------------------------------------------------- families


class CoveringFamily(ABC):
    """An infinite covering, materialized by truncation radius."""

    kind: str = ""
    label: str = ""
    dim: int = 1

    @abstractmethod
    def build(self, radius: float, budget: OracleBudget | None = None) -> Covering: ...

    @abstractmethod
    def radius_for(self, other: Covering) -> float:
        """A radius whose truncation contains every set of this family that
        meets a set of ``other``."""

    @abstractmethod
    def parameters(self) -> dict: ...

    def to_json(self) -> dict:
        return {"label": self.label, "dimension": self.dim, "kind": self.kind, "parameters": self.parameters()}


def _interval_set(lo: Any, hi: Any) -> AffineImage:
    return AffineImage([[1]], [0], BaseSet.from_bounds([lo], [hi]))


class _OneDimensional(CoveringFamily):
    positive: bool = False

    def window(self, radius: float) -> AnnulusWindow:
        if self.positive:
            return AnnulusWindow(hi=float(radius), lo=1.0 / float(radius), positive=True)
        return AnnulusWindow(hi=float(radius))

    def radius_for(self, other: Covering) -> float:
        lo, hi = other.extent
        R = max(4.0 * float(other.radius or 1.0), 1.01 * float(max(abs(lo[0]), abs(hi[0]))))
        if self.positive and lo[0] > 0:
            R = max(R, 1.01 / float(lo[0]))
        return R

    def _select(self, radius: float, items: Iterable[tuple[Any, Any, Any]], budget: OracleBudget | None) -> Covering:
        win = self.window(radius)
        sets, keys = [], []
        for key, lo, hi in items:
            lf, hf = ex.to_float(lo), ex.to_float(hi)
            if self.positive:
                if hf > win.lo and lf < win.hi:
                    sets.append(_interval_set(lo, hi))
                    keys.append(key)
            elif lf < win.hi and hf > -win.hi:
                sets.append(_interval_set(lo, hi))
                keys.append(key)
        return Covering(sets, label=self.label, window=win, keys=keys, radius=float(radius), family=self, budget=budget)


class UniformFamily(_OneDimensional):
    """Intervals (k*step + offset - length/2, k*step + offset + length/2).

    On the positive half-line only indices with a positive right end are
    used and intervals are clipped at 0.
    """

    kind = "uniform"

    def __init__(self, step: Any = 1, length: Any = 2, *, positive: bool = False, offset: Any = 0, label: str = ""):
        self.step, self.length, self.offset = (ex.parse_scalar(v) if isinstance(v, str) else v for v in (step, length, offset))
        if ex.to_float(self.length) <= ex.to_float(self.step):
            raise CoveringError("length must exceed step, otherwise the intervals leave gaps")
        self.positive = positive
        self.label = label or f"uniform(step={self.step}, length={self.length})"

    def parameters(self) -> dict:
        return {
            "step": ex.format_scalar(self.step),
            "length": ex.format_scalar(self.length),
            "offset": ex.format_scalar(self.offset),
            "domain": "positive" if self.positive else "real",
        }

    def build(self, radius: float, budget: OracleBudget | None = None) -> Covering:
        step, half, off = self.step, Fraction(self.length) / 2 if ex.is_exact(self.length) else self.length / 2, self.offset
        sf = ex.to_float(step)
        kmax = int(math.ceil((float(radius) + ex.to_float(half) + abs(ex.to_float(off))) / sf)) + 1

        def items():
            for k in range(-kmax, kmax + 1):
                c = k * step + off
                lo, hi = c - half, c + half
                if self.positive:
                    if ex.to_float(hi) <= 0:
                        continue
                    if ex.to_float(lo) < 0:
                        lo = 0
                yield k, lo, hi

        return self._select(radius, items(), budget)


class DyadicFamily(_OneDimensional):
    """Bands base^k * (lower, upper) on (0, inf); defaults 2^k (2/3, 5/3).

    The bands are open, so neighbours overlap instead of touching; each band
    has length base^k when upper - lower = 1.
    """

    kind = "dyadic"
    positive = True

    def __init__(self, lower: Any = Fraction(2, 3), upper: Any = Fraction(5, 3), base: int = 2, label: str = ""):
        self.lower, self.upper = (ex.parse_scalar(v) if isinstance(v, str) else v for v in (lower, upper))
        self.base = int(base)
        if not (0 < ex.to_float(self.lower) < ex.to_float(self.upper)):
            raise CoveringError("need 0 < lower < upper")
        if ex.to_float(self.upper) * 1.0 <= ex.to_float(self.lower) * self.base:
            raise CoveringError("consecutive bands must overlap: need upper > base * lower")
        self.label = label or "dyadic"

    def parameters(self) -> dict:
        return {"lower": ex.format_scalar(self.lower), "upper": ex.format_scalar(self.upper), "base": self.base}

    def build(self, radius: float, budget: OracleBudget | None = None) -> Covering:
        R = float(radius)
        kmin = math.floor(math.log(1.0 / (R * ex.to_float(self.upper)), self.base)) - 1
        kmax = math.ceil(math.log(R / ex.to_float(self.lower), self.base)) + 1

        def items():
            for k in range(kmin, kmax + 1):
                scale = Fraction(self.base) ** k
                yield k, scale * self.lower, scale * self.upper

        return self._select(R, items(), budget)


class AlphaModulationFamily(_OneDimensional):
    """Balls B(k|k|^beta, r|k|^beta), beta = alpha / (1 - alpha), k in Z.

    For beta > 0 the k = 0 ball is empty and is left out.  Coverage of each
    truncation is checked on a grid with spacing min radius / 8.
    """

    kind = "alpha_modulation"

    def __init__(self, alpha: Any, r: Any | None = None, label: str = ""):
        alpha = ex.parse_scalar(alpha) if isinstance(alpha, str) else alpha
        if not 0 <= ex.to_float(alpha) < 1:
            raise CoveringError("alpha must lie in [0, 1)")
        self.alpha = alpha
        self.beta = alpha / (1 - alpha) if ex.is_exact(alpha) else alpha / (1.0 - alpha)
        self.r = (1 + self.beta) if r is None else (ex.parse_scalar(r) if isinstance(r, str) else r)
        self.label = label or f"alpha-modulation(alpha={ex.format_scalar(alpha)})"

    def parameters(self) -> dict:
        return {"alpha": ex.format_scalar(self.alpha), "r": ex.format_scalar(self.r)}

    def center_radius(self, k: int) -> tuple[Any, Any]:
        beta = self.beta
        if ex.is_exact(beta) and Fraction(beta).denominator == 1:
            m = abs(k) ** int(beta)
            return k * m, self.r * m
        m = abs(k) ** float(beta)
        return k * m, ex.to_float(self.r) * m

    def build(self, radius: float, budget: OracleBudget | None = None) -> Covering:
        R = float(radius)
        ks = []
        k = 0 if ex.to_float(self.beta) == 0 else 1
        while True:
            c, rad = self.center_radius(k)
            if ex.to_float(c) - ex.to_float(rad) >= R:
                break
            ks.append(k)
            k += 1
        ks = sorted(set([-k for k in ks] + ks))

        def items():
            for k in ks:
                c, rad = self.center_radius(k)
                yield k, c - rad, c + rad

        cov = self._select(R, items(), budget)
        _check_grid_coverage(cov, R)
        return cov


def _check_grid_coverage(cov: Covering, R: float) -> None:
    """Every grid point of (-R, R) with spacing (min radius)/8 lies in a set."""
    bounds = [_interval_bounds(s) for s in cov.sets]
    lo = np.array([float(a) for a, _ in bounds])
    hi = np.array([float(b) for _, b in bounds])
    spacing = float(np.min(hi - lo)) / 16.0
    grid = np.arange(-R + spacing / 2, R, spacing)
    order = np.argsort(lo)
    run_hi = np.maximum.accumulate(hi[order])
    pos = np.searchsorted(lo[order], grid, side="left") - 1
    covered = (pos >= 0) & (run_hi[np.maximum(pos, 0)] > grid)
    if not np.all(covered):
        bad = grid[~covered][:5].tolist()
        raise CoveringError(f"truncation does not cover the window; uncovered grid points include {bad}")


class ExplicitFamily(CoveringFamily):
    """A fixed finite list of sets; the radius is ignored."""

    kind = "explicit"

    def __init__(self, sets: Sequence[CoveringSet], label: str = ""):
        self.sets = list(sets)
        self.dim = self.sets[0].dim if self.sets else 1
        self.label = label or "explicit"

    def parameters(self) -> dict:
        return {"sets": [s.to_json() for s in self.sets]}

    def build(self, radius: float | None = None, budget: OracleBudget | None = None) -> Covering:
        return Covering(self.sets, label=self.label, radius=radius, family=self, budget=budget)

    def radius_for(self, other: Covering) -> float:
        return float(other.radius or 1.0)


def remark_covering() -> Covering:
    """Six intervals [0,2], [1.5,3.5], ..., [7.5,9.5] (open)."""
    sets = [_interval_set(Fraction(3 * k, 2), Fraction(3 * k, 2) + 2) for k in range(6)]
    return ExplicitFamily(sets, label="six overlapping intervals").build()


class InducedFamily(CoveringFamily):
    """Sets p(h_i U) = h_i^{-T} Q for lattice points h_i = h(k delta, m eps).

    ``Q`` is a frequency box around xi_0 = e_1 and U = p^{-1}(Q).  The
    truncation of radius R keeps lattice points with |r| <= R and |t_j| <= R
    in the identity component (or both components when requested).
    """

    kind = "induced"

    def __init__(
        self,
        group: ShearletGroupSpec,
        base: BaseSet | None = None,
        delta: Any = 1,
        eps: Any = 1,
        offset: Sequence[Any] | None = None,
        components: Sequence[int] = (1,),
        label: str = "",
    ):
        self.group = group
        self.dim = group.d
        self.base = base or default_induced_base(group)
        if self.base.dim != group.d:
            raise CoveringError("base set dimension must equal the group dimension")
        if not self.base.contains_array(np.eye(group.d)[:1])[0]:
            raise CoveringError("base set must contain xi_0 = e_1")
        self.delta = float(delta)
        n = group.n
        self.eps = np.full(n, float(eps)) if np.isscalar(eps) else np.array([float(v) for v in eps])
        self.offset = np.zeros(n + 1) if offset is None else np.array([float(v) for v in offset])
        self.components = tuple(components)
        self.label = label or f"induced({group.label}, delta={self.delta:g})"

    def parameters(self) -> dict:
        return {
            "group": self.group.to_json(),
            "base": self.base.to_json(),
            "delta": self.delta,
            "eps": self.eps.tolist(),
            "offset": self.offset.tolist(),
            "components": list(self.components),
        }

    def lattice_coords(self, radius: float) -> list[tuple[int, float, tuple, tuple]]:
        R = float(radius)
        n = self.group.n
        kr = range(math.ceil((-R - self.offset[0]) / self.delta - 1e-12), math.floor((R - self.offset[0]) / self.delta + 1e-12) + 1)
        mranges = [
            range(
                math.ceil((-R - self.offset[j + 1]) / self.eps[j] - 1e-12),
                math.floor((R - self.offset[j + 1]) / self.eps[j] + 1e-12) + 1,
            )
            for j in range(n)
        ]
        out = []
        for sgn in self.components:
            for k in kr:
                for m in np.ndindex(*[len(r) for r in mranges]):
                    mm = tuple(mranges[j][m[j]] for j in range(n))
                    r = k * self.delta + self.offset[0]
                    t = tuple(mm[j] * self.eps[j] + self.offset[j + 1] for j in range(n))
                    out.append((sgn, r, t, (sgn, k, *mm)))
        return out

    def build(self, radius: float, budget: OracleBudget | None = None) -> Covering:
        sets, keys = [], []
        for sgn, r, t, key in self.lattice_coords(radius):
            g = self.group.element(r, t, eps=sgn)
            sets.append(Pullback(g, self.base))
            keys.append(key)
        return Covering(
            sets,
            label=self.label,
            window=CoordinateWindow(self.group, float(radius), self.components),
            keys=keys,
            radius=float(radius),
            family=self,
            budget=budget,
        )

    def coordinate_box_of_base(self) -> tuple[Interval, list[Interval]]:
        """Interval enclosure of U = p^{-1}(Q) in (r, t) coordinates."""
        lo, hi = self.base.bbox()
        if lo[0] <= 0:
            raise CoveringError("base set must lie in x_1 > 0")
        r = Interval(math.log(lo[0]), math.log(hi[0]))
        ts = []
        for j, lam in enumerate(self.group.lam):
            scale = iexp(r * (-ex.to_float(lam)))
            ts.append(Interval(lo[j + 1], hi[j + 1]) * scale)
        return r, ts

    def radius_for(self, other: Covering) -> float:
        if other.family is None or not isinstance(other.family, InducedFamily):
            raise CoveringError("induced families can only be compared with induced coverings here")
        if other.family.group.lam != self.group.lam or other.family.group.structure != self.group.structure:
            raise CoveringError("induced coverings of different groups live on different coordinate systems")
        g = self.group
        R = float(other.radius)
        ur, ut = other.family.coordinate_box_of_base()
        vr, vt = self.coordinate_box_of_base()
        # h_j in h_i U V^{-1}
        ir, it = g.invert_coords(vr, vt, exp=iexp)
        wr, wt = g.multiply_coords(ur, ut, ir, it, exp=iexp)
        br, bt = Interval(-R, R), [Interval(-R, R)] * g.n
        fr, ft = g.multiply_coords(br, bt, wr, wt, exp=iexp)
        return max([fr.magnitude] + [v.magnitude for v in ft]) + max(self.delta, *self.eps)


def induced_covering(
    group: ShearletGroupSpec,
    base: BaseSet | None = None,
    radius: float = 4.0,
    delta: Any = 1,
    eps: Any = 1,
    budget: OracleBudget | None = None,
) -> Covering:
    return InducedFamily(group, base, delta=delta, eps=eps).build(radius, budget)


def default_induced_base(group: ShearletGroupSpec) -> BaseSet:
    """x_1 in (e^{-3/4}, e^{3/4}), |x_j| < 1: covers the orbit for unit spacing."""
    lo = [math.exp(-0.75)] + [-1.0] * group.n
    hi = [math.exp(0.75)] + [1.0] * group.n
    return BaseSet.from_bounds(lo, hi)


def check_orbit_coverage(cov: Covering, samples: int = 512, seed: int = 0, margin: float = 1.0) -> list:
    """Random orbit points inside the window shrunk by ``margin``; returns
    the uncovered ones (empty list when coverage holds on the sample)."""
    fam = cov.family
    if not isinstance(fam, InducedFamily):
        raise TypeError("coverage sampling is defined for induced coverings")
    rng = np.random.default_rng(seed)
    R = max(float(cov.radius) - margin, 0.0)
    n = fam.group.n
    r = rng.uniform(-R, R, samples)
    t = rng.uniform(-R, R, (samples, n))
    eps = rng.choice(np.array(fam.components, dtype=float), samples)
    pts = fam.group.orbit_map_array(eps, r, t)
    located = cov.locate_many(pts)
    return [tuple(p) for p, hits in zip(pts.tolist(), located) if not hits]


# -------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class DirectionCounts:
    radii: tuple
    lower: tuple
    upper: tuple
    witnesses: tuple  # key of the set attaining the max, per radius


@dataclass(frozen=True)
class WeakEquivalenceResult:
    verdict: str
    forward: DirectionCounts
    backward: DirectionCounts
    growth_threshold: float
    note: str = ""

    def to_json(self) -> dict:
        def d(c: DirectionCounts):
            return {
                "radii": list(c.radii),
                "max_count_lower": list(c.lower),
                "max_count_upper": list(c.upper),
                "witness_keys": [list(k) if isinstance(k, tuple) else k for k in c.witnesses],
            }

        return {
            "verdict": self.verdict,
            "forward": d(self.forward),
            "backward": d(self.backward),
            "growth_threshold": self.growth_threshold,
            "note": self.note,
        }


def _family_of(x: Covering | CoveringFamily) -> CoveringFamily:
    if isinstance(x, CoveringFamily):
        return x
    if x.family is None:
        raise ValueError("covering has no family; cannot rebuild at other radii")
    return x.family


def _direction(qf: CoveringFamily, pf: CoveringFamily, radii, budget) -> DirectionCounts:
    lo, hi, wit = [], [], []
    for R in radii:
        q = qf.build(R, budget)
        p = pf.build(pf.radius_for(q), budget)
        sc = subordination_count(q, p)
        lo.append(sc.max_lower)
        hi.append(sc.max_upper)
        wit.append(q.keys[sc.argmax])
    return DirectionCounts(tuple(radii), tuple(lo), tuple(hi), tuple(wit))


def _certified_growth(values: Sequence[int], threshold: float) -> bool:
    return (
        len(values) >= 3
        and all(b > a for a, b in zip(values, values[1:]))
        and values[0] > 0
        and values[-1] >= threshold * values[0]
    )


def weak_equivalence_verdict(
    q: Covering | CoveringFamily,
    p: Covering | CoveringFamily,
    radii: Sequence[float],
    growth_threshold: float = 2.0,
    budget: OracleBudget | None = None,
) -> WeakEquivalenceResult:
    """Compare overlap counts in both directions over growing truncations."""
    radii = [float(r) for r in radii]
    if len(radii) < 2:
        raise ValueError("need at least two radii")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    qf, pf = _family_of(q), _family_of(p)
    if qf.dim != pf.dim:
        raise DimensionError("coverings live in different dimensions")
    fwd = _direction(qf, pf, radii, budget)
    bwd = _direction(pf, qf, radii, budget)
    if _certified_growth(fwd.lower, growth_threshold) or _certified_growth(bwd.lower, growth_threshold):
        verdict, note = "NOT-EQUIVALENT", "certified lower-bound counts grow monotonically with the window"
    elif all(max(c.upper) < growth_threshold * max(1, min(c.upper)) for c in (fwd, bwd)):
        verdict, note = "EQUIVALENT-evidence", "counts stable on the tested truncations; evidence only"
    else:
        verdict, note = "INDETERMINATE", "counts vary but growth is not certified on three or more radii"
    return WeakEquivalenceResult(verdict, fwd, bwd, growth_threshold, note)


def closed_form_alpha_metric(alpha: Any, s: Any, t: Any) -> float:
    """1 + | |t|^(1-alpha) - sign(st) |s|^(1-alpha) |."""
    a = ex.to_float(alpha)
    s, t = ex.to_float(s), ex.to_float(t)
    if a > 0 and (s == 0 or t == 0):
        raise ValueError("s and t must be nonzero when alpha > 0")
    e = 1.0 - a
    sgn = float(np.sign(s * t))
    return 1.0 + abs(abs(t) ** e - sgn * abs(s) ** e)


def alpha_modulation_covering(alpha: Any, r: Any | None = None, radius: float = 100.0, budget: OracleBudget | None = None) -> Covering:
    return AlphaModulationFamily(alpha, r).build(radius, budget)


def uniform_covering(step: Any = 1, length: Any = 2, radius: float = 100.0, positive: bool = False) -> Covering:
    return UniformFamily(step, length, positive=positive).build(radius)


def dyadic_covering(radius: float = 1024.0) -> Covering:
    return DyadicFamily().build(radius)


# ---------------------------------------------------------------------- io


def _base_from_json(data: dict) -> BaseSet:
    if "lo" in data and "hi" in data:
        return BaseSet.from_bounds([ex.parse_scalar(v) for v in data["lo"]], [ex.parse_scalar(v) for v in data["hi"]])
    kind = data.get("kind", "box")
    center = [ex.parse_scalar(v) for v in data["center"]]
    if kind == "ball":
        return BaseSet.ball(center, ex.parse_scalar(data["radius"]))
    return BaseSet.box(center, [ex.parse_scalar(v) for v in data["half_widths"]])


def _set_from_json(data: dict) -> CoveringSet:
    if "lo" in data and "hi" in data and "base" not in data:
        d = len(data["lo"])
        return AffineImage(ex.identity(d), [Fraction(0)] * d, _base_from_json(data))
    base = _base_from_json(data["base"])
    if data.get("rep", "affine") == "affine":
        T = [[ex.parse_scalar(v) for v in row] for row in data["T"]]
        b = [ex.parse_scalar(v) for v in data["b"]]
        return AffineImage(T, b, base)
    g = [[ex.parse_scalar(v) for v in row] for row in data["g"]]
    return Pullback(g, base)


def family_from_json(data: dict, base_dir: Any = None) -> CoveringFamily:
    """Parse a covering spec document; raises ValueError naming the field."""
    if not isinstance(data, dict):
        raise ValueError("covering spec must be a JSON object")
    kind = data.get("kind")
    params = data.get("parameters", {})
    label = data.get("label", "")
    if not isinstance(params, dict):
        raise ValueError("field 'parameters': expected an object")
    try:
        if kind == "uniform":
            fam: CoveringFamily = UniformFamily(
                ex.parse_scalar(params.get("step", 1)),
                ex.parse_scalar(params.get("length", 2)),
                positive=params.get("domain", "real") == "positive",
                offset=ex.parse_scalar(params.get("offset", 0)),
                label=label,
            )
        elif kind == "dyadic":
            fam = DyadicFamily(
                ex.parse_scalar(params.get("lower", "2/3")), ex.parse_scalar(params.get("upper", "5/3")), int(params.get("base", 2)), label=label
            )
        elif kind == "alpha_modulation":
            if "alpha" not in params:
                raise ValueError("field 'parameters.alpha': required")
            r = params.get("r")
            fam = AlphaModulationFamily(ex.parse_scalar(params["alpha"]), None if r is None else ex.parse_scalar(r), label=label)
        elif kind == "explicit":
            sets = params.get("sets")
            if not isinstance(sets, list) or not sets:
                raise ValueError("field 'parameters.sets': expected a nonempty list")
            fam = ExplicitFamily([_set_from_json(s) for s in sets], label=label)
        elif kind == "induced":
            gdata = params.get("group")
            if isinstance(gdata, str):
                import json
                from pathlib import Path

                path = Path(base_dir or ".") / gdata
                gdata = json.loads(path.read_text())
            if not isinstance(gdata, dict):
                raise ValueError("field 'parameters.group': expected a group spec object or path")
            group = group_from_json(gdata)
            base = _base_from_json(params["base"]) if "base" in params else None
            fam = InducedFamily(
                group,
                base,
                delta=params.get("delta", 1),
                eps=params.get("eps", 1),
                offset=params.get("offset"),
                components=tuple(params.get("components", [1])),
                label=label,
            )
        else:
            raise ValueError(f"field 'kind': unknown covering kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed covering spec: missing or invalid field {exc}") from exc
    except CoveringError as exc:
        raise ValueError(f"field 'parameters': {exc}") from exc
    dim = data.get("dimension")
    if dim is not None and int(dim) != fam.dim:
        raise ValueError(f"field 'dimension': spec says {dim}, sets have dimension {fam.dim}")
    return fam
