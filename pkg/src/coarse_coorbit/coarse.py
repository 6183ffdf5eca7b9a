"""Sampled metric spaces and an empirical quasi-isometry prober.

The prober can certify REJECT (finitely many witnesses of distortion that
grows with the truncation) but can only collect evidence for acceptance:
quasi-isometry is an asymptotic property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.sparse import csgraph

from .covering import Covering, OutsideWindowError
from .lattice import TruncatedLattice

ASYMMETRY_NOTE = (
    "REJECT is certified by finite witnesses of growing distortion; "
    "EMBEDDING-EVIDENCE only reports constants that stayed stable on the tested truncations"
)

NEAR = 3  # source distances up to this bound are sampled exhaustively


class SampledMetricSpace:
    """Finite sample of points with a distance oracle.

    ``metric(points)`` returns the full distance matrix among any list of
    points of the underlying space (infinite values allowed across
    components).  Distances among ``points`` are cached.
    """

    def __init__(self, points: Sequence[Any], metric: Callable[[Sequence[Any]], np.ndarray], radius: float | None = None, label: str = ""):
        self.points = list(points)
        self.metric = metric
        self.radius = radius
        self.label = label
        self._matrix: np.ndarray | None = None

    @classmethod
    def from_matrix(cls, points: Sequence[Any], matrix: np.ndarray, radius: float | None = None, label: str = "") -> "SampledMetricSpace":
        D = np.asarray(matrix, dtype=float)
        index = {id(p): i for i, p in enumerate(points)}

        def metric(pts):
            idx = [index[id(p)] for p in pts]
            return D[np.ix_(idx, idx)]

        space = cls(points, metric, radius, label)
        space._matrix = D
        return space

    def __len__(self) -> int:
        return len(self.points)

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.asarray(self.metric(self.points), dtype=float)
        return self._matrix

    def triangle_violations(self, samples: int = 2000, seed: int = 0) -> list[tuple[int, int, int]]:
        """Seeded spot check of d(x,z) <= d(x,y) + d(y,z)."""
        D = self.matrix
        n = len(self.points)
        if n < 3:
            return []
        rng = np.random.default_rng(seed)
        trip = rng.integers(0, n, size=(samples, 3))
        a, b, c = trip.T
        bad = D[a, c] > D[a, b] + D[b, c] + 1e-9
        return [tuple(int(v) for v in t) for t in trip[bad]]


# ----------------------------------------------------------- concrete metrics


def _set_distances(covering: Covering, sources: Sequence[int], targets: Sequence[int], include_indeterminate: bool, chunk: int = 256) -> np.ndarray:
    """Nerve hop distances from each source set to each target set."""
    G = covering.graph(include_indeterminate)
    targets = np.asarray(targets, dtype=np.int64)
    out = np.empty((len(sources), len(targets)))
    for k in range(0, len(sources), chunk):
        block = list(sources[k : k + chunk])
        D = csgraph.dijkstra(G, directed=False, indices=block, unweighted=True)
        out[k : k + len(block)] = D[:, targets]
    return out


def _locate(covering: Covering, points: Sequence[Any]) -> tuple[np.ndarray, list]:
    pts = np.array([np.atleast_1d(np.asarray(p, dtype=float)) for p in points])
    hits = covering.locate_many(pts)
    for p, h in zip(pts, hits):
        if not h:
            raise OutsideWindowError(f"point {p.tolist()} is not covered by the truncation")
    return pts, hits


def _padded(hits: list, pos: dict) -> np.ndarray:
    width = max(len(h) for h in hits)
    return np.array([[pos[i] for i in h] + [pos[h[-1]]] * (width - len(h)) for h in hits], dtype=np.int64)


def chain_distances(covering: Covering, xs: Sequence[Any], ys: Sequence[Any], include_indeterminate: bool = False) -> np.ndarray:
    """Chain distance matrix between two point lists."""
    px, hx = _locate(covering, xs)
    py, hy = _locate(covering, ys)
    src = sorted({i for h in hx for i in h})
    tgt = sorted({i for h in hy for i in h})
    D = _set_distances(covering, src, tgt, include_indeterminate)
    ax = _padded(hx, {s: k for k, s in enumerate(src)})
    ay = _padded(hy, {t: k for k, t in enumerate(tgt)})
    # min over the sets of x, then over the sets of y
    rows = D[ax].min(axis=1)  # (len(xs), len(tgt))
    out = rows[:, ay].min(axis=2) + 1.0
    same = np.all(px[:, None, :] == py[None, :, :], axis=2)
    out[same] = 0.0
    return out


def chain_pair_distances(covering: Covering, xs: Sequence[Any], ys: Sequence[Any], include_indeterminate: bool = False) -> np.ndarray:
    """Chain distance of each pair (xs[k], ys[k])."""
    px, hx = _locate(covering, xs)
    py, hy = _locate(covering, ys)
    src = sorted({i for h in hx for i in h})
    tgt = sorted({i for h in hy for i in h})
    D = _set_distances(covering, src, tgt, include_indeterminate)
    ax = _padded(hx, {s: k for k, s in enumerate(src)})
    ay = _padded(hy, {t: k for k, t in enumerate(tgt)})
    vals = D[ax[:, :, None], ay[:, None, :]].min(axis=(1, 2)) + 1.0
    vals[np.all(px == py, axis=1)] = 0.0
    return vals


def chain_metric(covering: Covering, include_indeterminate: bool = False) -> Callable[[Sequence[Any]], np.ndarray]:
    """Chain distance among frequency points (arrays of shape (d,))."""

    def metric(points: Sequence[Any]) -> np.ndarray:
        D = chain_distances(covering, points, points, include_indeterminate)
        return np.minimum(D, D.T)

    return metric


def word_metric(lattice: TruncatedLattice) -> Callable[[Sequence[Any]], np.ndarray]:
    """Word distance among group elements, via their snapped lattice points."""

    def metric(points: Sequence[Any]) -> np.ndarray:
        keys = [lattice.lattice.snap(g) for g in points]
        return lattice.distance_matrix(keys)

    return metric


def chain_space(covering: Covering, points: Sequence[Any], label: str = "") -> SampledMetricSpace:
    return SampledMetricSpace(points, chain_metric(covering), covering.radius, label or covering.label)


def word_space(lattice: TruncatedLattice, points: Sequence[Any], label: str = "") -> SampledMetricSpace:
    return SampledMetricSpace(points, word_metric(lattice), lattice.radius, label or "word metric")


# --------------------------------------------------------------------- probe


@dataclass
class Envelope:
    radius: float | None
    bins: list  # (d_source, min image, max image, pairs)
    L: float
    C: float
    K: float
    pairs: int
    near_max: float  # max image distance over source distances 1..NEAR
    near_pair: tuple
    mirror_max: float  # max source distance over image distances 1..NEAR
    mirror_pair: tuple
    components_source: int
    components_image: int

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "L": self.L,
            "C": self.C,
            "K": self.K,
            "pairs": self.pairs,
            "near_max_image": self.near_max,
            "mirror_max_source": self.mirror_max,
            "components": [self.components_source, self.components_image],
            "bins": [{"d_source": b, "d_image_min": lo, "d_image_max": hi, "pairs": c} for b, lo, hi, c in self.bins],
        }


@dataclass
class QIReport:
    verdict: str
    reason: str
    envelopes: list
    L: float
    C: float
    K: float
    witnesses: list = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)
    note: str = ASYMMETRY_NOTE

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "L": self.L,
            "C": self.C,
            "K": self.K,
            "envelopes": [e.to_json() for e in self.envelopes],
            "witnesses": [list(w) for w in self.witnesses],
            "thresholds": self.thresholds,
            "note": self.note,
        }

    def csv_rows(self) -> list[tuple]:
        return [(e.radius, b, lo, hi) for e in self.envelopes for b, lo, hi, _ in e.bins]


def _components(D: np.ndarray) -> int:
    finite = np.isfinite(D)
    n, _ = csgraph.connected_components(finite.astype(np.int8), directed=False)
    return int(n)


def _pairs(DX: np.ndarray, DY: np.ndarray, budget: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = DX.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    near = (DX[iu, ju] <= NEAR) | (DY[iu, ju] <= NEAR)
    chosen = np.flatnonzero(near)
    rest = np.flatnonzero(~near)
    if rest.size > budget:
        rest = np.sort(rng.choice(rest, size=budget, replace=False))
    idx = np.concatenate([chosen, rest])
    return iu[idx], ju[idx]


def _fit(dx: np.ndarray, dy: np.ndarray) -> tuple[float, float, list]:
    bins = []
    L = 1.0
    for b in np.unique(dx.astype(int)):
        sel = dx.astype(int) == b
        lo, hi = float(dy[sel].min()), float(dy[sel].max())
        bins.append((int(b), lo, hi, int(sel.sum())))
        if b >= 1:
            L = max(L, hi / b, b / max(lo, 1.0))
    resid = np.maximum(dy - L * dx, dx / L - dy)
    C = float(max(0.0, resid.max())) if resid.size else 0.0
    return L, C, bins


def _strictly_growing(values: Sequence[float], threshold: float) -> bool:
    return (
        len(values) >= 3
        and all(b > a for a, b in zip(values, values[1:]))
        and values[0] > 0
        and values[-1] >= threshold * values[0]
    )


def _stable(values: Sequence[float], factor: float) -> bool:
    return max(values) <= factor * min(values)


def qi_probe(
    f: Callable[[Any], Any],
    spaces: Sequence[tuple[SampledMetricSpace, SampledMetricSpace]],
    pair_budget: int = 1000,
    seed: int = 0,
    growth_threshold: float = 2.0,
    stability: float = 1.5,
) -> QIReport:
    """Probe whether f is a quasi-isometry, one (X, Y) pair per radius.

    Y's own sample is used for the coarse-surjectivity gap K.
    """
    if pair_budget < 1000:
        raise ValueError("pair budget must be at least 1000")
    if not spaces:
        raise ValueError("need at least one pair of spaces")
    rng = np.random.default_rng(seed)
    envelopes: list[Envelope] = []
    for X, Y in spaces:
        DX = X.matrix
        images = [f(p) for p in X.points]
        combined = images + list(Y.points)
        Dall = np.asarray(Y.metric(combined), dtype=float)
        n = len(images)
        DY = Dall[:n, :n]
        K = float(np.max(np.min(Dall[:n, n:], axis=0))) if len(Y.points) else 0.0
        cs, ci = _components(DX), _components(DY)
        i, j = _pairs(DX, DY, pair_budget, rng)
        dx, dy = DX[i, j], DY[i, j]
        both = np.isfinite(dx) & np.isfinite(dy)
        if np.any(np.isfinite(dx) != np.isfinite(dy)) or cs != ci:
            bad = np.flatnonzero(np.isfinite(dx) != np.isfinite(dy))
            wit = [(int(i[b]), int(j[b])) for b in bad[:5]]
            env = Envelope(X.radius, [], math.inf, math.inf, K, int(len(dx)), math.inf, (), math.inf, (), cs, ci)
            return QIReport("REJECT", "component-mismatch", envelopes + [env], math.inf, math.inf, K, wit, _thresholds(pair_budget, growth_threshold, stability, seed))
        dx, dy, i, j = dx[both], dy[both], i[both], j[both]
        L, C, bins = _fit(dx, dy)
        near = (dx >= 1) & (dx <= NEAR)
        if near.any():
            a = np.flatnonzero(near)[np.argmax(dy[near])]
            near_max, near_pair = float(dy[a]), (int(i[a]), int(j[a]), float(dx[a]), float(dy[a]))
        else:
            near_max, near_pair = 0.0, ()
        mnear = (dy >= 1) & (dy <= NEAR)
        if mnear.any():
            a = np.flatnonzero(mnear)[np.argmax(dx[mnear])]
            mirror_max, mirror_pair = float(dx[a]), (int(i[a]), int(j[a]), float(dx[a]), float(dy[a]))
        else:
            mirror_max, mirror_pair = 0.0, ()
        envelopes.append(Envelope(X.radius, bins, L, C, K, int(len(dx)), near_max, near_pair, mirror_max, mirror_pair, cs, ci))

    thresholds = _thresholds(pair_budget, growth_threshold, stability, seed)
    Ls = [e.L for e in envelopes]
    Cs = [e.C for e in envelopes]
    L, C, K = max(Ls), max(Cs), max(e.K for e in envelopes)
    near = [e.near_max for e in envelopes]
    mirror = [e.mirror_max for e in envelopes]
    # growth only counts once it escapes the affine bound fitted at the first radius
    first = envelopes[0]
    bound = first.L * NEAR + first.C
    if _strictly_growing(near, growth_threshold) and near[-1] > bound:
        wit = [e.near_pair for e in envelopes]
        return QIReport("REJECT", "upper-envelope-growth", envelopes, L, C, K, wit, thresholds)
    if _strictly_growing(mirror, growth_threshold) and mirror[-1] > bound:
        wit = [e.mirror_pair for e in envelopes]
        return QIReport("REJECT", "lower-envelope-growth", envelopes, L, C, K, wit, thresholds)
    if _stable(Ls, stability) and _stable([c + 1 for c in Cs], stability):
        return QIReport("EMBEDDING-EVIDENCE", "constants-stable", envelopes, L, C, K, [], thresholds)
    return QIReport("INDETERMINATE", "constants-unstable", envelopes, L, C, K, [], thresholds)


def _thresholds(budget, growth, stability, seed) -> dict:
    return {
        "pair_budget": budget,
        "growth_threshold": growth,
        "stability_factor": stability,
        "near_source_distance": NEAR,
        "seed": seed,
    }


def fit_multiplicative(dx: np.ndarray, dy: np.ndarray, additive: float) -> float:
    """Smallest L with dx/L - additive <= dy <= L dx + additive on all pairs."""
    dx, dy = np.asarray(dx, float), np.asarray(dy, float)
    L = 1.0
    up = dy > additive
    if up.any():
        L = max(L, float(np.max((dy[up] - additive) / np.maximum(dx[up], 1e-300))))
    lo = dx > additive
    if lo.any():
        L = max(L, float(np.max(dx[lo] / np.maximum(dy[lo] + additive, 1e-300))))
    return L


# ----------------------------------------------------------------- closeness


@dataclass(frozen=True)
class Closeness:
    max_distances: tuple
    radii: tuple
    close: bool


def closeness(
    f: Callable[[Any], Any],
    g: Callable[[Any], Any],
    spaces: Sequence[tuple[SampledMetricSpace, SampledMetricSpace]],
    growth_threshold: float = 2.0,
) -> Closeness:
    """sup_x d_Y(f(x), g(x)) per radius; close when the sup does not grow."""
    values, radii = [], []
    for X, Y in spaces:
        imgs_f = [f(p) for p in X.points]
        imgs_g = [g(p) for p in X.points]
        n = len(imgs_f)
        D = np.asarray(Y.metric(imgs_f + imgs_g), dtype=float)
        values.append(float(np.max(D[np.arange(n), n + np.arange(n)])) if n else 0.0)
        radii.append(X.radius)
    shifted = [v + 1 for v in values]
    grows = _strictly_growing(shifted, growth_threshold) or (len(values) >= 2 and values[-1] > growth_threshold * max(values[0], 1))
    return Closeness(tuple(values), tuple(radii), all(math.isfinite(v) for v in values) and not grows)


# -------------------------------------------------------- large-scale geodesic


@dataclass(frozen=True)
class GeodesicCheck:
    geodesic: bool | None  # None: chain construction failed
    a: float
    b: float
    pairs: int
    failures: int


def large_scale_geodesic_check(X: SampledMetricSpace, c: float, pairs: int = 200, seed: int = 0) -> GeodesicCheck:
    """Greedy c-step chains between sampled pairs; fit n <= a d + b.

    Pairs in different components are skipped.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    D = X.matrix
    n = len(X.points)
    rng = np.random.default_rng(seed)
    cand = [(int(i), int(j)) for i, j in zip(*np.triu_indices(n, k=1)) if math.isfinite(D[i, j])]
    if len(cand) > pairs:
        pick = rng.choice(len(cand), size=pairs, replace=False)
        cand = [cand[k] for k in sorted(pick)]
    lengths, dists, failures = [], [], 0
    for i, j in cand:
        cur, steps = i, 0
        while cur != j:
            step_ok = np.flatnonzero(D[cur] <= c + 1e-12)
            nxt = int(step_ok[np.argmin(D[step_ok, j])])
            if D[nxt, j] >= D[cur, j]:
                failures += 1
                break
            cur, steps = nxt, steps + 1
        else:
            lengths.append(steps)
            dists.append(D[i, j])
    if failures or not lengths:
        return GeodesicCheck(None, math.nan, math.nan, len(cand), failures)
    nl, dl = np.array(lengths, float), np.array(dists, float)
    a = float(np.max(nl / np.maximum(dl, 1e-300)))
    b = float(max(0.0, np.max(nl - a * dl)))
    return GeodesicCheck(True, a, b, len(cand), failures)
