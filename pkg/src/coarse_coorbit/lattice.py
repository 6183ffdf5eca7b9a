"""Word metrics on lattices of shearlet groups.

Lattice points are h(k delta, m * eps) for an integer k and an integer
vector m, in each requested sign component.  Two points x, y are adjacent
when x^{-1} y or y^{-1} x lies in the coordinate box
W = {|r| <= a, |t_j| <= a}; graph distance is the word metric on the lattice.

Left multiplication by h(j delta, 0) maps the lattice onto itself and leaves
x^{-1} y unchanged, so the untruncated graph is invariant under it.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np
import sympy as sp
from scipy import sparse
from scipy.sparse import csgraph

from . import exact as ex
from ._interval import Interval, iexp
from .groups import GroupElement, ShearletGroupSpec

Key = tuple  # (eps, k, m_1, ..., m_n)

_TIE = 1e-9


class LatticeError(ValueError):
    """The lattice fails its density or separation check."""


def _scalar(v: Any) -> Any:
    return ex.parse_scalar(v) if isinstance(v, str) else v


class WordMetricLattice:
    """The untruncated lattice; neighbours are enumerated on demand."""

    def __init__(
        self,
        group: ShearletGroupSpec,
        delta: Any = 1,
        eps: Any = 1,
        half_width: Any = Fraction(5, 4),
        components: Sequence[int] = (1,),
    ):
        n = group.n
        self.group = group
        self.delta = _scalar(delta)
        eps_list = [eps] * n if np.isscalar(eps) or isinstance(eps, (Fraction, str)) else list(eps)
        if len(eps_list) != n:
            raise LatticeError(f"need {n} shear spacings")
        self.eps = tuple(_scalar(e) for e in eps_list)
        self.half_width = _scalar(half_width)
        self.components = tuple(components)
        if any(c == -1 for c in self.components) and not group.include_sign_component:
            raise LatticeError("group has no negative component")
        if ex.to_float(self.delta) <= 0 or any(ex.to_float(e) <= 0 for e in self.eps) or ex.to_float(self.half_width) <= 0:
            raise LatticeError("spacings and the window half-width must be positive")
        self._fd = ex.to_float(self.delta)
        self._fe = np.array([ex.to_float(e) for e in self.eps])
        self._fa = ex.to_float(self.half_width)
        self._flam = np.array([ex.to_float(v) for v in group.lam])
        self._terms = [(i, j, k, ex.to_float(c)) for i, j, k, c in group.terms]
        self._cache: dict[Key, tuple] = {}
        self._search = self._search_box()

    # ------------------------------------------------------------ points
    def point(self, key: Key) -> GroupElement:
        sgn, k, *m = key
        return self.group.element(k * self.delta, [mi * e for mi, e in zip(m, self.eps)], eps=sgn)

    def coords(self, key: Key) -> tuple[float, np.ndarray]:
        _, k, *m = key
        return k * self._fd, np.array(m, dtype=float) * self._fe

    def _fmul(self, r1, t1, r2, t2):
        return self.group.multiply_coords(r1, list(t1), r2, list(t2), exp=math.exp)

    def _finv(self, r, t):
        return self.group.invert_coords(r, list(t), exp=math.exp)

    def _search_box(self) -> tuple[float, np.ndarray]:
        """Half-widths of a box containing W and W^{-1}."""
        a = self._fa
        box = Interval(-a, a)
        _, ti = self.group.invert_coords(box, [box] * self.group.n, exp=iexp)
        return a, np.array([max(a, (Interval.of(v)).magnitude) for v in ti])

    # ---------------------------------------------------------- adjacency
    def in_window(self, r: float, t: Sequence[float]) -> bool | None:
        """Float test of h(r, t) in W; None when too close to the boundary."""
        a = self._fa
        worst = max([abs(r)] + [abs(v) for v in t])
        if worst <= a - _TIE * max(1.0, a):
            return True
        if worst > a + _TIE * max(1.0, worst):
            return False
        return None

    def _exact_relative(self, x: Key, y: Key) -> tuple[Any, list]:
        g = self.group.multiply(self.group.invert(self.point(x)), self.point(y))
        return g.r, list(g.t)

    def _exact_in_window(self, r: Any, t: Sequence[Any]) -> bool:
        a = ex.to_sympy(self.half_width) if ex.is_exact(self.half_width) else self.half_width
        vals = [r, *t]
        return all(bool(sp.N(abs(ex.to_sympy(v) if ex.is_exact(v) else v) - a, 60) <= 0) for v in vals)

    def adjacent(self, x: Key, y: Key) -> bool:
        if x[0] != y[0] or x == y:
            return False
        rx, tx = self.coords(x)
        ry, ty = self.coords(y)
        for a, b, ka, kb in ((rx, tx, x, y), (ry, ty, y, x)):
            ri, ti = self._finv(a, b)
            rw, tw = self._fmul(ri, ti, *self.coords(kb))
            verdict = self.in_window(rw, tw)
            if verdict is None:
                verdict = self._exact_in_window(*self._exact_relative(ka, kb))
            if verdict:
                return True
        return False

    def neighbors(self, key: Key) -> tuple:
        """All lattice points adjacent to ``key``."""
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        sgn, k, *m = key
        rx, tx = self.coords(key)
        ar, at = self._search
        n = self.group.n
        out = []
        kmin = math.ceil((rx - ar) / self._fd - 1e-12)
        kmax = math.floor((rx + ar) / self._fd + 1e-12)
        for k2 in range(kmin, kmax + 1):
            rho = k2 * self._fd - rx
            u = tx * np.exp(rho * (1.0 - self._flam))

            def rec(j: int, tau: list, mm: list):
                if j == n:
                    y = (sgn, k2, *mm)
                    if y != key and self.adjacent(key, y):
                        out.append(y)
                    return
                lower = sum(c * tau[i] * u[l] for i, l, kk, c in self._terms if kk == j)
                centre = u[j] + lower
                lo = math.ceil((centre - at[j]) / self._fe[j] - 1e-12)
                hi = math.floor((centre + at[j]) / self._fe[j] + 1e-12)
                for mj in range(lo, hi + 1):
                    rec(j + 1, tau + [mj * self._fe[j] - centre], mm + [mj])

            rec(0, [], [])
        result = tuple(sorted(out))
        self._cache[key] = result
        return result

    # --------------------------------------------------------- snapping
    def snap(self, g: GroupElement | tuple) -> Key:
        """A lattice point x with x^{-1} g small (the nearest in each
        coordinate, chosen triangularly)."""
        if isinstance(g, GroupElement):
            sgn, r, t = g.as_float()
        else:
            sgn, r, t = g
        if sgn not in self.components:
            raise LatticeError(f"component {sgn} is not part of this lattice")
        k = int(round(r / self._fd))
        rho = r - k * self._fd
        # g = x w with x = h(k delta, m eps), w = h(rho, tau)
        scale = np.exp(rho * (1.0 - self._flam))
        n = self.group.n
        tau: list[float] = []
        m: list[int] = []
        u: list[float] = []
        for j in range(n):
            # t_j = tau_j + u_j + sum c tau_i u_l, u_l = m_l eps_l scale_l
            lower_u = sum(c * tau[i] * u[l] for i, l, kk, c in self._terms if kk == j)
            # the tau_i u_l terms with l = j vanish because kk > l
            coeff = self._fe[j] * scale[j]
            mj = int(round((t[j] - lower_u) / coeff))
            m.append(mj)
            u.append(mj * coeff)
            tau.append(t[j] - u[j] - lower_u)
        return (sgn, k, *m)

    def residual(self, g: GroupElement | tuple, key: Key) -> float:
        """max-coordinate size of x^{-1} g for x = point(key)."""
        sgn, r, t = g.as_float() if isinstance(g, GroupElement) else g
        rx, tx = self.coords(key)
        ri, ti = self._finv(rx, tx)
        rw, tw = self._fmul(ri, ti, r, t)
        return max([abs(rw)] + [abs(v) for v in tw])

    # -------------------------------------------------------- validation
    def validate(self, radius: float = 4.0, samples: int = 400, seed: int = 0) -> None:
        """Density: every sampled element is within W of its snapped lattice
        point.  Separation: distinct lattice points differ by more than the
        open box V of half-width min(delta, eps)/2."""
        rng = np.random.default_rng(seed)
        n = self.group.n
        bad = []
        for _ in range(samples):
            sgn = int(rng.choice(self.components))
            r = float(rng.uniform(-radius, radius))
            t = rng.uniform(-radius, radius, n)
            key = self.snap((sgn, r, t))
            if self.residual((sgn, r, t), key) > self._fa:
                bad.append((sgn, r, t.tolist()))
        if bad:
            raise LatticeError(f"lattice is not dense for W: uncovered samples {bad[:5]}")
        v = min([self._fd] + self._fe.tolist()) / 2
        for _ in range(max(1, samples // 10)):
            sgn = int(rng.choice(self.components))
            k = int(rng.integers(-3, 4))
            m = rng.integers(-3, 4, n).tolist()
            x = (sgn, k, *m)
            rx, tx = self.coords(x)
            for y in self.neighbors(x):
                ri, ti = self._finv(rx, tx)
                rw, tw = self._fmul(ri, ti, *self.coords(y))
                if max([abs(rw)] + [abs(z) for z in tw]) < v:
                    raise LatticeError(f"lattice points {x} and {y} are closer than the separation box")

    # -------------------------------------------------------- distances
    def distance(self, x: Key, y: Key, max_nodes: int = 2_000_000) -> float:
        """Word distance by breadth-first search on the untruncated lattice."""
        if x[0] != y[0]:
            return math.inf
        if x == y:
            return 0
        seen = {x: 0}
        queue = deque([x])
        while queue:
            z = queue.popleft()
            dz = seen[z]
            for w in self.neighbors(z):
                if w not in seen:
                    if w == y:
                        return dz + 1
                    seen[w] = dz + 1
                    queue.append(w)
            if len(seen) > max_nodes:
                raise LatticeError("search exceeded its node budget")
        return math.inf

    def box_keys(self, lo: Sequence[float], hi: Sequence[float]) -> list[Key]:
        """Lattice points whose coordinates lie in the box [lo, hi] (r first)."""
        ranges = [range(math.ceil(lo[0] / self._fd - 1e-12), math.floor(hi[0] / self._fd + 1e-12) + 1)]
        for j in range(self.group.n):
            ranges.append(
                range(math.ceil(lo[j + 1] / self._fe[j] - 1e-12), math.floor(hi[j + 1] / self._fe[j] + 1e-12) + 1)
            )
        keys = []
        for sgn in self.components:
            for idx in np.ndindex(*[len(r) for r in ranges]):
                keys.append((sgn, *(ranges[i][idx[i]] for i in range(len(ranges)))))
        return keys

    def truncate(self, radius: float) -> "TruncatedLattice":
        R = float(radius)
        n = self.group.n
        return TruncatedLattice(self, self.box_keys([-R] * (n + 1), [R] * (n + 1)), radius=R)

    def around(self, points: Iterable[GroupElement], margin: float = 2.0) -> "TruncatedLattice":
        """Truncation to the coordinate box of ``points`` enlarged by margin."""
        coords = np.array([[g.as_float()[1], *g.as_float()[2]] for g in points])
        lo = coords.min(axis=0) - margin
        hi = coords.max(axis=0) + margin
        return TruncatedLattice(self, self.box_keys(lo.tolist(), hi.tolist()), radius=None)

    def to_json(self) -> dict:
        return {
            "delta": ex.format_scalar(self.delta),
            "eps": [ex.format_scalar(e) for e in self.eps],
            "half_width": ex.format_scalar(self.half_width),
            "components": list(self.components),
        }


class TruncatedLattice:
    """A finite piece of a lattice with its adjacency graph."""

    def __init__(self, lattice: WordMetricLattice, keys: Sequence[Key], radius: float | None = None):
        self.lattice = lattice
        self.keys = list(keys)
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.radius = radius

    def __len__(self) -> int:
        return len(self.keys)

    @cached_property
    def graph(self) -> sparse.csr_matrix:
        rows, cols = [], []
        for i, key in enumerate(self.keys):
            for nb in self.lattice.neighbors(key):
                j = self.index.get(nb)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
        n = len(self.keys)
        data = np.ones(len(rows), dtype=np.int8)
        g = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
        return g.maximum(g.T).tocsr()

    def distances_from(self, sources: Sequence[int]) -> np.ndarray:
        return csgraph.dijkstra(self.graph, directed=False, indices=list(sources), unweighted=True)

    def distance_matrix(self, keys: Sequence[Key]) -> np.ndarray:
        idx = []
        for k in keys:
            if k not in self.index:
                raise LatticeError(f"lattice point {k} lies outside the truncation")
            idx.append(self.index[k])
        uniq = sorted(set(idx))
        pos = {u: p for p, u in enumerate(uniq)}
        D = self.distances_from(uniq)
        rows = np.array([pos[i] for i in idx])
        return D[rows][:, np.array(idx)]


def build_lattice(
    group: ShearletGroupSpec,
    half_width: Any = Fraction(5, 4),
    radius: float = 4.0,
    delta: Any = 1,
    eps: Any = 1,
    components: Sequence[int] = (1,),
    seed: int = 0,
) -> TruncatedLattice:
    """Validated lattice truncated to the coordinate box of the given radius."""
    lat = WordMetricLattice(group, delta=delta, eps=eps, half_width=half_width, components=components)
    lat.validate(radius=radius, seed=seed)
    return lat.truncate(radius)

