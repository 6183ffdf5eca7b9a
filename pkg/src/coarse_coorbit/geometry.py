"""Covering sets in frequency space and a certified intersection oracle.

Every covering set is the preimage of an open base set (axis box or
Euclidean ball) under an affine map ``z = A x + c``:

* ``AffineImage(T, b, Q) = T Q + b``      gives ``A = T^{-1}``, ``c = -T^{-1} b``
* ``Pullback(g, Q) = {x : g^T x in Q}``   gives ``A = g^T``, ``c = 0``

Sets are open, so boundary points are outside.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from . import exact as ex


class Tri(str, enum.Enum):
    YES = "YES"
    NO = "NO"
    INDETERMINATE = "INDETERMINATE"


class DimensionError(ValueError):
    pass


def _vec(x: Any) -> tuple:
    if np.isscalar(x) or isinstance(x, Fraction):
        return (x,)
    return tuple(x)


@dataclass(frozen=True)
class BaseSet:
    """Open axis box (half-widths per axis) or open Euclidean ball (radius)."""

    kind: str
    center: tuple
    size: tuple

    def __post_init__(self):
        if self.kind not in ("box", "ball"):
            raise ValueError("kind must be 'box' or 'ball'")
        if self.kind == "ball" and len(self.size) != 1:
            raise ValueError("a ball has one radius")
        if self.kind == "box" and len(self.size) != len(self.center):
            raise ValueError("box needs one half-width per axis")
        if any(ex.to_float(s) <= 0 for s in self.size):
            raise ValueError("sizes must be positive")

    @staticmethod
    def box(center: Sequence[Any], half_widths: Sequence[Any]) -> "BaseSet":
        return BaseSet("box", _vec(center), _vec(half_widths))

    @staticmethod
    def from_bounds(lo: Sequence[Any], hi: Sequence[Any]) -> "BaseSet":
        lo, hi = _vec(lo), _vec(hi)
        center = tuple((a + b) / 2 if not (ex.is_exact(a) and ex.is_exact(b)) else Fraction(a + b) / 2 for a, b in zip(lo, hi))
        half = tuple((b - a) / 2 if not (ex.is_exact(a) and ex.is_exact(b)) else Fraction(b - a) / 2 for a, b in zip(lo, hi))
        return BaseSet("box", center, half)

    @staticmethod
    def ball(center: Sequence[Any], radius: Any) -> "BaseSet":
        return BaseSet("ball", _vec(center), (radius,))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def is_exact(self) -> bool:
        return ex.all_exact(self.center) and ex.all_exact(self.size)

    def volume(self) -> Any:
        if self.kind == "box":
            v = 1
            for h in self.size:
                v = v * 2 * h
            return v
        r = self.size[0]
        if self.dim == 1:
            return 2 * r
        return math.pi ** (self.dim / 2) / math.gamma(self.dim / 2 + 1) * ex.to_float(r) ** self.dim

    def contains(self, z: Sequence[Any]) -> bool:
        if self.kind == "box":
            return all(abs(zi - ci) < h for zi, ci, h in zip(z, self.center, self.size))
        return sum((zi - ci) ** 2 for zi, ci in zip(z, self.center)) < self.size[0] ** 2

    # float arrays for the vectorized oracle
    @cached_property
    def fc(self) -> np.ndarray:
        return np.array([ex.to_float(c) for c in self.center])

    @cached_property
    def fs(self) -> np.ndarray:
        return np.array([ex.to_float(s) for s in self.size])

    def contains_array(self, z: np.ndarray) -> np.ndarray:
        """z has shape (N, d)."""
        if self.kind == "box":
            return np.all(np.abs(z - self.fc) < self.fs, axis=1)
        return np.sum((z - self.fc) ** 2, axis=1) < self.fs[0] ** 2

    def classify(self, cz: np.ndarray, hz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """For enclosure boxes (center cz, half-width hz), return masks
        (certainly outside, certainly inside)."""
        off = np.abs(cz - self.fc)
        if self.kind == "box":
            outside = np.any(off - hz >= self.fs, axis=1)
            inside = np.all(off + hz < self.fs, axis=1)
        else:
            near = np.maximum(off - hz, 0.0)
            far = off + hz
            rr = self.fs[0] ** 2
            outside = np.sum(near**2, axis=1) >= rr
            inside = np.sum(far**2, axis=1) < rr
        return outside, inside

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        half = self.fs if self.kind == "box" else np.full(self.dim, self.fs[0])
        return self.fc - half, self.fc + half

    def to_json(self) -> dict:
        key = "half_widths" if self.kind == "box" else "radius"
        size = [ex.format_scalar(s) for s in self.size] if self.kind == "box" else ex.format_scalar(self.size[0])
        return {"kind": self.kind, "center": [ex.format_scalar(c) for c in self.center], key: size}


class CoveringSet:
    """Open set {x : A x + c in base}; subclasses fix how A and c arise."""

    base: BaseSet

    @property
    def dim(self) -> int:
        return self.base.dim

    # exact linear preimage data (object arrays)
    pre_A: np.ndarray
    pre_c: np.ndarray

    @cached_property
    def fA(self) -> np.ndarray:
        return ex.as_float_array(self.pre_A)

    @cached_property
    def fc(self) -> np.ndarray:
        return ex.as_float_array(self.pre_c)

    @cached_property
    def fA_inv(self) -> np.ndarray:
        return np.linalg.inv(self.fA)

    @property
    def is_exact(self) -> bool:
        return ex.matrix_is_exact(self.pre_A) and ex.matrix_is_exact(self.pre_c) and self.base.is_exact

    def contains(self, x: Sequence[Any]) -> bool:
        x = _vec(x)
        if len(x) != self.dim:
            raise DimensionError(f"point has dimension {len(x)}, set has dimension {self.dim}")
        if self.is_exact and ex.all_exact(x):
            xs = [ex.to_fraction(v) if not hasattr(v, "free_symbols") else v for v in x]
            z = [sum((self.pre_A[i, j] * xs[j] for j in range(self.dim)), self.pre_c[i]) for i in range(self.dim)]
            return bool(self.base.contains(z))
        z = self.fA @ np.array([ex.to_float(v) for v in x], dtype=float) + self.fc
        return bool(self.base.contains_array(z[None, :])[0])

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise DimensionError("dimension mismatch")
        return self.base.contains_array(x @ self.fA.T + self.fc)

    @cached_property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        """Conservative bounding box of the set (closed)."""
        lo, hi = self.base.bbox()
        center = (lo + hi) / 2
        half = (hi - lo) / 2
        x_center = self.fA_inv @ (center - self.fc)
        x_half = np.abs(self.fA_inv) @ half
        pad = 1e-12 * (np.abs(x_center) + x_half + 1.0)
        return x_center - x_half - pad, x_center + x_half + pad

    def volume(self) -> Any:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class AffineImage(CoveringSet):
    """T Q + b."""

    def __init__(self, T: Any, b: Any, base: BaseSet):
        d = base.dim
        T = np.asarray(T, dtype=object).reshape(d, d) if not np.isscalar(T) else np.array([[T]], dtype=object)
        b = np.asarray(_vec(b), dtype=object)
        if T.shape != (d, d) or b.shape != (d,):
            raise DimensionError("T, b and the base set must share the dimension")
        self.T = T
        self.b = b
        self.base = base
        if ex.matrix_is_exact(T) and ex.matrix_is_exact(b):
            Tf = ex.fraction_matrix(T)
            try:
                Ti = ex.inverse(Tf)
            except ZeroDivisionError as exc:
                raise ValueError("T must be invertible") from exc
            self.pre_A = Ti
            self.pre_c = -(Ti @ ex.fraction_matrix(b))
        else:
            Tf = ex.as_float_array(T)
            if abs(np.linalg.det(Tf)) == 0:
                raise ValueError("T must be invertible")
            Ti = np.linalg.inv(Tf)
            self.pre_A = Ti.astype(object)
            self.pre_c = (-(Ti @ ex.as_float_array(b))).astype(object)

    def volume(self) -> Any:
        vol = self.base.volume()
        if ex.matrix_is_exact(self.T) and ex.is_exact(vol):
            return abs(ex.det(self.T)) * vol
        return abs(float(np.linalg.det(ex.as_float_array(self.T)))) * ex.to_float(self.base.volume())

    def to_json(self) -> dict:
        return {
            "rep": "affine",
            "T": [[ex.format_scalar(v) for v in row] for row in self.T],
            "b": [ex.format_scalar(v) for v in self.b],
            "base": self.base.to_json(),
        }

    def __repr__(self) -> str:
        lo, hi = self.bbox
        return f"AffineImage(bbox=({lo.tolist()}, {hi.tolist()}))"


class Pullback(CoveringSet):
    """{x : g^T x in Q}, i.e. g^{-T} Q.  ``g`` is a GroupElement or a matrix."""

    def __init__(self, g: Any, base: BaseSet):
        self.g = g
        self.base = base
        m = g.matrix() if hasattr(g, "matrix") else np.asarray(g, dtype=object)
        if m.shape != (base.dim, base.dim):
            raise DimensionError("matrix and base set dimensions differ")
        self.matrix = m
        self.pre_A = m.T.copy()
        self.pre_c = np.array([Fraction(0)] * base.dim, dtype=object)

    @cached_property
    def fA_inv(self) -> np.ndarray:
        if hasattr(self.g, "group"):
            inv = self.g.group.invert(self.g)
            return ex.as_float_array(inv.matrix()).T
        return np.linalg.inv(self.fA)

    def volume(self) -> Any:
        if hasattr(self.g, "group"):
            det = self.g.group.det(self.g)
        elif ex.matrix_is_exact(self.matrix):
            det = ex.det(self.matrix)
        else:
            det = float(np.linalg.det(ex.as_float_array(self.matrix)))
        vol = self.base.volume()
        if ex.is_exact(det) and ex.is_exact(vol):
            if isinstance(det, Fraction):
                return vol / abs(det)
            return ex.simplify(ex.to_sympy(vol) / abs(ex.to_sympy(det)))
        return ex.to_float(vol) / abs(ex.to_float(det))

    def to_json(self) -> dict:
        out = {"rep": "pullback", "base": self.base.to_json()}
        if hasattr(self.g, "to_json"):
            out["g"] = self.g.to_json()
        else:
            out["g"] = [[ex.format_scalar(v) for v in row] for row in self.matrix]
        return out

    def __repr__(self) -> str:
        lo, hi = self.bbox
        return f"Pullback(bbox=({lo.tolist()}, {hi.tolist()}))"


def contains(s: CoveringSet, x: Sequence[Any]) -> bool:
    return s.contains(x)


def volume(s: CoveringSet) -> Any:
    return s.volume()


# ------------------------------------------------------------------ oracle


@dataclass(frozen=True)
class Intersection:
    result: Tri
    witness: tuple | None = field(default=None)

    def __bool__(self) -> bool:  # pragma: no cover - guard against misuse
        raise TypeError("use .result to inspect an intersection verdict")


DEFAULT_DEPTH = 12
DEFAULT_SAMPLES = 4096
MAX_CELLS = 1 << 18


def _order(a: CoveringSet, b: CoveringSet) -> tuple[CoveringSet, CoveringSet]:
    """Canonical order so that the verdict does not depend on argument order."""
    ka = (tuple(a.bbox[0]), tuple(a.bbox[1]), a.base.kind)
    kb = (tuple(b.bbox[0]), tuple(b.bbox[1]), b.base.kind)
    return (a, b) if ka <= kb else (b, a)


def intersects(
    a: CoveringSet,
    b: CoveringSet,
    depth: int = DEFAULT_DEPTH,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> Intersection:
    """Decide whether two open sets meet.

    YES carries a verified witness; NO means that after subdivision every
    cell was certified outside one of the sets; INDETERMINATE otherwise.
    """
    if a.dim != b.dim:
        raise DimensionError("sets have different dimensions")
    a, b = _order(a, b)
    d = a.dim
    # Work in the frame where a is its base set: z = A_a x + c_a.
    A_rel = b.fA @ a.fA_inv
    c_rel = b.fc - A_rel @ a.fc
    lo_a, hi_a = a.base.bbox()
    # Bounding box of b in the z-frame.
    lo_b, hi_b = b.base.bbox()
    cb = (lo_b + hi_b) / 2
    hb = (hi_b - lo_b) / 2
    B_inv = np.linalg.inv(A_rel)
    zc = B_inv @ (cb - c_rel)
    zh0 = np.abs(B_inv) @ hb
    zh = zh0 + 1e-12 * (np.abs(zc) + zh0 + 1.0)
    lo = np.maximum(lo_a, zc - zh)
    hi = np.minimum(hi_a, zc + zh)
    if np.any(lo >= hi):
        return Intersection(Tri.NO)
    lo0 = np.maximum(lo_a, zc - zh0)
    hi0 = np.minimum(hi_a, zc + zh0)

    def member(z: np.ndarray) -> np.ndarray:
        return a.base.contains_array(z) & b.base.contains_array(z @ A_rel.T + c_rel)

    def to_x(z: np.ndarray) -> tuple:
        return tuple((a.fA_inv @ (z - a.fc)).tolist())

    def verified(z: np.ndarray) -> tuple | None:
        x = to_x(z)
        if a.is_exact and b.is_exact:
            xe = tuple(Fraction(v) for v in x)
            return x if a.contains(xe) and b.contains(xe) else None
        return x if a.contains(x) and b.contains(x) else None

    center = (lo0 + hi0) / 2 if np.all(lo0 < hi0) else (lo + hi) / 2
    if member(center[None, :])[0]:
        w = verified(center)
        if w is not None:
            return Intersection(Tri.YES, w)

    if samples > 0:
        rng = np.random.default_rng(seed)
        pts = lo + (hi - lo) * rng.random((samples, d))
        hit = np.nonzero(member(pts))[0]
        for idx in hit[:8]:
            w = verified(pts[idx])
            if w is not None:
                return Intersection(Tri.YES, w)

    cells_c = ((lo + hi) / 2)[None, :]
    cells_h = ((hi - lo) / 2)[None, :]
    absA = np.abs(A_rel)
    for _level in range(depth + 1):
        out_a, in_a = a.base.classify(cells_c, cells_h)
        out_b, in_b = b.base.classify(cells_c @ A_rel.T + c_rel, cells_h @ absA.T)
        alive = ~(out_a | out_b)
        if not np.any(alive):
            return Intersection(Tri.NO)
        both = alive & in_a & in_b
        candidates = np.nonzero(both)[0].tolist() + np.nonzero(alive & member(cells_c))[0].tolist()
        for idx in candidates[:8]:
            w = verified(cells_c[idx])
            if w is not None:
                return Intersection(Tri.YES, w)
        cells_c = cells_c[alive]
        cells_h = cells_h[alive] / 2
        if _level == depth or len(cells_c) * 2**d > MAX_CELLS:
            break
        # split each cell into 2^d children
        offsets = np.array(np.meshgrid(*[[-1.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
        cells_c = (cells_c[:, None, :] + offsets[None, :, :] * cells_h[:, None, :]).reshape(-1, d)
        cells_h = np.repeat(cells_h, len(offsets), axis=0)
    return Intersection(Tri.INDETERMINATE)
