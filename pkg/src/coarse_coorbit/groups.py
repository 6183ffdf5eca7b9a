"""Generalized shearlet dilation groups in exponential coordinates.

An element is ``h(eps, r, t) = eps * exp(-r Y) (I + sum_j t_j X_j)^{-1}``
with ``Y = diag(1, lam_2, ..., lam_d)`` and ``X_2, ..., X_d`` the canonical
basis of a commutative nilpotent matrix algebra (first row of ``X_i`` is
``e_i``).  Coordinates are the source of truth; matrices are derived.

The structure constants ``c[i][j][k]`` (``X_i X_j = sum_k c_ij^k X_k``) are
indexed from 0, so index ``i`` refers to ``X_{i+2}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np
import sympy as sp

from . import exact as ex


class GroupConstructionError(ValueError):
    """The supplied data does not define a shearlet dilation group."""


class MembershipError(ValueError):
    """A matrix is not an element of the group."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _nested_tuple(c: Any, n: int) -> tuple:
    arr = np.asarray(c, dtype=object)
    if arr.shape != (n, n, n):
        raise GroupConstructionError(f"structure constants must have shape {(n, n, n)}, got {arr.shape}")
    return tuple(tuple(tuple(_coerce(arr[i, j, k]) for k in range(n)) for j in range(n)) for i in range(n))


def _coerce(x: Any) -> Fraction | float:
    if isinstance(x, str):
        return ex.parse_scalar(x)
    if ex.is_exact(x):
        return ex.to_fraction(x)
    return float(x)


@dataclass(frozen=True)
class ShearletGroupSpec:
    """Dimension, diagonal exponents and shearing-algebra structure constants."""

    lam: tuple
    structure: tuple
    kind: str = "custom"
    include_sign_component: bool = True
    alpha: Any = None
    label: str = ""

    def __init__(
        self,
        lam: Sequence[Any],
        structure: Any,
        *,
        kind: str = "custom",
        include_sign_component: bool = True,
        alpha: Any = None,
        label: str = "",
        validate: bool = True,
    ):
        lam_t = tuple(_coerce(v) for v in lam)
        n = len(lam_t)
        if n < 1:
            raise GroupConstructionError("need d >= 2, i.e. at least one exponent")
        object.__setattr__(self, "lam", lam_t)
        object.__setattr__(self, "structure", _nested_tuple(structure, n))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "include_sign_component", bool(include_sign_component))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "label", label or kind)
        if validate:
            problems = self.validation_problems()
            if problems:
                raise GroupConstructionError("; ".join(problems))

    # ------------------------------------------------------------------ data
    @property
    def d(self) -> int:
        return len(self.lam) + 1

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def is_exact(self) -> bool:
        return ex.all_exact(self.lam) and ex.all_exact(self._nonzero_values())

    def _nonzero_values(self):
        return [c for _, _, _, c in self.terms]

    @cached_property
    def terms(self) -> tuple:
        """Nonzero structure constants as (i, j, k, c)."""
        n = self.n
        return tuple(
            (i, j, k, self.structure[i][j][k])
            for i in range(n)
            for j in range(n)
            for k in range(n)
            if self.structure[i][j][k] != 0
        )

    @cached_property
    def structure_array(self) -> np.ndarray:
        return np.array([[[ex.to_float(c) for c in row] for row in plane] for plane in self.structure])

    def basis(self) -> list[np.ndarray]:
        """Canonical basis matrices X_2..X_d as object arrays."""
        d, n = self.d, self.n
        mats = []
        for i in range(n):
            m = ex.zeros((d, d))
            m[0, i + 1] = Fraction(1)
            for j in range(n):
                for k in range(n):
                    m[j + 1, k + 1] = self.structure[j][i][k]
            mats.append(m)
        return mats

    def Y(self) -> np.ndarray:
        m = ex.zeros((self.d, self.d))
        m[0, 0] = Fraction(1)
        for i, v in enumerate(self.lam):
            m[i + 1, i + 1] = v
        return m

    # ------------------------------------------------------------ validation
    def validation_problems(self) -> list[str]:
        n = self.n
        c = self.structure
        problems = []
        for i, j, k in itertools.product(range(n), repeat=3):
            if c[i][j][k] != c[j][i][k]:
                problems.append(f"not commutative: c[{i + 2}][{j + 2}][{k + 2}] != c[{j + 2}][{i + 2}][{k + 2}]")
                return problems
        for i, j, k, v in self.terms:
            if k <= max(i, j):
                problems.append(f"X_{i + 2} X_{j + 2} has a component on X_{k + 2}; products must move strictly up")
        if problems:
            return problems
        basis = self.basis()
        for i in range(n):
            if any(basis[i][0, k] != (k == i + 1) for k in range(self.d)):
                problems.append(f"first row of X_{i + 2} is not e_{i + 2}")
        for i, j in itertools.product(range(n), repeat=2):
            lhs = basis[i] @ basis[j]
            rhs = ex.zeros((self.d, self.d))
            for k in range(n):
                if c[i][j][k] != 0:
                    rhs = rhs + c[i][j][k] * basis[k]
            if not _close_matrix(lhs, rhs):
                problems.append(f"X_{i + 2} X_{j + 2} is not the combination given by the structure constants (associativity)")
        for i, j, k, _ in self.terms:
            if not _close(self.lam[k], self.lam[i] + self.lam[j] - 1):
                problems.append(
                    f"diagonal incompatible: lambda_{k + 2} must equal lambda_{i + 2} + lambda_{j + 2} - 1 since X_{i + 2} X_{j + 2} involves X_{k + 2}"
                )
        return problems

    def filtration_violations(self) -> list[tuple[int, int, int]]:
        """Triples (i, j, k), 1-based with the X-numbering, where X_i X_j has a
        nonzero X_k component although k < i + j - 1."""
        return [(i + 2, j + 2, k + 2) for i, j, k, _ in self.terms if (k + 2) < (i + 2) + (j + 2) - 1]

    # ------------------------------------------------------------- elements
    def element(self, r: Any = 0, t: Sequence[Any] | None = None, eps: int = 1) -> "GroupElement":
        t = tuple(t) if t is not None else tuple(0 for _ in range(self.n))
        if len(t) != self.n:
            raise ValueError(f"shear vector must have length {self.n}")
        if eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")
        if eps == -1 and not self.include_sign_component:
            raise ValueError("this group has no negative component")
        return GroupElement(self, eps, *_normalize_coords(r, t))

    def identity(self) -> "GroupElement":
        return self.element(0)

    def alg_mul(self, a: Sequence[Any], b: Sequence[Any]) -> list:
        """Coordinates of (sum a_i X_i)(sum b_j X_j)."""
        out = [0] * self.n
        for i, j, k, c in self.terms:
            if isinstance(a[i], sp.Basic) or isinstance(b[j], sp.Basic):
                c = ex.to_sympy(c) if ex.is_exact(c) else c
            out[k] = out[k] + c * a[i] * b[j]
        return out

    def unipotent_inverse(self, v: Sequence[Any]) -> list:
        """w with (I + V)^{-1} = I + W, via the finite Neumann series."""
        total = [-x for x in v]
        power = list(v)
        sgn = -1
        for _ in range(self.n):
            power = self.alg_mul(power, v)
            sgn = -sgn
            if all(_is_structural_zero(x) for x in power):
                break
            total = [a + sgn * p for a, p in zip(total, power)]
        return total

    def shear_product(self, a: Sequence[Any], b: Sequence[Any]) -> list:
        """w with (I + A)(I + B) = I + W."""
        ab = self.alg_mul(a, b)
        return [x + y + z for x, y, z in zip(a, b, ab)]

    def multiply_coords(self, r1, t1, r2, t2, exp: Callable = ex.exp):
        u = [t1[j] * exp(r2 * (1 - self.lam[j])) for j in range(self.n)]
        return r1 + r2, self.shear_product(t2, u)

    def invert_coords(self, r, t, exp: Callable = ex.exp):
        v = [t[j] * exp(-r * (1 - self.lam[j])) for j in range(self.n)]
        return -r, self.unipotent_inverse(v)

    def multiply(self, a: "GroupElement", b: "GroupElement") -> "GroupElement":
        self._check(a, b)
        r, t = self.multiply_coords(a.r, a.t, b.r, b.t)
        return GroupElement(self, a.eps * b.eps, *_normalize_coords(r, t))

    def invert(self, a: "GroupElement") -> "GroupElement":
        self._check(a)
        r, t = self.invert_coords(a.r, a.t)
        return GroupElement(self, a.eps, *_normalize_coords(r, t))

    def power(self, a: "GroupElement", n: int) -> "GroupElement":
        base = a if n >= 0 else self.invert(a)
        out = self.identity()
        for _ in range(abs(n)):
            out = self.multiply(out, base)
        return out

    def equal(self, a: "GroupElement", b: "GroupElement", tol: float = 0.0) -> bool:
        if a.eps != b.eps:
            return False
        pairs = [(a.r, b.r)] + list(zip(a.t, b.t))
        if a.is_exact and b.is_exact and tol == 0.0:
            return all(ex.is_zero(ex.to_sympy(x) - ex.to_sympy(y)) for x, y in pairs)
        return all(abs(ex.to_float(x) - ex.to_float(y)) <= tol * max(1.0, abs(ex.to_float(y))) for x, y in pairs)

    def _check(self, *elements: "GroupElement") -> None:
        for e in elements:
            if e.group != self:
                raise ValueError("elements belong to a different group")

    # -------------------------------------------------------------- matrices
    def to_matrix(self, g: "GroupElement") -> np.ndarray:
        d = self.d
        exact = g.is_exact and self.is_exact
        T = ex.zeros((d, d)) if exact else np.zeros((d, d), dtype=object)
        for j, X in enumerate(self.basis()):
            coef = g.t[j]
            if coef != 0:
                T = T + (coef * (X if exact else ex.as_float_array(X)))
        inv = _neumann_matrix(T, d)
        diag = [ex.exp(-g.r)] + [ex.exp(-g.r * lam) for lam in self.lam]
        out = np.empty((d, d), dtype=object)
        for i in range(d):
            for j in range(d):
                v = g.eps * diag[i] * inv[i, j]
                out[i, j] = ex.simplify(v) if exact else float(v)
        return out

    def from_matrix(self, m: Any, tol: float = 1e-9) -> "GroupElement":
        m = np.asarray(m, dtype=object)
        d = self.d
        if m.shape != (d, d):
            raise MembershipError(f"expected a {d}x{d} matrix", float("inf"))
        exact = ex.matrix_is_exact(m)
        m00 = m[0, 0]
        if ex.is_zero(m00) if exact else float(m00) == 0.0:
            raise MembershipError("first entry vanishes", float("inf"))
        eps = ex.sign(m00) if exact else (1 if float(m00) > 0 else -1)
        if eps == -1 and not self.include_sign_component:
            raise MembershipError("negative component not in this group", float("inf"))
        if exact:
            a = ex.to_sympy(m00) * eps
            r = ex.simplify(-sp.log(a))
            w = [ex.simplify(ex.to_sympy(m[0, j + 1]) / ex.to_sympy(m00)) for j in range(self.n)]
        else:
            a = float(m00) * eps
            r = -np.log(a)
            w = [float(m[0, j + 1]) / float(m00) for j in range(self.n)]
        t = [ex.simplify(x) for x in self.unipotent_inverse(w)]
        g = GroupElement(self, eps, *_normalize_coords(r, t))
        back = self.to_matrix(g)
        if exact:
            residual = [ex.to_sympy(x) - ex.to_sympy(y) for x, y in zip(back.flat, m.flat)]
            if not all(ex.is_zero(x) for x in residual):
                res = max(abs(ex.to_float(x)) for x in residual)
                raise MembershipError("matrix is not in the group", res)
        else:
            diff = ex.as_float_array(back) - ex.as_float_array(m)
            res = float(np.max(np.abs(diff)))
            scale = max(1.0, float(np.max(np.abs(ex.as_float_array(m)))))
            if res > tol * scale:
                raise MembershipError("matrix is not in the group", res)
        return g

    def det(self, g: "GroupElement") -> Any:
        total = 1 + sum(self.lam)
        if g.is_exact and self.is_exact:
            return ex.simplify(g.eps ** self.d * sp.exp(-ex.to_sympy(g.r) * ex.to_sympy(total)))
        return g.eps ** self.d * np.exp(-ex.to_float(g.r) * float(total))

    # ------------------------------------------------------------ orbit map
    def orbit_map(self, g: "GroupElement") -> tuple:
        """p(g) = g^{-T} xi_0 with xi_0 = e_1."""
        first = g.eps * ex.exp(g.r)
        rest = [g.eps * ex.exp(lam * g.r) * tj for lam, tj in zip(self.lam, g.t)]
        if g.is_exact and self.is_exact:
            return tuple(ex.simplify(v) for v in [first, *rest])
        return tuple(float(v) for v in [first, *rest])

    def orbit_map_inverse(self, x: Sequence[Any]) -> "GroupElement":
        if len(x) != self.d:
            raise ValueError(f"expected a point with {self.d} coordinates")
        exact = ex.all_exact(x) and self.is_exact
        x1 = x[0]
        if (ex.is_zero(ex.to_sympy(x1)) if exact else float(x1) == 0.0):
            raise ValueError("x_1 = 0 lies outside the dual orbit R* x R^(d-1)")
        eps = ex.sign(x1) if exact else (1 if float(x1) > 0 else -1)
        if eps == -1 and not self.include_sign_component:
            raise ValueError("x_1 < 0 is outside the orbit of the identity component")
        if exact:
            a = abs(ex.to_sympy(x1))
            r = ex.simplify(sp.log(a))
            t = [ex.simplify(eps * ex.to_sympy(xj) * a ** (-ex.to_sympy(lam))) for xj, lam in zip(x[1:], self.lam)]
        else:
            a = abs(float(x1))
            r = float(np.log(a))
            t = [eps * float(xj) * a ** (-float(lam)) for xj, lam in zip(x[1:], self.lam)]
        return GroupElement(self, eps, *_normalize_coords(r, t))

    def orbit_map_array(self, eps: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Vectorized float orbit map; t has shape (N, n)."""
        lam = np.array([float(v) for v in self.lam])
        first = eps * np.exp(r)
        rest = eps[:, None] * np.exp(np.outer(r, lam)) * t
        return np.column_stack([first, rest])

    # ------------------------------------------------------------------ io
    def to_json(self) -> dict:
        out = {
            "d": self.d,
            "kind": self.kind,
            "lambda": [ex.format_scalar(v) for v in self.lam],
            "sign_component": self.include_sign_component,
        }
        if self.kind == "d4_family":
            out["alpha"] = ex.format_scalar(self.alpha)
        if self.kind in ("custom", "conjugated"):
            out["structure_constants"] = [
                [[ex.format_scalar(c) for c in row] for row in plane] for plane in self.structure
            ]
        if self.label and self.label != self.kind:
            out["label"] = self.label
        return out

    @staticmethod
    def from_json(data: dict) -> "ShearletGroupSpec":
        return group_from_json(data)

    # --------------------------------------------------------- construction
    @staticmethod
    def from_matrices(
        matrices: Sequence[Any], lam: Sequence[Any], *, kind: str = "custom", label: str = "", include_sign_component: bool = True
    ) -> "ShearletGroupSpec":
        """Build a spec from any basis of a shearing algebra.

        The canonical basis is recovered from first rows; the structure
        constants are then read off the first rows of the products.
        """
        mats = [np.asarray(m, dtype=object) for m in matrices]
        if not mats:
            raise GroupConstructionError("need at least one matrix")
        d = mats[0].shape[0]
        n = d - 1
        if len(mats) != n or any(m.shape != (d, d) for m in mats):
            raise GroupConstructionError(f"need {n} matrices of size {d}x{d}")
        exact = all(ex.matrix_is_exact(m) for m in mats)
        if exact:
            mats = [ex.fraction_matrix(m) for m in mats]
            rows = np.array([[m[0, k + 1] for k in range(n)] for m in mats], dtype=object)
            try:
                rinv = ex.inverse(rows)
            except ZeroDivisionError as exc:
                raise GroupConstructionError("first rows of the matrices are linearly dependent") from exc
            canon = []
            for j in range(n):
                acc = ex.zeros((d, d))
                for i in range(n):
                    if rinv[j, i] != 0:
                        acc = acc + rinv[j, i] * mats[i]
                canon.append(acc)
        else:
            fm = [ex.as_float_array(m) for m in mats]
            rows = np.array([[m[0, k + 1] for k in range(n)] for m in fm])
            rinv = np.linalg.inv(rows)
            canon = [sum(rinv[j, i] * fm[i] for i in range(n)) for j in range(n)]
        for X in canon:
            col = [X[i, 0] for i in range(d)]
            if any(ex.to_float(v) != 0 for v in col) and exact:
                raise GroupConstructionError("matrices must have zero first column")
        structure = np.empty((n, n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                prod = canon[i] @ canon[j]
                for k in range(n):
                    structure[i, j, k] = prod[0, k + 1]
        spec = ShearletGroupSpec(
            lam, structure, kind=kind, label=label, include_sign_component=include_sign_component
        )
        for X, Z in zip(canon, spec.basis()):
            if not _close_matrix(X, Z):
                raise GroupConstructionError("matrices do not span a shearing algebra in canonical form")
        return spec


@dataclass(frozen=True)
class GroupElement:
    """Element eps * exp(-rY) (I + sum t_j X_j)^{-1} of a shearlet group."""

    group: ShearletGroupSpec = field(repr=False)
    eps: int
    r: Any
    t: tuple

    @property
    def is_exact(self) -> bool:
        return ex.is_exact(self.r) and ex.all_exact(self.t)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.multiply(self, other)

    def inverse(self) -> "GroupElement":
        return self.group.invert(self)

    def matrix(self) -> np.ndarray:
        return self.group.to_matrix(self)

    def as_float(self) -> tuple[int, float, tuple]:
        return self.eps, ex.to_float(self.r), tuple(ex.to_float(v) for v in self.t)

    def to_json(self) -> dict:
        return {"eps": self.eps, "r": ex.format_scalar(self.r), "t": [ex.format_scalar(v) for v in self.t]}


# ---------------------------------------------------------------- helpers


def _normalize_coords(r: Any, t: Sequence[Any]) -> tuple[Any, tuple]:
    values = [r, *t]
    if ex.all_exact(values):
        conv = [ex.simplify(ex.to_sympy(v)) for v in values]
    else:
        conv = [ex.to_float(v) for v in values]
    return conv[0], tuple(conv[1:])


def _is_structural_zero(x: Any) -> bool:
    if isinstance(x, sp.Basic):
        return sp.expand(x) == 0
    return x == 0


def _close(a: Any, b: Any) -> bool:
    if ex.is_exact(a) and ex.is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= 1e-12


def _close_matrix(a: np.ndarray, b: np.ndarray) -> bool:
    if ex.matrix_is_exact(a) and ex.matrix_is_exact(b):
        return all(x == y for x, y in zip(np.asarray(a).flat, np.asarray(b).flat))
    return bool(np.allclose(ex.as_float_array(a), ex.as_float_array(b), atol=1e-12))


def _neumann_matrix(T: np.ndarray, d: int) -> np.ndarray:
    exact = ex.matrix_is_exact(T)
    ident = ex.identity(d) if exact else np.eye(d, dtype=object)
    out = ident.copy()
    power = ident.copy()
    for _ in range(d):
        power = -(power @ T)
        out = out + power
    return out


# ------------------------------------------------------------ constructors


def standard_group(d: int, lam: Sequence[Any] | None = None, *, include_sign_component: bool = True) -> ShearletGroupSpec:
    """All products of shears vanish; any diagonal exponents are compatible."""
    if d < 2:
        raise GroupConstructionError("d must be at least 2")
    n = d - 1
    if lam is None:
        lam = [Fraction(1, 2)] * n
    if len(lam) != n:
        raise GroupConstructionError(f"need {n} exponents for d = {d}")
    return ShearletGroupSpec(
        lam, np.full((n, n, n), Fraction(0), dtype=object), kind="standard", include_sign_component=include_sign_component
    )


def toeplitz_group(d: int, delta: Any = Fraction(1, 2), *, include_sign_component: bool = True) -> ShearletGroupSpec:
    """Upper triangular Toeplitz shears; X_{k+1} = X_2^k and lam_j = 1 - (j-1) delta."""
    if d < 2:
        raise GroupConstructionError("d must be at least 2")
    delta = _coerce(delta)
    n = d - 1
    structure = np.full((n, n, n), Fraction(0), dtype=object)
    for a in range(n):
        for b in range(n):
            if a + b + 1 < n:
                structure[a, b, a + b + 1] = Fraction(1)
    lam = [1 - (i + 1) * delta for i in range(n)]
    spec = ShearletGroupSpec(lam, structure, kind="toeplitz", include_sign_component=include_sign_component)
    object.__setattr__(spec, "alpha", delta)
    return spec


def d4_family(alpha: int, lam: Sequence[Any] | None = None, *, include_sign_component: bool = True) -> ShearletGroupSpec:
    """Four-dimensional family with X_2^2 = X_4, X_2 X_3 = 0 and X_3^2 = alpha X_4."""
    if alpha not in (-1, 0, 1):
        raise GroupConstructionError("alpha must be -1, 0 or 1")
    if lam is None:
        lam = [Fraction(1)] * 3
    structure = np.full((3, 3, 3), Fraction(0), dtype=object)
    structure[0, 0, 2] = Fraction(1)
    structure[1, 1, 2] = Fraction(alpha)
    return ShearletGroupSpec(
        lam, structure, kind="d4_family", alpha=Fraction(alpha), include_sign_component=include_sign_component
    )


def custom_group(lam: Sequence[Any], structure: Any, **kw) -> ShearletGroupSpec:
    return ShearletGroupSpec(lam, structure, kind="custom", **kw)


def conjugated_group(spec: ShearletGroupSpec, C: Any, lam: Sequence[Any] | None = None) -> ShearletGroupSpec:
    """The group with shearing algebra C^{-1} s C (and the given diagonal)."""
    Cf = ex.fraction_matrix(C)
    Ci = ex.inverse(Cf)
    mats = [Ci @ X @ Cf for X in spec.basis()]
    lam = spec.lam if lam is None else lam
    return ShearletGroupSpec.from_matrices(mats, lam, kind="conjugated", include_sign_component=spec.include_sign_component)


def group_from_json(data: dict) -> ShearletGroupSpec:
    """Parse a group spec document; raises ValueError naming the bad field."""
    if not isinstance(data, dict):
        raise ValueError("group spec must be a JSON object")
    try:
        d = int(data["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError("field 'd': required integer >= 2") from exc
    kind = data.get("kind", "custom")
    sign = bool(data.get("sign_component", True))
    lam_raw = data.get("lambda")
    lam = None
    if lam_raw is not None:
        if not isinstance(lam_raw, list):
            raise ValueError("field 'lambda': expected a list")
        try:
            lam = [ex.parse_scalar(v) for v in lam_raw]
        except ValueError as exc:
            raise ValueError(f"field 'lambda': {exc}") from exc
    if lam is not None and len(lam) != d - 1:
        raise ValueError(f"field 'lambda': expected d - 1 = {d - 1} entries, got {len(lam)}")
    try:
        if kind == "standard":
            spec = standard_group(d, lam, include_sign_component=sign)
        elif kind == "toeplitz":
            delta = ex.parse_scalar(data.get("delta", "1/2"))
            if lam is not None:
                n = d - 1
                delta = 1 - lam[0] if n >= 1 else delta
            spec = toeplitz_group(d, delta, include_sign_component=sign)
            if lam is not None and list(spec.lam) != list(lam):
                raise ValueError("field 'lambda': Toeplitz exponents must be 1 - k*delta")
        elif kind == "d4_family":
            if d != 4:
                raise ValueError("field 'd': d4_family needs d = 4")
            if "alpha" not in data:
                raise ValueError("field 'alpha': required for d4_family")
            spec = d4_family(int(ex.parse_scalar(data["alpha"])), lam, include_sign_component=sign)
        elif kind in ("custom", "conjugated"):
            if lam is None:
                raise ValueError("field 'lambda': required for custom groups")
            if "structure_constants" not in data:
                raise ValueError("field 'structure_constants': required for custom groups")
            spec = ShearletGroupSpec(lam, data["structure_constants"], kind=kind, include_sign_component=sign)
        else:
            raise ValueError(f"field 'kind': unknown kind {kind!r}")
    except GroupConstructionError as exc:
        raise ValueError(str(exc)) from exc
    if spec.d != d:
        raise ValueError(f"field 'lambda': length must be d - 1 = {d - 1}")
    if "label" in data:
        object.__setattr__(spec, "label", str(data["label"]))
    return spec
