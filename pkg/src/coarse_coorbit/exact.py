"""Scalar and matrix helpers shared by the exact and floating-point paths.

Exact scalars are ``int``, ``Fraction`` or sympy expressions.  Anything else
is treated as a float.  Matrices are numpy object arrays so that ``@`` works
for both kinds of entries.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
import sympy as sp


def is_exact(x: Any) -> bool:
    return isinstance(x, (int, Fraction, sp.Basic, np.integer)) and not isinstance(x, bool)


def all_exact(values: Iterable[Any]) -> bool:
    return all(is_exact(v) for v in values)


def parse_scalar(value: Any) -> Fraction | float:
    """Read a number from a config value.

    Strings such as ``"1/2"`` or ``"3"`` become Fractions; decimal strings
    and floats stay floats.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            if any(c in text for c in ".eE") and "/" not in text:
                return float(text)
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse number {value!r}") from exc
    raise ValueError(f"expected a number, got {value!r}")


def format_scalar(x: Any) -> str | float | int:
    """JSON-friendly rendering: rationals as "p/q", floats as floats."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, sp.Rational):
        return format_scalar(Fraction(int(x.p), int(x.q)))
    if isinstance(x, sp.Basic):
        return str(x)
    return float(x)


def to_fraction(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, sp.Rational):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"{x!r} is not rational")


def to_sympy(x: Any) -> sp.Expr:
    if isinstance(x, sp.Basic):
        return x
    if isinstance(x, Fraction):
        return sp.Rational(x.numerator, x.denominator)
    if isinstance(x, (int, np.integer)):
        return sp.Integer(int(x))
    raise TypeError(f"{x!r} is not exact")


def to_float(x: Any) -> float:
    if isinstance(x, sp.Basic):
        return float(sp.N(x, 30))
    return float(x)


def exp(x: Any) -> Any:
    return sp.exp(to_sympy(x)) if is_exact(x) else math.exp(x)


def log(x: Any) -> Any:
    return sp.log(to_sympy(x)) if is_exact(x) else math.log(x)


def simplify(x: Any) -> Any:
    if isinstance(x, sp.Basic):
        return sp.powsimp(sp.expand(x))
    return x


def is_zero(x: Any) -> bool:
    if isinstance(x, sp.Basic):
        e = sp.expand(x)
        if e == 0:
            return True
        return sp.simplify(e) == 0
    return x == 0


def sign(x: Any) -> int:
    if isinstance(x, sp.Basic):
        s = sp.sign(x)
        if s not in (-1, 0, 1):
            s = sp.sign(sp.N(x, 50))
        return int(s)
    return (x > 0) - (x < 0)


# --------------------------------------------------------------------------
# exact matrices over Fractions


def fraction_matrix(rows: Any) -> np.ndarray:
    arr = np.asarray(rows, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = _as_fraction(v)
    return out


def _as_fraction(v: Any) -> Fraction:
    if isinstance(v, str):
        return Fraction(parse_scalar(v))
    return to_fraction(v)


def identity(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = Fraction(int(i == j))
    return out


def zeros(shape: Sequence[int] | int) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over Fractions; returns (matrix, pivot columns)."""
    a = fraction_matrix(m).copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if a[i, c] != 0), None)
        if p is None:
            continue
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = a[r] / a[r, c]
        for i in range(rows):
            if i != r and a[i, c] != 0:
                a[i] = a[i] - a[i, c] * a[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: np.ndarray) -> int:
    if np.asarray(m).size == 0:
        return 0
    return len(rref(m)[1])


def inverse(m: np.ndarray) -> np.ndarray:
    a = fraction_matrix(m)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    red, piv = rref(np.hstack([a, identity(n)]))
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return red[:, n:]


def det(m: np.ndarray) -> Fraction:
    a = fraction_matrix(m).copy()
    n = a.shape[0]
    result = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i, c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[[c, p]] = a[[p, c]]
            result = -result
        result *= a[c, c]
        for i in range(c + 1, n):
            if a[i, c] != 0:
                a[i] = a[i] - (a[i, c] / a[c, c]) * a[c]
    return result


def nullspace(m: np.ndarray) -> list[np.ndarray]:
    """Basis of {v : m v = 0} over Fractions."""
    a = fraction_matrix(m)
    cols = a.shape[1]
    red, piv = rref(a)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = zeros(cols)
        v[f] = Fraction(1)
        for row, p in enumerate(piv):
            v[p] = -red[row, f]
        basis.append(v)
    return basis


def matrices_equal(a: np.ndarray, b: np.ndarray) -> bool:
    a, b = np.asarray(a, dtype=object), np.asarray(b, dtype=object)
    return a.shape == b.shape and all(is_zero(x - y) for x, y in zip(a.flat, b.flat))


def as_float_array(m: Any) -> np.ndarray:
    arr = np.asarray(m, dtype=object)
    return np.array([to_float(v) for v in arr.flat], dtype=float).reshape(arr.shape)


def matrix_is_exact(m: Any) -> bool:
    return all_exact(np.asarray(m, dtype=object).flat)
