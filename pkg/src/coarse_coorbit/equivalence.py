"""Coorbit equivalence of shearlet dilation groups.

Two shearlet groups are compared by their dual orbits, their diagonal
exponents, and their shearing algebras.  Positive verdicts carry a conjugator
C that is verified exactly; negative verdicts carry an invariant table or a
witness sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np
import sympy as sp
from scipy.optimize import least_squares

from . import exact as ex
from .groups import GroupElement, ShearletGroupSpec, standard_group

# ------------------------------------------------------------------- orbits

PRODUCT = "product"  # R* x R^{d-1}
PUNCTURED = "punctured-plane"  # R^d minus the origin
ORTHANTS = "orthant-union"  # (R*)^d
CUSTOM = "custom"


@dataclass(frozen=True)
class OrbitDescriptor:
    kind: str
    dim: int
    predicate: Callable[[Sequence[float]], bool] | None = field(default=None, compare=False, repr=False)

    def contains(self, x: Sequence[float]) -> bool:
        x = [float(v) for v in x]
        if len(x) != self.dim:
            return False
        if self.kind == PRODUCT:
            return x[0] != 0
        if self.kind == PUNCTURED:
            return any(v != 0 for v in x)
        if self.kind == ORTHANTS:
            return all(v != 0 for v in x)
        return bool(self.predicate(x)) if self.predicate else False

    def describe(self) -> str:
        return {
            PRODUCT: f"R* x R^{self.dim - 1}",
            PUNCTURED: f"R^{self.dim} minus the origin",
            ORTHANTS: f"(R*)^{self.dim}",
        }.get(self.kind, "custom region")


def dual_orbit(spec: "ShearletGroupSpec | BuiltinGroup") -> OrbitDescriptor:
    if isinstance(spec, BuiltinGroup):
        return spec.orbit
    return OrbitDescriptor(PRODUCT, spec.d)


def orbits_equal(a: OrbitDescriptor, b: OrbitDescriptor) -> bool:
    if a.dim != b.dim or a.kind != b.kind:
        return False
    if a.kind == CUSTOM:
        return a.predicate is b.predicate
    return True


@dataclass(frozen=True)
class BuiltinGroup:
    """Two-dimensional dilation groups used for orbit comparisons."""

    name: str
    orbit: OrbitDescriptor
    spec: ShearletGroupSpec | None = None


def builtin_group(name: str, c: Any = Fraction(1, 2)) -> BuiltinGroup:
    if name == "diagonal":
        return BuiltinGroup("diagonal", OrbitDescriptor(ORTHANTS, 2))
    if name == "similitude":
        return BuiltinGroup("similitude", OrbitDescriptor(PUNCTURED, 2))
    if name == "shearlet":
        spec = standard_group(2, [c])
        return BuiltinGroup(f"shearlet(c={ex.format_scalar(c)})", OrbitDescriptor(PRODUCT, 2), spec)
    raise ValueError(f"unknown built-in group {name!r}; use diagonal, similitude or shearlet")


# --------------------------------------------------------------- invariants


def _vec_mul(spec: ShearletGroupSpec, a: Sequence[Fraction], b: Sequence[Fraction]) -> list:
    out = [Fraction(0)] * spec.n
    for i, j, k, c in spec.terms:
        out[k] += ex.to_fraction(c) * a[i] * b[j]
    return out


def _span_basis(vectors: list, n: int) -> list:
    if not vectors:
        return []
    red, piv = ex.rref(np.array(vectors, dtype=object).reshape(len(vectors), n))
    return [list(red[r]) for r in range(len(piv))]


def _inertia(B: np.ndarray) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric rational matrix."""
    A = ex.fraction_matrix(B).copy()
    n = A.shape[0]
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if A[i, i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and A[i, j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # congruence e_i -> e_i + e_j creates a nonzero diagonal entry
            A[i, :] = A[i, :] + A[j, :]
            A[:, i] = A[:, i] + A[:, j]
            piv = i
        d = A[piv, piv]
        pos += d > 0
        neg += d < 0
        for k in active:
            if k != piv and A[k, piv] != 0:
                f = A[k, piv] / d
                A[k, :] = A[k, :] - f * A[piv, :]
                A[:, k] = A[:, k] - f * A[:, piv]
        active.remove(piv)
    return pos, neg, n - pos - neg


@dataclass(frozen=True)
class AlgebraInvariants:
    dim: int
    power_dims: tuple  # dim s^1, s^2, ... down to 0
    annihilator_dim: int
    nilpotency_index: int  # least k with s^k = 0
    square_form: tuple | None  # (rank, |p - n|) of X -> X^2 when dim s^2 = 1

    def table(self) -> dict:
        return {
            "dim": self.dim,
            "power_dims": list(self.power_dims),
            "annihilator_dim": self.annihilator_dim,
            "nilpotency_index": self.nilpotency_index,
            "square_form": list(self.square_form) if self.square_form is not None else None,
        }

    def differences(self, other: "AlgebraInvariants") -> list[str]:
        a, b = self.table(), other.table()
        return [k for k in a if a[k] != b[k]]


def algebra_invariants(spec: ShearletGroupSpec) -> AlgebraInvariants:
    if not spec.is_exact:
        raise ValueError("algebra invariants need exact structure constants")
    n = spec.n
    unit = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    dims = [n]
    current = unit
    while current:
        prods = [_vec_mul(spec, a, b) for a in current for b in unit]
        current = _span_basis(prods, n)
        dims.append(len(current))
    # annihilator: a with a X_j = 0 for all j
    rows = []
    for j in range(n):
        for k in range(n):
            rows.append([_vec_mul(spec, unit[i], unit[j])[k] for i in range(n)])
    ann = len(ex.nullspace(np.array(rows, dtype=object))) if rows else n
    square = None
    if dims[1] == 1:
        z = _span_basis([_vec_mul(spec, a, b) for a in unit for b in unit], n)[0]
        lead = next(k for k in range(n) if z[k] != 0)
        B = ex.zeros((n, n))
        for i in range(n):
            for j in range(n):
                B[i, j] = _vec_mul(spec, unit[i], unit[j])[lead] / z[lead]
        p, q, _ = _inertia(B)
        square = (p + q, abs(p - q))
    # dims = (dim s, dim s^2, ...) ends at the first zero power
    return AlgebraInvariants(n, tuple(dims), ann, len(dims), square)


# --------------------------------------------------------------- conjugators


def _structure(spec: ShearletGroupSpec) -> np.ndarray:
    return spec.structure_array


def is_isomorphism(P: np.ndarray, a: ShearletGroupSpec, b: ShearletGroupSpec) -> bool:
    """Exact test that X_i -> sum_k P[i,k] X'_k is an algebra isomorphism."""
    P = ex.fraction_matrix(P)
    n = a.n
    if ex.det(P) == 0:
        return False
    ca = [[[ex.to_fraction(a.structure[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]
    cb = [[[ex.to_fraction(b.structure[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            lhs = [sum(ca[i][j][k] * P[k, m] for k in range(n)) for m in range(n)]
            rhs = [Fraction(0)] * n
            for p in range(n):
                if P[i, p] == 0:
                    continue
                for q in range(n):
                    if P[j, q] == 0:
                        continue
                    w = P[i, p] * P[j, q]
                    for m in range(n):
                        if cb[p][q][m]:
                            rhs[m] += w * cb[p][q][m]
            if lhs != rhs:
                return False
    return True


def conjugator_from_isomorphism(P: np.ndarray) -> np.ndarray:
    """C = blockdiag(1, P): then the first row of C^{-1} X_i C is row i of P."""
    P = ex.fraction_matrix(P)
    n = P.shape[0]
    C = ex.identity(n + 1)
    C[1:, 1:] = P
    return C


def verify_conjugator(C: Any, a: ShearletGroupSpec, b: ShearletGroupSpec) -> bool:
    """Exact check that C^{-1} X C lies in the shearing algebra of b for every
    canonical X of a (then C^{-1} S_a C = S_b by dimension count)."""
    if a.d != b.d:
        return False
    C = ex.fraction_matrix(C)
    try:
        Ci = ex.inverse(C)
    except ZeroDivisionError:
        return False
    bb = b.basis()
    for X in a.basis():
        Z = Ci @ X @ C
        if any(Z[i, 0] != 0 for i in range(a.d)):
            return False
        coeffs = [Z[0, k + 1] for k in range(b.n)]
        W = ex.zeros((b.d, b.d))
        for c, B in zip(coeffs, bb):
            if c != 0:
                W = W + c * B
        if not all(x == y for x, y in zip(Z.flat, W.flat)):
            return False
    return True


@dataclass
class ConjugatorResult:
    status: str  # FOUND | NOT-FOUND | INDETERMINATE
    C: np.ndarray | None = None
    isomorphism: np.ndarray | None = None
    reason: str = ""
    invariants: tuple | None = None
    seeds_used: int = 0

    def to_json(self) -> dict:
        out: dict = {"status": self.status, "reason": self.reason, "seeds_used": self.seeds_used}
        if self.C is not None:
            out["C"] = [[ex.format_scalar(v) for v in row] for row in self.C]
        if self.invariants is not None:
            out["invariants"] = [inv.table() for inv in self.invariants]
        return out


def _residual_fn(ca: np.ndarray, cb: np.ndarray, n: int, free: list, fixed: dict):
    def build(x):
        P = np.zeros((n, n))
        for (i, j), v in fixed.items():
            P[i, j] = float(v)
        for pos, (i, j) in enumerate(free):
            P[i, j] = x[pos]
        return P

    def res(x):
        P = build(x)
        s = x[-1]
        lhs = np.einsum("ijk,km->ijm", ca, P)
        rhs = np.einsum("ip,jq,pqm->ijm", P, P, cb)
        return np.concatenate([(lhs - rhs).ravel(), [np.linalg.det(P) * s - 1.0]])

    return build, res


def _solve(res, x0):
    sol = least_squares(res, x0, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400 * (len(x0) + 1))
    return sol, float(np.linalg.norm(sol.fun))


def _snap_exact(a, b, P_float: np.ndarray, max_den: int = 1000) -> np.ndarray | None:
    n = P_float.shape[0]
    P = ex.zeros((n, n))
    for i in range(n):
        for j in range(n):
            P[i, j] = Fraction(float(P_float[i, j])).limit_denominator(max_den)
    return P if is_isomorphism(P, a, b) else None


def _search(a: ShearletGroupSpec, b: ShearletGroupSpec, mask: np.ndarray, seeds: int, seed: int, tol: float):
    """Multistart least squares on the isomorphism equations.

    Each start converges to a generic point of the solution variety.  The
    variety's local dimension is read off the Jacobian; that many
    coordinates (chosen by pivoted QR on the null space) are fixed to
    integers and the rest re-solved, so the remaining entries are isolated
    and can be snapped to rationals and verified exactly.
    """
    from scipy.linalg import qr

    n = a.n
    ca, cb = _structure(a), _structure(b)
    positions = [(i, j) for i in range(n) for j in range(n) if mask[i, j]]
    rng = np.random.default_rng(seed)
    for attempt in range(seeds):
        fixed: dict = {}
        free = list(positions)
        x = np.concatenate([rng.normal(size=len(free)), [1.0]])
        for _ in range(len(positions) + 1):
            build, res = _residual_fn(ca, cb, n, free, fixed)
            sol, norm = _solve(res, x)
            if norm > math.sqrt(tol):
                break
            P = build(sol.x)
            snapped = _snap_exact(a, b, P)
            if snapped is not None:
                return snapped, attempt + 1
            if not free:
                break
            # null space over all unknowns (the auxiliary det variable included),
            # pivots chosen among matrix entries only
            _, sv, vt = np.linalg.svd(sol.jac)
            rank = int(np.sum(sv > 1e-7 * max(1.0, sv[0])))
            nullity = sol.jac.shape[1] - rank
            if nullity == 0:
                break
            N = vt[rank:].T[:-1]
            nullity = min(nullity, len(free))
            _, _, piv = qr(N.T, pivoting=True)
            chosen = sorted(piv[:nullity].tolist(), reverse=True)
            vals = sol.x[:-1]
            for k in chosen:
                fixed[free[k]] = Fraction(int(round(vals[k])) or 1)
            keep = [k for k in range(len(free)) if k not in chosen]
            free = [free[k] for k in keep]
            x = np.concatenate([vals[keep], sol.x[-1:]])
    return None, seeds


def find_conjugator(
    a: ShearletGroupSpec,
    b: ShearletGroupSpec,
    seeds: int = 200,
    seed: int = 0,
    tol: float = 1e-10,
    candidate: Any = None,
    weight_preserving: bool = False,
) -> ConjugatorResult:
    """Search for C with C^{-1} S_a C = S_b.

    ``weight_preserving`` restricts to isomorphisms mapping X_i into the span
    of the X'_k with the same diagonal exponent.
    """
    if a.d != b.d:
        return ConjugatorResult("NOT-FOUND", reason="dimension-mismatch")
    if candidate is not None:
        C = ex.fraction_matrix(candidate)
        if verify_conjugator(C, a, b):
            return ConjugatorResult("FOUND", C=C, reason="candidate-verified")
    ia, ib = algebra_invariants(a), algebra_invariants(b)
    if ia != ib:
        return ConjugatorResult("NOT-FOUND", reason="algebra-invariant-mismatch", invariants=(ia, ib))
    n = a.n
    mask = np.ones((n, n), dtype=bool)
    if weight_preserving:
        mask = np.array([[a.lam[i] == b.lam[j] for j in range(n)] for i in range(n)])
    ident = ex.identity(n)
    if is_isomorphism(ident, a, b):
        return ConjugatorResult("FOUND", C=conjugator_from_isomorphism(ident), isomorphism=ident, reason="identity")
    if not mask.any(axis=1).all():
        return ConjugatorResult("INDETERMINATE", reason="no admissible entries", invariants=(ia, ib))
    P, used = _search(a, b, mask, seeds, seed, tol)
    if P is None:
        return ConjugatorResult("INDETERMINATE", reason="search-exhausted", invariants=(ia, ib), seeds_used=used)
    C = conjugator_from_isomorphism(P)
    if not verify_conjugator(C, a, b):  # pragma: no cover - guarded by construction
        return ConjugatorResult("INDETERMINATE", reason="verification-failed", seeds_used=used)
    return ConjugatorResult("FOUND", C=C, isomorphism=P, reason="search", seeds_used=used)


# ----------------------------------------------------------- commuting check


@dataclass(frozen=True)
class CommutingResult:
    infinitesimal: bool
    finite: bool

    @property
    def ok(self) -> bool:
        return self.infinitesimal and self.finite


def _sym(m: np.ndarray) -> sp.Matrix:
    return sp.Matrix(m.shape[0], m.shape[1], [ex.to_sympy(v) for v in m.flat])


def commuting_check(C: Any, a: ShearletGroupSpec, b: ShearletGroupSpec, samples: int = 3, seed: int = 0) -> CommutingResult:
    """[Y, C^{-1} X C] = C^{-1} [Y, X] C on the canonical basis, plus the
    group identity d^{-1} C^{-1} s C d = C^{-1} d^{-1} s d C for sampled
    rational shears s and d = exp(rY)."""
    C = ex.fraction_matrix(C)
    Ci = ex.inverse(C)
    Y = ex.fraction_matrix(a.Y())
    infinitesimal = True
    for X in a.basis():
        lhs = Y @ (Ci @ X @ C) - (Ci @ X @ C) @ Y
        rhs = Ci @ (Y @ X - X @ Y) @ C
        if not all(x == y for x, y in zip(lhs.flat, rhs.flat)):
            infinitesimal = False
            break
    rng = np.random.default_rng(seed)
    Cs, Cis = _sym(C), _sym(Ci)
    finite = True
    basis = a.basis()
    for _ in range(samples):
        r = sp.Rational(int(rng.integers(-6, 7)), int(rng.integers(1, 4)))
        t = [Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(a.n)]
        S = ex.identity(a.d)
        for tj, X in zip(t, basis):
            S = S + tj * X
        Ss = _sym(S)
        D = sp.diag(*[sp.exp(r * ex.to_sympy(Y[i, i])) for i in range(a.d)])
        Di = sp.diag(*[sp.exp(-r * ex.to_sympy(Y[i, i])) for i in range(a.d)])
        diff = Di * Cis * Ss * Cs * D - Cis * Di * Ss * D * Cs
        if any(not ex.is_zero(v) for v in diff):
            finite = False
            break
    return CommutingResult(infinitesimal, finite)


# ----------------------------------------------------------------- pipeline


@dataclass
class EquivalenceVerdict:
    result: str  # EQUIVALENT | NOT-EQUIVALENT | INDETERMINATE
    reason: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"result": self.result, "reason": self.reason, "evidence": self.evidence}


def _lam_equal(x: Any, y: Any) -> bool:
    if ex.is_exact(x) and ex.is_exact(y):
        return ex.to_fraction(x) == ex.to_fraction(y)
    return math.isclose(ex.to_float(x), ex.to_float(y), rel_tol=0, abs_tol=1e-12)


def coorbit_equivalent(
    a: ShearletGroupSpec,
    b: ShearletGroupSpec,
    seeds: int = 200,
    seed: int = 0,
    candidate: Any = None,
) -> EquivalenceVerdict:
    oa, ob = dual_orbit(a), dual_orbit(b)
    if not orbits_equal(oa, ob):
        return EquivalenceVerdict("NOT-EQUIVALENT", "orbit-mismatch", {"orbits": [oa.describe(), ob.describe()]})
    diffs = [i for i in range(a.n) if not _lam_equal(a.lam[i], b.lam[i])]
    if diffs:
        i = diffs[0]
        w = nonequivalence_witness(a, b, i, cap=20)
        return EquivalenceVerdict(
            "NOT-EQUIVALENT",
            "diagonal-mismatch",
            {
                "index": i + 2,
                "lambda": [ex.format_scalar(a.lam[i]), ex.format_scalar(b.lam[i])],
                "witness": w.table(),
            },
        )
    ia, ib = algebra_invariants(a), algebra_invariants(b)
    if ia != ib:
        return EquivalenceVerdict(
            "NOT-EQUIVALENT",
            "algebra-invariant-mismatch",
            {"invariants": [ia.table(), ib.table()], "differing": ia.differences(ib)},
        )
    res = find_conjugator(a, b, seeds=seeds, seed=seed, candidate=candidate, weight_preserving=True)
    if res.status == "FOUND":
        check = commuting_check(res.C, a, b)
        if check.ok:
            return EquivalenceVerdict(
                "EQUIVALENT",
                "conjugator-found",
                {"C": res.to_json()["C"], "commuting": {"infinitesimal": True, "finite": True}, "seeds_used": res.seeds_used},
            )
    any_res = find_conjugator(a, b, seeds=seeds, seed=seed, candidate=candidate)
    if any_res.status == "FOUND":
        check = commuting_check(any_res.C, a, b)
        if check.ok:  # pragma: no cover - a commuting conjugator is weight preserving
            return EquivalenceVerdict("EQUIVALENT", "conjugator-found", {"C": any_res.to_json()["C"]})
        return EquivalenceVerdict(
            "INDETERMINATE",
            "commuting-check-failed",
            {
                "C": any_res.to_json()["C"],
                "commuting": {"infinitesimal": check.infinitesimal, "finite": check.finite},
                "seeds_used": any_res.seeds_used,
            },
        )
    return EquivalenceVerdict("INDETERMINATE", "search-exhausted", {"seeds_used": any_res.seeds_used + res.seeds_used})


def general_group_orbit_gate(a: BuiltinGroup, b: BuiltinGroup, seeds: int = 200, seed: int = 0) -> EquivalenceVerdict:
    if not orbits_equal(a.orbit, b.orbit):
        return EquivalenceVerdict("NOT-EQUIVALENT", "orbit-mismatch", {"orbits": [a.orbit.describe(), b.orbit.describe()]})
    if a.spec is not None and b.spec is not None:
        return coorbit_equivalent(a.spec, b.spec, seeds=seeds, seed=seed)
    if a.name == b.name:
        return EquivalenceVerdict("EQUIVALENT", "same-group", {})
    return EquivalenceVerdict("INDETERMINATE", "search-exhausted", {})


# ------------------------------------------------------------ transfer map


def transfer_map(a: ShearletGroupSpec, b: ShearletGroupSpec) -> Callable[[GroupElement], GroupElement]:
    """phi(h(r, t)) = h'(r, t') with t'_j = exp(r (lambda_j - lambda'_j)) t_j."""
    if a.d != b.d:
        raise ValueError("groups of different dimension have different orbits")

    def phi(g: GroupElement) -> GroupElement:
        if g.group != a:
            raise ValueError("element belongs to a different group")
        if g.is_exact and a.is_exact and b.is_exact:
            t = [ex.simplify(tj * sp.exp(ex.to_sympy(g.r) * (ex.to_sympy(la) - ex.to_sympy(lb)))) for tj, la, lb in zip(g.t, a.lam, b.lam)]
        else:
            r = ex.to_float(g.r)
            t = [ex.to_float(tj) * math.exp(r * (ex.to_float(la) - ex.to_float(lb))) for tj, la, lb in zip(g.t, a.lam, b.lam)]
        return b.element(g.r, t, eps=g.eps)

    return phi


# ---------------------------------------------------------------- witnesses


@dataclass
class Witness:
    """h_n = h(sigma, e_i)^n in ``source`` and the increments of their images."""

    source: ShearletGroupSpec
    target: ShearletGroupSpec
    index: int  # 0-based shear coordinate
    sigma: int
    swapped: bool
    elements: list  # h_n, float coordinates
    images: list  # phi(h_n)
    increments: list  # |i-th coordinate of phi(h_n)^{-1} phi(h_{n+1})|
    log_increments: list

    def table(self) -> dict:
        return {
            "index": self.index + 2,
            "sigma": self.sigma,
            "swapped": self.swapped,
            "n": list(range(len(self.increments))),
            "log_increment": [round(v, 12) for v in self.log_increments],
        }

    def exceeds(self, bound: float) -> bool:
        return any(v > bound for v in self.increments)

    def monotone(self, start: int = 1) -> bool:
        v = self.log_increments[start:]
        return all(b > a for a, b in zip(v, v[1:]))


def nonequivalence_witness(a: ShearletGroupSpec, b: ShearletGroupSpec, i: int | None = None, cap: int = 60) -> Witness:
    """Witness sequence for lambda_i != lambda'_i (i is 0-based).

    The direction sigma is chosen so that sigma (lambda_i - lambda'_i) > 0.
    When lambda_i = 1 in the first group the roles of the groups are swapped.
    """
    if a.d != b.d:
        raise ValueError("groups must have the same dimension")
    if cap > 60:
        raise ValueError("cap must be at most 60 to stay in double range")
    if i is None:
        diffs = [k for k in range(a.n) if not _lam_equal(a.lam[k], b.lam[k])]
        if not diffs:
            raise ValueError("equal diagonals: no witness exists")
        i = diffs[0]
    if _lam_equal(a.lam[i], b.lam[i]):
        raise ValueError(f"lambda_{i + 2} agrees in both groups: no witness exists")
    swapped = _lam_equal(a.lam[i], 1)
    src, tgt = (b, a) if swapped else (a, b)
    delta = ex.to_float(src.lam[i]) - ex.to_float(tgt.lam[i])
    sigma = 1 if delta > 0 else -1
    phi = transfer_map(src, tgt)
    e = [0.0] * src.n
    e[i] = 1.0
    step = src.element(float(sigma), e)
    elements = [src.element(0.0, [0.0] * src.n)]
    for _ in range(cap + 1):
        elements.append(src.multiply(elements[-1], step))
    images = [phi(g) for g in elements]
    incs, logs = [], []
    for n in range(cap + 1):
        inc = tgt.multiply(tgt.invert(images[n]), images[n + 1])
        v = abs(inc.t[i])
        incs.append(v)
        logs.append(math.log(v) if v > 0 else -math.inf)
    return Witness(src, tgt, i, sigma, swapped, elements, images, incs, logs)


def witness_closed_form(source: ShearletGroupSpec, target: ShearletGroupSpec, i: int, sigma: int, n: int) -> float:
    """Increment for a coordinate whose square vanishes:
    e^{sigma (n+1) D} c_{n+1} - e^{sigma n D} c_n e^{sigma (1 - lambda')},
    with D = lambda - lambda' and c_n = (e^{n sigma (1-lambda)} - 1)/(e^{sigma (1-lambda)} - 1)."""
    lam, lamp = ex.to_float(source.lam[i]), ex.to_float(target.lam[i])
    D = lam - lamp

    def c(m: int) -> float:
        if lam == 1:
            return float(m)
        return math.expm1(m * sigma * (1 - lam)) / math.expm1(sigma * (1 - lam))

    return abs(math.exp(sigma * (n + 1) * D) * c(n + 1) - math.exp(sigma * n * D) * c(n) * math.exp(sigma * (1 - lamp)))
