"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

from contextlib import contextmanager
from fractions import Fraction as F
import time

import numpy as np
import pytest

import conftest
import oracles as O
from coarse_coorbit import exact as ex
from coarse_coorbit.coarse import chain_pair_distances, chain_space, fit_multiplicative, qi_probe, word_space
from coarse_coorbit.covering import (
    AlphaModulationFamily,
    DyadicFamily,
    InducedFamily,
    UniformFamily,
    chain_distance,
    closed_form_alpha_metric,
    neighbor_hop_function,
    remark_covering,
    weak_equivalence_verdict,
)
from coarse_coorbit.equivalence import (
    algebra_invariants,
    commuting_check,
    coorbit_equivalent,
    find_conjugator,
    nonequivalence_witness,
    verify_conjugator,
)
from coarse_coorbit.geometry import AffineImage, BaseSet
from coarse_coorbit.groups import conjugated_group, d4_family, standard_group, toeplitz_group
from coarse_coorbit.lattice import WordMetricLattice

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(n, title, limit=None):
    t0 = time.perf_counter()
    info = {}
    try:
        yield info
    except BaseException as exc:
        line = f"FAIL criterion {n}: {title} ({type(exc).__name__}: {exc})"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    elapsed = time.perf_counter() - t0
    detail = info.get("detail", "")
    if limit is not None and elapsed > limit:
        line = f"FAIL criterion {n}: {title} took {elapsed:.1f} s > {limit} s {detail}".rstrip()
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        pytest.fail(line)
    line = f"PASS criterion {n}: {title} [{elapsed:.1f} s] {detail}".rstrip()
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


# -------------------------------------------------------------------- 1


def test_criterion_1_remark_covering():
    with criterion(1, "hop function (1,1,3) and BFS chain distances", limit=1) as info:
        c = remark_covering()
        ivs = O.remark_intervals()
        x, y, z = F(1), F(19, 4), F(37, 4)
        pairs = [(x, y), (y, z), (x, z)]
        hops = tuple(neighbor_hop_function(c, a, b) for a, b in pairs)
        chains = tuple(chain_distance(c, a, b) for a, b in pairs)
        oracle = tuple(O.interval_chain_distance(ivs, a, b) for a, b in pairs)
        assert hops == (1, 1, 3)
        assert hops[2] > hops[0] + hops[1]
        assert chains == oracle
        # 19/4 lies in both [3, 5] and [9/2, 13/2], so the BFS oracle gives 3 for (y, z)
        assert oracle == (3, 3, 6)
        info["detail"] = f"hops={hops} chains={chains} oracle={oracle}"


# -------------------------------------------------------------------- 2


def alpha_pairs(alpha, R, rng, n=600):
    s = rng.uniform(-0.99 * R, 0.99 * R, n)
    half = n // 2
    spread = np.maximum(np.abs(s[:half]), 1.0) ** float(alpha)
    t_near = s[:half] + rng.uniform(-3, 3, half) * spread
    t = np.concatenate([t_near, rng.uniform(-0.99 * R, 0.99 * R, n - half)])
    t = np.clip(t, -0.99 * R, 0.99 * R)
    keep = (s != 0) & (t != 0)
    return s[keep], t[keep]


def test_criterion_2_alpha_metric_law():
    with criterion(2, "chain distance matches the closed-form alpha metric", limit=60) as info:
        out = {}
        for alpha in (F(0), F(1, 2), F(2, 3)):
            Ls = []
            for R in (1e2, 1e3, 1e4):
                rng = np.random.default_rng(int(R) + int(alpha * 6))
                s, t = alpha_pairs(alpha, R, rng)
                assert len(s) >= 500
                cov = AlphaModulationFamily(alpha).build(R)
                dc = chain_pair_distances(cov, s[:, None], t[:, None])
                cf = np.array([float(closed_form_alpha_metric(alpha, float(a), float(b))) for a, b in zip(s, t)])
                Ls.append(fit_multiplicative(cf, dc, 4))
            assert max(Ls) <= 8
            assert max(Ls) <= 1.5 * min(Ls)
            out[str(alpha)] = [round(v, 2) for v in Ls]
        info["detail"] = f"L per radius {out} (additive 4)"


# -------------------------------------------------------------------- 3


def test_criterion_3_weak_equivalence_and_probe():
    with criterion(3, "weak equivalence and QI probe agree", limit=120) as info:
        dy, un = DyadicFamily(), UniformFamily(positive=True)
        radii = [2**6, 2**8, 2**10]
        v = weak_equivalence_verdict(dy, un, radii)
        assert v.verdict == "NOT-EQUIVALENT"
        spaces = []
        for R in radii:
            rng = np.random.default_rng(R)
            pts = [np.array([p]) for p in np.exp(rng.uniform(0, np.log(0.9 * R), 300))]
            X, Y = chain_space(dy.build(R), pts), chain_space(un.build(R), pts)
            X.radius = Y.radius = R
            spaces.append((X, Y))
        rep = qi_probe(lambda p: p, spaces)
        assert rep.verdict == "REJECT"

        G = standard_group(2)
        A, B = InducedFamily(G, delta=1, eps=1), InducedFamily(G, delta=F(1, 2), eps=F(1, 2))
        w = weak_equivalence_verdict(A, B, [2, 3, 4])
        assert w.verdict == "EQUIVALENT-evidence"
        spaces = []
        for R in (2, 4, 6):
            rng = np.random.default_rng(R)
            pts = list(G.orbit_map_array(np.ones(300), rng.uniform(-R, R, 300), rng.uniform(-R, R, (300, 1))))
            X, Y = chain_space(A.build(R + 2), pts), chain_space(B.build(R + 2), pts)
            X.radius = Y.radius = R
            spaces.append((X, Y))
        rep2 = qi_probe(lambda p: p, spaces)
        assert rep2.verdict == "EMBEDDING-EVIDENCE"
        info["detail"] = f"dyadic/uniform: {v.verdict}, {rep.reason}; induced lattices: {w.verdict}, L={rep2.L:g}"


# -------------------------------------------------------------------- 4


def test_criterion_4_orbit_map_embedding():
    with criterion(4, "orbit map from word metric to induced chain metric", limit=120) as info:
        G = standard_group(2)
        lat, fam = WordMetricLattice(G), InducedFamily(G)
        spaces = []
        for R in (2, 4, 8):
            outer = 2 * R + 2
            keys = lat.box_keys([-R, -R], [R, R])
            X = word_space(lat.truncate(outer), [lat.point(k) for k in keys])
            X.radius = R
            rng = np.random.default_rng(R)
            ys = G.orbit_map_array(np.ones(200), rng.uniform(-R, R, 200), rng.uniform(-R, R, (200, 1)))
            Y = chain_space(fam.build(outer), list(ys))
            spaces.append((X, Y))
        rep = qi_probe(lambda g: np.array([float(v) for v in G.orbit_map(g)]), spaces)
        assert rep.verdict == "EMBEDDING-EVIDENCE"
        Ls = [float(e.L) for e in rep.envelopes]
        Cs = [float(e.C) for e in rep.envelopes]
        assert max(Ls) < 1.5 * min(Ls) and max(Cs) + 1 < 1.5 * (min(Cs) + 1)
        info["detail"] = f"L={Ls} C={Cs}"


# -------------------------------------------------------------------- 5


def test_criterion_5_equivalence_corpus():
    with criterion(5, "coorbit equivalence corpus", limit=10) as info:
        v = coorbit_equivalent(standard_group(2, [F(1, 2)]), standard_group(2, [F(1, 3)]))
        assert (v.result, v.reason) == ("NOT-EQUIVALENT", "diagonal-mismatch")
        for d in (3, 4):
            T = toeplitz_group(d)
            v = coorbit_equivalent(standard_group(d, list(T.lam)), T)
            assert (v.result, v.reason) == ("NOT-EQUIVALENT", "algebra-invariant-mismatch")
            dims = [t["power_dims"][1] for t in v.evidence["invariants"]]
            assert dims[0] == 0 and dims[1] > 0
        S1 = toeplitz_group(4, 0)
        S2 = conjugated_group(S1, [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
        v = coorbit_equivalent(S1, S2)
        assert v.result == "EQUIVALENT"
        C = ex.fraction_matrix([[ex.parse_scalar(x) for x in row] for row in v.evidence["C"]])
        assert verify_conjugator(C, S1, S2) and commuting_check(C, S1, S2).ok
        info["detail"] = f"C={v.evidence['C']}"


# -------------------------------------------------------------------- 6


def test_criterion_6_d4_family_separation():
    with criterion(6, "d=4 alpha families separated", limit=10) as info:
        inv = {a: algebra_invariants(d4_family(a)) for a in (-1, 0, 1)}
        assert inv[0] != inv[1] and inv[0] != inv[-1]
        assert inv[0].square_form != inv[1].square_form != inv[-1].square_form
        res = find_conjugator(d4_family(0), d4_family(1))
        assert res.status == "NOT-FOUND"
        info["detail"] = f"square forms {[inv[a].square_form for a in (-1, 0, 1)]}, {res.reason}"


# -------------------------------------------------------------------- 7


def test_criterion_7_witness_pipeline():
    with criterion(7, "witness sequence fed to the QI probe", limit=60) as info:
        A, B = standard_group(2, [F(1, 2)]), standard_group(2, [1])
        w = nonequivalence_witness(A, B, cap=60)
        assert w.exceeds(1e12) and w.monotone()
        short = nonequivalence_witness(A, B, cap=12)
        LA, LB = WordMetricLattice(w.source), WordMetricLattice(w.target)
        TA, TB = LA.around(short.elements, 2), LB.around(short.images, 2)
        image = {id(g): h for g, h in zip(short.elements, short.images)}
        spaces = []
        for n in (6, 9, 12):
            X = word_space(TA, short.elements[: n + 1])
            Y = word_space(TB, short.images[: n + 1])
            X.radius = Y.radius = n
            spaces.append((X, Y))
        rep = qi_probe(lambda g: image[id(g)], spaces)
        assert rep.verdict == "REJECT"
        info["detail"] = f"max log increment {w.log_increments[-1]:.1f}, probe {rep.reason}"


# -------------------------------------------------------------------- 8


def corpus():
    out = []
    for d in range(2, 7):
        out += [standard_group(d), toeplitz_group(d), toeplitz_group(d, 0)]
    out += [d4_family(a) for a in (-1, 0, 1)]
    out.append(conjugated_group(toeplitz_group(4, 0), [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
    return out


def graded_products_vanish(spec):
    basis = spec.basis()
    zero = ex.zeros((spec.d, spec.d))
    for i, X in enumerate(basis):
        for j, Yb in enumerate(basis):
            if (i + 2) + (j + 2) > spec.d + 1 and not ((X @ Yb) == zero).all():
                return False
    return True


def test_criterion_8_exactness_suite():
    with criterion(8, "exactness suite on the corpus, d <= 6") as info:
        rng = np.random.default_rng(8)
        skipped = []
        for spec in corpus():
            for i, X in enumerate(spec.basis()):
                assert all(X[0, k] == (1 if k == i + 1 else 0) for k in range(spec.d))
            if spec.filtration_violations():
                # X_3^2 = alpha X_4 breaks the literal grading for alpha != 0
                skipped.append(f"{spec.kind}(alpha={spec.alpha})")
            else:
                assert graded_products_vanish(spec)
            for _ in range(2):
                g, h, k = (
                    spec.element(F(int(rng.integers(-4, 5)), 3), [F(int(rng.integers(-5, 6)), 2) for _ in range(spec.n)], eps=int(rng.choice([1, -1])))
                    for _ in range(3)
                )
                assert spec.equal(spec.multiply(spec.multiply(g, h), k), spec.multiply(g, spec.multiply(h, k)))
                assert spec.equal(spec.multiply(g, spec.invert(g)), spec.identity())
                assert spec.equal(spec.orbit_map_inverse(spec.orbit_map(g)), g)
            T = ex.fraction_matrix([[F(int(rng.integers(-3, 4)), 2) + (3 if a == b else 0) for b in range(spec.d)] for a in range(spec.d)])
            Q = BaseSet.box([0] * spec.d, [F(1, 2)] * spec.d)
            assert AffineImage(T, [0] * spec.d, Q).volume() == abs(ex.det(T)) * Q.volume()
        for spec in (standard_group(2), toeplitz_group(3), d4_family(1), toeplitz_group(4, 0)):
            lat = WordMetricLattice(spec)
            zero = (1,) + (0,) * spec.d
            for y in lat.neighbors(zero)[:6]:
                for j in (-2, 3):
                    shift = lambda key: (key[0], key[1] + j, *key[2:])
                    assert lat.distance(shift(zero), shift(y)) == lat.distance(zero, y) == 1
                    two = lat.neighbors(y)[-1]
                    assert lat.distance(shift(zero), shift(two)) == lat.distance(zero, two)
        info["detail"] = f"grading checked except {skipped}"
