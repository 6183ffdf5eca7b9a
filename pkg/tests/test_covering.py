from fractions import Fraction as F
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from coarse_coorbit.coarse import chain_distances, chain_pair_distances
from coarse_coorbit.covering import (
    AlphaModulationFamily,
    Covering,
    CoveringError,
    DyadicFamily,
    ExplicitFamily,
    InducedFamily,
    OracleBudget,
    OutsideWindowError,
    UniformFamily,
    admissibility_bounds,
    admissibility_constant,
    chain_distance,
    check_orbit_coverage,
    closed_form_alpha_metric,
    family_from_json,
    induced_covering,
    intrinsic_weight,
    is_moderate,
    neighbor_hop_function,
    neighbors,
    remark_covering,
    subordination_count,
    weak_equivalence_verdict,
)
from coarse_coorbit.geometry import AffineImage, BaseSet
from coarse_coorbit.groups import standard_group

X, Y, Z = F(1), F(19, 4), F(37, 4)


def intervals_covering(intervals):
    sets = [AffineImage([[1]], [0], BaseSet.from_bounds([a], [b])) for a, b in intervals]
    return ExplicitFamily(sets).build()


# ----------------------------------------------------------- remark covering


def test_remark_neighbors():
    c = remark_covering()
    assert neighbors(c, {2}, 1) == {1, 2, 3}
    assert neighbors(c, {0}, 2) == {0, 1, 2}
    assert neighbors(c, {4, 1}, 0) == {4, 1}
    with pytest.raises(IndexError):
        neighbors(c, {6}, 1)
    with pytest.raises(ValueError):
        neighbors(c, {0}, -1)


def test_remark_chain_distance_matches_bfs_oracle():
    c = remark_covering()
    ivs = O.remark_intervals()
    for a, b in [(X, Y), (Y, Z), (X, Z)]:
        assert chain_distance(c, a, b) == O.interval_chain_distance(ivs, a, b)
    assert [chain_distance(c, a, b) for a, b in [(X, Y), (Y, Z), (X, Z)]] == [3, 3, 6]
    assert chain_distance(c, X, X) == 0


def test_remark_hop_function_breaks_triangle_inequality():
    c = remark_covering()
    ivs = O.remark_intervals()
    vals = [neighbor_hop_function(c, a, b) for a, b in [(X, Y), (Y, Z), (X, Z)]]
    assert vals == [1, 1, 3]
    assert vals == [O.interval_hop_function(ivs, a, b) for a, b in [(X, Y), (Y, Z), (X, Z)]]
    assert vals[2] > vals[0] + vals[1]


def test_remark_admissibility_and_single_set():
    assert admissibility_constant(remark_covering()) == 3
    single = intervals_covering([(0, 1)])
    assert admissibility_constant(single) == 1


def test_points_outside_union_raise():
    with pytest.raises(OutsideWindowError):
        chain_distance(remark_covering(), F(-1), X)


# ------------------------------------------------------- random 1D coverings


@st.composite
def interval_lists(draw):
    n = draw(st.integers(2, 9))
    out = []
    for _ in range(n):
        a = draw(st.fractions(min_value=0, max_value=12, max_denominator=4))
        w = draw(st.fractions(min_value=F(1, 4), max_value=3, max_denominator=4))
        out.append((a, a + w))
    return out


@given(interval_lists(), st.data())
def test_chain_distance_matches_bfs_and_is_metric(ivs, data):
    c = intervals_covering(ivs)
    pts = []
    for _ in range(4):
        a, b = data.draw(st.sampled_from(ivs))
        frac = data.draw(st.fractions(min_value=F(1, 8), max_value=F(7, 8), max_denominator=8))
        pts.append(a + (b - a) * frac)
    D = [[chain_distance(c, p, q) for q in pts] for p in pts]
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            assert D[i][j] == O.interval_chain_distance(ivs, p, q)
            assert D[i][j] == D[j][i]
            if p != q and any(a < p < b and a < q < b for a, b in ivs):
                assert D[i][j] <= 1
            for k in range(len(pts)):
                assert D[i][k] <= D[i][j] + D[j][k]
    M = chain_distances(c, [np.array([float(p)]) for p in pts], [np.array([float(p)]) for p in pts])
    assert np.array_equal(M, np.array(D, dtype=float))


@given(interval_lists())
def test_subordination_of_self_is_admissibility(ivs):
    c = intervals_covering(ivs)
    assert subordination_count(c, c).max_lower == admissibility_constant(c)


def test_components_give_infinite_distance():
    c = intervals_covering([(-3, -1), (-2, -F(1, 2)), (F(1, 2), 2), (1, 3)])
    assert math.isinf(chain_distance(c, F(-5, 2), F(5, 2)))
    assert chain_distance(c, F(-5, 2), -F(3, 4)) == 2


# ------------------------------------------------------------- families


def test_alpha_modulation_geometry():
    fam = AlphaModulationFamily(F(1, 2))
    assert fam.center_radius(4) == (16, 4 * fam.r)
    assert fam.center_radius(-2) == (-4, 2 * fam.r)
    assert fam.r == 2
    c = AlphaModulationFamily(0).build(50)
    assert admissibility_constant(c) == 3


def test_alpha_modulation_undercovering_rejected():
    with pytest.raises(CoveringError):
        AlphaModulationFamily(F(1, 2), r=F(1, 2)).build(100)


def test_alpha_out_of_range():
    with pytest.raises(CoveringError):
        AlphaModulationFamily(1)


def test_closed_form_metric_examples():
    assert closed_form_alpha_metric(F(1, 2), 5, 5) == 1
    assert closed_form_alpha_metric(0, 1, 9) == 9
    assert closed_form_alpha_metric(F(1, 2), 1, 100) == 10
    with pytest.raises(ValueError):
        closed_form_alpha_metric(F(1, 2), 0, 1)


def test_dyadic_admissibility_and_weights():
    c = DyadicFamily().build(2**10)
    assert admissibility_constant(c) == 3
    w = intrinsic_weight(c, 1)
    assert all(v == F(2) ** k for v, k in zip(w.values, c.keys))
    assert all(v == 1 for v in intrinsic_weight(c, 0).values)


def test_alpha_modulation_intrinsic_weight():
    fam = AlphaModulationFamily(F(1, 2))
    c = fam.build(200)
    w = intrinsic_weight(c, 1)
    for v, k in zip(w.values, c.keys):
        assert v == 2 * fam.r * abs(k)


def test_moderateness():
    fam = DyadicFamily()
    c = fam.build(2**8)
    const = is_moderate(lambda k: 1, c)
    assert const.moderate and const.worst_ratio == 1
    dyadic = is_moderate(lambda k: F(2) ** k, fam, radii=[2**4, 2**8, 2**16])
    assert dyadic.moderate and dyadic.worst_ratio == pytest.approx(2)
    wild = is_moderate(lambda k: 2.0 ** (k * k), fam, radii=[2**4, 2**8, 2**16])
    assert not wild.moderate


@pytest.mark.parametrize("alpha", [F(1, 2), 1, F(-1, 3)])
def test_intrinsic_weights_moderate_with_volume_ratio_bound(alpha):
    c = DyadicFamily().build(2**12)
    res = is_moderate(intrinsic_weight(c, alpha), c)
    assert res.worst_ratio <= 2 ** abs(float(alpha)) + 1e-9


def test_subordination_dyadic_vs_uniform_grows():
    q = DyadicFamily().build(2**11)
    p = UniformFamily(positive=True).build(2**11)
    counts = subordination_count(q, p)
    k10 = q.keys.index(10)
    assert counts.lower[k10] >= 1024


def test_subordination_nested_refinement_bounded():
    p = UniformFamily(step=2, length=4).build(64)
    q = UniformFamily(step=1, length=2).build(64)
    assert subordination_count(q, p).max_upper <= 4


def test_weak_equivalence_examples():
    dy = DyadicFamily()
    un = UniformFamily(positive=True)
    assert weak_equivalence_verdict(dy, un, [2**6, 2**8, 2**10]).verdict == "NOT-EQUIVALENT"
    same = weak_equivalence_verdict(dy, dy, [2**6, 2**8, 2**10])
    assert same.verdict == "EQUIVALENT-evidence"
    assert set(same.forward.upper) == {admissibility_constant(dy.build(2**10))}
    half, two_thirds = AlphaModulationFamily(F(1, 2)), AlphaModulationFamily(F(2, 3))
    assert weak_equivalence_verdict(half, two_thirds, [1e2, 1e4, 1e6]).verdict == "NOT-EQUIVALENT"


def test_weak_equivalence_needs_increasing_radii():
    with pytest.raises(ValueError):
        weak_equivalence_verdict(DyadicFamily(), DyadicFamily(), [4])
    with pytest.raises(ValueError):
        weak_equivalence_verdict(DyadicFamily(), DyadicFamily(), [8, 4])


# ---------------------------------------------------------- induced sets


def test_induced_covering_contains_lattice_orbit_points():
    G = standard_group(2)
    c = induced_covering(G, radius=3)
    fam = c.family
    for (sgn, r, t, key), s in zip(fam.lattice_coords(3), c.sets):
        x = G.orbit_map_array(np.array([sgn], dtype=float), np.array([r]), np.array([t], dtype=float))[0]
        assert s.contains_array(x[None, :])[0]
    assert check_orbit_coverage(c, samples=400) == []
    assert admissibility_bounds(c).upper < 20


def test_induced_volumes_follow_determinant():
    G = standard_group(2)
    c = induced_covering(G, radius=2)
    base = c.family.base.volume()
    for (sgn, r, t, key), s in zip(c.family.lattice_coords(2), c.sets):
        # |det h| = e^{-r (1 + lambda)}
        assert float(s.volume()) == pytest.approx(float(base) * math.exp(1.5 * r), rel=1e-12)


# --------------------------------------------------------------- json


def test_family_json_round_trip(tmp_path):
    for fam in [UniformFamily(1, 2), DyadicFamily(), AlphaModulationFamily(F(1, 2))]:
        back = family_from_json(fam.to_json())
        a, b = fam.build(64), back.build(64)
        assert len(a) == len(b) and a.nerve.edges == b.nerve.edges


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"kind": "nope"}, "'kind'"),
        ({"kind": "alpha_modulation", "parameters": {}}, "alpha"),
        ({"kind": "explicit", "parameters": {"sets": []}}, "sets"),
        ({"kind": "uniform", "parameters": "x"}, "'parameters'"),
        ({"kind": "uniform", "dimension": 2}, "'dimension'"),
    ],
)
def test_family_json_errors(doc, field):
    with pytest.raises(ValueError, match=field):
        family_from_json(doc)


def test_budget_seed_does_not_change_nerve():
    G = standard_group(2)
    a = InducedFamily(G).build(2, OracleBudget(seed=1))
    b = InducedFamily(G).build(2, OracleBudget(seed=7, workers=2))
    assert a.nerve.edges == b.nerve.edges


def test_pair_distances_agree_with_matrix():
    c = AlphaModulationFamily(F(1, 2)).build(400)
    rng = np.random.default_rng(3)
    xs = rng.uniform(-390, 390, (30, 1))
    ys = rng.uniform(-390, 390, (30, 1))
    full = chain_distances(c, list(xs), list(ys))
    assert np.array_equal(chain_pair_distances(c, list(xs), list(ys)), np.diag(full))


def test_covering_requires_sets():
    with pytest.raises(CoveringError):
        Covering([])
