"""Independent reference computations used to freeze expected values.

Nothing here imports the package: groups are built from explicit matrices,
chain distances from a plain BFS over interval overlaps.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import product

import sympy as sp

# ------------------------------------------------------------- intervals


def interval_graph(intervals):
    # sweep by left endpoint; open intervals meet iff max(left) < min(right)
    n = len(intervals)
    adj = {i: set() for i in range(n)}
    order = sorted(range(n), key=lambda i: intervals[i][0])
    for p, i in enumerate(order):
        a, b = intervals[i]
        for j in order[p + 1:]:
            c, d = intervals[j]
            if c >= b:
                break
            if max(a, c) < min(b, d):
                adj[i].add(j)
                adj[j].add(i)
    return adj


def hits(intervals, x):
    return {i for i, (a, b) in enumerate(intervals) if a < x < b}


def bfs_hops(adj, sources):
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def interval_chain_distance(intervals, x, y):
    if x == y:
        return 0
    adj = interval_graph(intervals)
    dist = bfs_hops(adj, sorted(hits(intervals, x)))
    ds = [dist[j] for j in hits(intervals, y) if j in dist]
    return min(ds) + 1 if ds else float("inf")


def interval_hop_function(intervals, x, y):
    """inf{n : some Q has x, y in Q^{n*}}, by enumerating every Q."""
    if x == y:
        return 0
    adj = interval_graph(intervals)
    best = float("inf")
    for q in range(len(intervals)):
        dist = bfs_hops(adj, [q])
        dx = min((dist[i] for i in hits(intervals, x) if i in dist), default=float("inf"))
        dy = min((dist[i] for i in hits(intervals, y) if i in dist), default=float("inf"))
        best = min(best, max(dx, dy))
    return max(best, 1)


def remark_intervals():
    return [(Fraction(3 * k, 2), Fraction(3 * k, 2) + 2) for k in range(6)]


# ---------------------------------------------------------------- groups


def E(d, i, j):
    m = sp.zeros(d, d)
    m[i, j] = 1
    return m


def standard_basis(d):
    return [E(d, 0, i) for i in range(1, d)]


def toeplitz_basis(d):
    N = sp.zeros(d, d)
    for i in range(d - 1):
        N[i, i + 1] = 1
    return [N**k for k in range(1, d)]


def d4_basis(alpha):
    X2 = E(4, 0, 1) + E(4, 1, 3)
    X3 = E(4, 0, 2) + alpha * E(4, 2, 3)
    X4 = E(4, 0, 3)
    return [X2, X3, X4]


def group_matrix(basis, lam, r, t, eps=1):
    """eps * exp(-r Y) (I + sum t_j X_j)^{-1}, Y = diag(1, lam)."""
    d = basis[0].shape[0]
    Y = [1] + list(lam)
    D = sp.diag(*[sp.exp(-sp.Rational(r) * sp.nsimplify(y)) for y in Y])
    S = sp.eye(d) + sum((sp.nsimplify(tj) * X for tj, X in zip(t, basis)), sp.zeros(d, d))
    return eps * D * S.inv()


def structure_constants(basis):
    """c[i][j][k] with X_i X_j = sum_k c X_k, solved from the first rows."""
    n = len(basis)
    out = [[[sp.Integer(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            P = basis[i] * basis[j]
            coeffs = [P[0, k + 1] for k in range(n)]
            assert sum((c * X for c, X in zip(coeffs, basis)), sp.zeros(*P.shape)) == P
            out[i][j] = coeffs
    return out


def power_dims(basis):
    """dim s, dim s^2, ... up to the first zero, by brute force on matrices."""
    d = basis[0].shape[0]
    dims = []
    current = list(basis)
    while True:
        vecs = [list(M) for M in current]
        rank = sp.Matrix(vecs).rank() if vecs else 0
        dims.append(rank)
        if rank == 0:
            return dims
        current = [A * B for A, B in product(current, basis)]
        current = [M for M in current if M != sp.zeros(d, d)]


# --------------------------------------------------------------- lattices


def one_parameter_word_distance(target_r, step=Fraction(1)):
    """BFS on the lattice k * delta of the diagonal group with W = {|r| <= 1}."""
    goal = Fraction(target_r) / step
    assert goal.denominator == 1
    goal = int(goal)
    reach = int(1 / step)
    dist = {0: 0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        if u == goal:
            return dist[u]
        for s in range(-reach, reach + 1):
            v = u + s
            if v not in dist and abs(v) <= abs(goal) + reach:
                dist[v] = dist[u] + 1
                queue.append(v)
    return float("inf")
