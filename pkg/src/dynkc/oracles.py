"""Brute-force reference computations used to check the dynamic structures.

Nothing here imports the dynamic modules; the only shared code is the metric's
distance evaluation.  Exponential routines enforce an :class:`OracleBudget`.
"""
from __future__ import annotations

import itertools
from collections.abc import Callable, Collection, Hashable, Iterable, Sequence
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import BudgetExceeded, InvalidArgument
from .metric import MetricSpace


@dataclass(frozen=True)
class OracleBudget:
    max_opt_n: int = 14
    max_opt_k: int = 4
    max_mis_vertices: int = 64
    max_metric_n: int = 400


DEFAULT_BUDGET = OracleBudget()


def _table(metric: MetricSpace, space: Collection[int]) -> tuple[list[int], np.ndarray]:
    pts = sorted(space)
    n = len(pts)
    d = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            d[a, b] = d[b, a] = metric.distance(pts[a], pts[b])
    return pts, d


def cost_of(metric: MetricSpace, centers: Collection[int], space: Collection[int]) -> float:
    """cl(centers, space) by direct pairwise evaluation."""
    if not space:
        return 0.0
    if not centers:
        raise InvalidArgument("no centers")
    return max(min(metric.distance(x, c) for c in centers) for x in space)


def opt_k_exact(metric: MetricSpace, space: Collection[int], k: int,
                budget: OracleBudget = DEFAULT_BUDGET) -> tuple[float, frozenset[int]]:
    """Exact k-center optimum by enumerating every center subset of size min(k, n)."""
    pts, d = _table(metric, space)
    return opt_from_table(pts, d, k, budget)


def opt_from_table(pts: Sequence, d: np.ndarray, k: int,
                   budget: OracleBudget = DEFAULT_BUDGET) -> tuple[float, frozenset]:
    n = len(pts)
    if n > budget.max_opt_n or min(k, n) > budget.max_opt_k and k < n:
        raise BudgetExceeded(f"exact OPT on n={n}, k={k} exceeds the budget")
    if k >= n:
        return 0.0, frozenset(pts)
    best, witness = np.inf, ()
    for combo in itertools.combinations(range(n), k):
        v = d[:, combo].min(axis=1).max()
        if v < best:
            best, witness = v, combo
    return float(best), frozenset(pts[i] for i in witness)


def gonzalez(metric: MetricSpace, space: Collection[int], k: int, first: int) -> list[int]:
    """Farthest-first traversal from ``first``; a 2-approximation for k-center."""
    pts = list(space)
    if not pts:
        raise InvalidArgument("empty space")
    if first not in space:
        raise InvalidArgument("first center must belong to the space")
    pos = metric.positions(pts)
    centers = [first]
    near = metric.distances_from(first, pos)
    while len(centers) < min(k, len(pts)):
        j = int(np.argmax(near))
        if near[j] == 0:
            break
        centers.append(pts[j])
        near = np.minimum(near, metric.distances_from(pts[j], pos))
    return centers


def greedy_mis(vertices: Iterable[Hashable], adjacent: Callable[[Hashable, Hashable], bool],
               priority: Callable[[Hashable], object],
               budget: OracleBudget = DEFAULT_BUDGET) -> set:
    """Scan vertices by ascending priority; keep one iff no kept vertex is adjacent."""
    order = sorted(vertices, key=priority)
    if len(order) > budget.max_mis_vertices:
        raise BudgetExceeded(f"greedy MIS check on {len(order)} vertices")
    kept: list = []
    for v in order:
        if not any(adjacent(v, u) for u in kept):
            kept.append(v)
    return set(kept)


def greedy_mis_edges(vertices: Iterable[Hashable], edges: Iterable[tuple], order_key) -> set:
    adj: dict = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return greedy_mis(vertices, lambda u, v: v in adj.get(u, ()), order_key,
                      OracleBudget(max_mis_vertices=10**9))


def is_independent(vertices: Collection, adjacent) -> bool:
    vs = list(vertices)
    return not any(adjacent(a, b) for a, b in itertools.combinations(vs, 2))


def is_maximal(members: Collection, graph_vertices: Iterable, adjacent) -> bool:
    ms = set(members)
    return all(v in ms or any(adjacent(v, m) for m in ms) for v in graph_vertices)


# -- mu_k^beta ------------------------------------------------------------------


def diameter(metric: MetricSpace, pts: Collection[int]) -> float:
    pts = list(pts)
    return max((metric.distance(a, b) for a, b in itertools.combinations(pts, 2)), default=0.0)


def _max_cover_cliques(d: np.ndarray, mu: float, k: int) -> int:
    """Largest number of points covered by k disjoint sets of diameter <= mu."""
    n = len(d)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    rows, cols = np.nonzero(np.triu(d <= mu, 1))
    g.add_edges_from(zip(rows.tolist(), cols.tolist()))
    # subsets of cliques are cliques, so overlapping maximal cliques may be
    # trimmed to disjoint ones without losing coverage of their union
    cliques = [frozenset(c) for c in nx.find_cliques(g)]
    if len(cliques) <= k:
        return len(frozenset().union(*cliques)) if cliques else 0
    best = 0
    for combo in itertools.combinations(cliques, k):
        best = max(best, len(frozenset().union(*combo)))
        if best == n:
            break
    return best


def _max_cover_line(xs: np.ndarray, mu: float, k: int) -> int:
    """Same as above for points on a line: k disjoint intervals of length <= mu."""
    xs = np.sort(xs)
    n = len(xs)
    # reach[i]: index one past the last point within mu of xs[i]
    reach = np.searchsorted(xs, xs + mu, side="right")
    best = np.zeros(n + 1, dtype=np.int64)  # best[i]: cover within xs[i:]
    for _ in range(k):
        nxt = np.zeros(n + 1, dtype=np.int64)
        for i in range(n - 1, -1, -1):
            nxt[i] = max(nxt[i + 1], reach[i] - i + best[reach[i]])
        best = nxt
    return int(best[0])


def mu_k_beta(metric: MetricSpace, W: Collection[int], k: int, beta: float,
              budget: OracleBudget = DEFAULT_BUDGET) -> float:
    """Smallest mu such that k disjoint subsets of W of diameter <= mu cover beta*|W| points.

    Exact.  One-dimensional Euclidean inputs use an interval program and may be
    large; anything else goes through maximal-clique enumeration of the
    threshold graph and must fit ``budget.max_opt_n``.
    """
    if not 0 < beta <= 1:
        raise InvalidArgument("beta must be in (0, 1]")
    pts = sorted(W)
    need = beta * len(pts)
    if len(pts) <= k:
        return 0.0
    line = metric.mode == "euclidean" and metric.dim == 1
    if line:
        xs = metric.positions(pts)[:, 0]
        cands = np.unique(np.abs(xs[:, None] - xs[None, :]))
        cover = lambda mu: _max_cover_line(xs, mu, k)  # noqa: E731
    else:
        if len(pts) > budget.max_opt_n:
            raise BudgetExceeded(f"mu_k_beta on {len(pts)} points")
        _, d = _table(metric, pts)
        cands = np.unique(np.concatenate([[0.0], d.ravel()]))
        cover = lambda mu: _max_cover_cliques(d, mu, k)  # noqa: E731
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cover(cands[mid]) >= need - 1e-9:
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


# -- static Mettu-Plaxton -------------------------------------------------------


@dataclass
class StaticLayers:
    layers: list[list[int]]  # U_1, U_2, ..., U_l, each ascending
    centers: list[list[int]]  # S_1, ..., S_{l-1}
    radii: list[float]

    @property
    def output(self) -> set[int]:
        out = set(self.layers[-1])
        for s in self.centers:
            out.update(s)
        return out


def static_mettu_plaxton(metric: MetricSpace, space: Collection[int], k: int, rng,
                         boost: int = 1, stop: int | None = None) -> StaticLayers:
    """Static layered pass with ``boost`` almost-cover attempts per layer.

    Draws ``rng.choice(|U|, min(2k, |U|), replace=False)`` over U in ascending
    id order for every attempt, so a generator in the same state reproduces
    the dynamic structure's rebuild exactly.
    """
    stop = 16 * k if stop is None else stop
    U = sorted(space)
    layers, centers, radii = [U], [], []
    while len(U) > stop and len(U) >= 4:
        best = None
        for _ in range(boost):
            idx = rng.choice(len(U), size=min(2 * k, len(U)), replace=False)
            S = sorted(U[i] for i in idx)
            sset = set(S)
            near = {x: (0.0 if x in sset else min(metric.distance(x, c) for c in S)) for x in U}
            ranked = sorted(U, key=lambda x: (near[x], x not in sset, x))
            covered = ranked[: len(U) // 4]
            r = max((near[x] for x in covered), default=0.0)
            if best is None or r < best[0]:
                best = (r, S, set(covered))
        r, S, covered = best
        # a sampled center left outside the covered quarter owns nothing
        centers.append([c for c in S if c in covered])
        radii.append(r)
        U = [x for x in U if x not in covered]
        layers.append(U)
    return StaticLayers(layers, centers, radii)


# -- metric validation ----------------------------------------------------------


@dataclass(frozen=True)
class MetricViolation:
    kind: str
    where: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.detail}"


def verify_metric(matrix, *, tol: float = 1e-9,
                  budget: OracleBudget = DEFAULT_BUDGET) -> MetricViolation | None:
    """First violation of symmetry, zero diagonal, or the triangle inequality, if any."""
    d = np.asarray(matrix, dtype=float)
    n = len(d)
    if d.shape != (n, n):
        return MetricViolation("shape", (), f"{d.shape} is not square")
    if n > budget.max_metric_n:
        raise BudgetExceeded(f"triangle scan on n={n}")
    if (d < 0).any():
        i, j = map(int, np.argwhere(d < 0)[0])
        return MetricViolation("negative", (i, j), f"d={d[i, j]}")
    for i in range(n):
        if d[i, i] != 0:
            return MetricViolation("diagonal", (i,), f"d(i,i)={d[i, i]}")
    asym = np.argwhere(np.abs(d - d.T) > tol * np.maximum(1.0, np.abs(d)))
    if len(asym):
        i, j = map(int, asym[0])
        return MetricViolation("asymmetric", (i, j), f"{d[i, j]} != {d[j, i]}")
    for m in range(n):
        # d[i, j] <= d[i, m] + d[m, j] for every i, j
        bad = d > d[:, m, None] + d[None, m, :] + tol * np.maximum(1.0, d)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            return MetricViolation("triangle", (i, m, j),
                                   f"d({i},{j})={d[i, j]} > d({i},{m})+d({m},{j})")
    return None
