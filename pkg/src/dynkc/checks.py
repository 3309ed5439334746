"""Invariant checks shared by the test-suite and the ``verify`` subcommand.

Each check returns a list of human-readable failures; an empty list is a pass.
"""
from __future__ import annotations

import math
from collections.abc import Collection

import numpy as np

from . import oracles
from .kcenter import DynamicKCenter
from .metric import MetricSpace, cl
from .mis import DynamicMIS
from .sparsifier import MPSparsifier


def check_mis(mis: DynamicMIS, *, oracle: bool = True) -> list[str]:
    metric, lam = mis.metric, mis.threshold
    verts = sorted(mis.vertices())
    members = sorted(mis.members())
    out = []
    if not set(members) <= set(verts):
        return ["MIS members outside the vertex set"]
    if members:
        d = metric.cross(metric.positions(members), metric.positions(members))
        np.fill_diagonal(d, np.inf)
        if (d <= lam).any():
            out.append(f"MIS at threshold {lam} is not independent")
    if verts:
        if not members:
            out.append(f"MIS at threshold {lam} is not maximal")
        else:
            d = metric.cross(metric.positions(verts), metric.positions(members))
            if (d.min(axis=1) > lam).any():
                out.append(f"MIS at threshold {lam} is not maximal")
    if oracle and len(verts) <= oracles.DEFAULT_BUDGET.max_mis_vertices:
        adj = lambda a, b: metric.distance(a, b) <= lam  # noqa: E731
        ref = oracles.greedy_mis(verts, adj, lambda v: (metric.priority(v), v))
        if ref != set(members):
            out.append(f"MIS at threshold {lam} differs from the greedy oracle")
    return out


def check_kcenter(kc: DynamicKCenter, *, oracle: bool = True, opt: float | None = None) -> list[str]:
    """Nesting, per-level MIS, ordered split, output rule and cost bounds."""
    metric, k = kc.metric, kc.k
    out: list[str] = []
    space = set(kc.space)
    prev = space
    for i in range(1, kc.tau + 1):
        lvl = kc.levels[i]
        cur = set(kc.level_members(i))
        if set(lvl.mis.vertices()) != prev:
            out.append(f"level {i}: graph vertex set is not I_{i - 1}")
        if not cur <= prev:
            out.append(f"level {i}: I_{i} not nested in I_{i - 1}")
        out.extend(f"level {i}: {msg}" for msg in check_mis(lvl.mis, oracle=oracle))
        front, rest = kc.diff_split(i)
        keys = [metric.order_key(x) for x in front + rest]
        if set(front) | set(rest) != prev - cur or len(front) + len(rest) != len(prev - cur):
            out.append(f"level {i}: front/rest do not partition I_{i - 1} minus I_{i}")
        if keys != sorted(keys):
            out.append(f"output order: level {i} front/rest not in lexicographic order")
        if len(front) != max(0, min(k - len(cur), len(prev - cur))):
            out.append(f"output order: level {i} front holds {len(front)} points, expected "
                       f"{max(0, min(k - len(cur), len(prev - cur)))}")
        if space and cl(metric, cur, space) > 2 * kc.lambda_(i) + 1e-9:
            out.append(f"level {i}: coverage above 2*lambda_{i}")
        prev = cur

    centers = kc.centers
    if len(centers) != min(k, len(space)):
        out.append(f"{len(centers)} centers for k={k}, |V|={len(space)}")
    i_star = next(i for i in range(1, kc.tau + 1) if kc.level_size(i) <= k)
    if kc.level_star != i_star:
        out.append(f"i* is {kc.level_star}, expected {i_star}")
    if set(centers) != set(kc.ordered_points()[: min(k, len(space))]):
        out.append("output order: centers are not the first k points of the level order")
    # recomputed from the level sets alone, without the maintained split
    top = set(kc.level_members(i_star))
    below = set(kc.level_members(i_star - 1)) if i_star > 1 else space
    expected = top | set(sorted(below - top, key=metric.order_key)[: max(0, k - len(top))])
    if set(centers) != expected:
        out.append("output order: centers differ from I_i* plus the first points of the next level")
    if space:
        cost = cl(metric, centers, space)
        if cost > kc.cost_certificate() + 1e-9:
            out.append(f"cost {cost} above certificate {kc.cost_certificate()}")
        if opt is not None:
            if len(space) > k and cost > 8 * opt + 1e-9:
                out.append(f"ratio {cost / opt if opt else math.inf} above 8")
            for i in range(1, kc.tau + 1):
                if kc.level_size(i) > k and kc.lambda_(i) > 2 * opt + 1e-9:
                    out.append(f"lambda_{i} = {kc.lambda_(i)} > 2*OPT = {2 * opt} with |I_{i}| > k")
    return out


def check_sparsifier(sp: MPSparsifier) -> list[str]:
    out: list[str] = []
    l = sp.n_layers
    live = set(sp.depth)
    seen: set[int] = set()
    for i in range(1, l + 1):
        if sp.by_depth[i] & seen:
            out.append(f"layer {i} overlaps a deeper layer")
        seen |= sp.by_depth[i]
    if seen != live:
        out.append("layers do not partition the live points")
    expected = set(sp.by_depth[l])
    for i in range(1, l):
        centers = sp.centers[i]
        members: set[int] = set()
        for c, ms in sp.clusters(i).items():
            if c not in ms:
                out.append(f"layer {i}: center {c} outside its cluster")
            if c not in centers:
                out.append(f"layer {i}: cluster center {c} missing from S_{i}")
            if ms & members:
                out.append(f"layer {i}: clusters overlap")
            members |= ms
        if members != sp.by_depth[i]:
            out.append(f"layer {i}: clusters do not cover U_{i} minus U_{i + 1}")
        if len(centers) > 2 * sp.k:
            out.append(f"layer {i}: {len(centers)} centers")
        expected |= centers
    if expected != set(sp.out):
        out.append("output is not S_1 ∪ ... ∪ S_(l-1) ∪ U_l")
    sizes = sp.layer_sizes()
    for i in range(1, l + 1):
        if sp.count[i] >= sizes[i - 1] / 4 and sizes[i - 1] > 0:
            out.append(f"layer {i}: counter {sp.count[i]} at rest reached |U_{i}|/4")
    return out


def check_composition(metric: MetricSpace, S: Collection[int], U: Collection[int],
                      V: Collection[int]) -> list[str]:
    """cl(S, V) <= cl(U, V) + cl(S, U) for S ⊆ U ⊆ V."""
    if not V or not S:
        return []
    lhs = cl(metric, S, V)
    rhs = cl(metric, U, V) + cl(metric, S, U)
    if lhs > rhs + 1e-9:
        return [f"composition: cl(S,V)={lhs} > cl(U,V)+cl(S,U)={rhs}"]
    return []


def check_static_lemmas(metric: MetricSpace, V: list[int], k: int, rng: np.random.Generator,
                        budget: oracles.OracleBudget = oracles.DEFAULT_BUDGET) -> list[str]:
    """Subset-OPT, lazy-updates and the mu claims on one small instance."""
    out: list[str] = []
    opt_v, _ = oracles.opt_k_exact(metric, V, k, budget)

    W = [x for x in V if rng.random() < 0.6] or V[:1]
    opt_w, _ = oracles.opt_k_exact(metric, W, k, budget)
    if opt_w > 2 * opt_v + 1e-9:
        out.append(f"subset OPT: OPT(W)={opt_w} > 2*OPT(V)={2 * opt_v}")

    # V' = W differs from V in s points
    s = len(set(V) ^ set(W))
    wide = oracles.OracleBudget(max_opt_n=budget.max_opt_n, max_opt_k=len(V))
    opt_big, _ = oracles.opt_k_exact(metric, V, k + s, wide)
    if opt_big > opt_w + 1e-9:
        out.append(f"lazy updates: OPT_(k+{s})(V)={opt_big} > OPT_k(V')={opt_w}")

    mu_v = oracles.mu_k_beta(metric, V, k, 1.0, budget)
    if mu_v > 2 * opt_v + 1e-9:
        out.append(f"mu_k^1(V)={mu_v} > 2*OPT={2 * opt_v}")
    mu_w = oracles.mu_k_beta(metric, W, k, 1.0, budget)
    if mu_w > mu_v + 1e-9:
        out.append(f"mu_k^1(W)={mu_w} > mu_k^1(V)={mu_v}")

    # W2 within |V|/4 symmetric difference of V
    drop = set(rng.permutation(V)[: len(V) // 4].tolist())
    W2 = [x for x in V if x not in drop]
    if W2:
        mu_half = oracles.mu_k_beta(metric, W2, k, 0.5, budget)
        if mu_half > mu_v + 1e-9:
            out.append(f"mu_k^(1/2)(W')={mu_half} > mu_k^1(W)={mu_v}")
    return out
