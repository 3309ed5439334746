"""Dynamic Mettu-Plaxton style sparsifier for k-center.

Maintains nested layers V = U_1 ⊇ U_2 ⊇ ... ⊇ U_l.  Layer i < l holds a set
S_i of at most 2k sampled centers, each owning the points of U_i minus U_{i+1}
that were assigned to it.  The output is S_1 ∪ ... ∪ S_{l-1} ∪ U_l.

Updates are lazy (an insert lands in every layer; a deleted center hands its
role to the smallest surviving id of its cluster) and each one is followed by
a trigger scan: the first layer whose update count reached a quarter of its
size is rebuilt, together with everything under it, by repeated boosted
``almost_cover`` calls until the remainder has at most 16k points (the factor
16 is configurable so that tiny instances can exercise the layering).
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidState, NotFound
from .metric import ChangeSet, MetricSpace


@dataclass(frozen=True)
class SparsifierConfig:
    k: int
    n_max: int
    boost_c: float = 2.0
    seed: int | None = None
    stop_factor: int = 16

    def __post_init__(self):
        if self.k < 1 or self.n_max < 1 or self.stop_factor < 1:
            raise InvalidArgument("k, n_max and stop_factor must be positive")

    @property
    def boost(self) -> int:
        return max(1, math.ceil(self.boost_c * math.log2(max(2, self.n_max))))

    @property
    def stop_size(self) -> int:
        return self.stop_factor * self.k

    @property
    def sample_size(self) -> int:
        return 2 * self.k


@dataclass
class Cover:
    centers: list[int]
    remainder: list[int]
    clusters: dict[int, list[int]]
    radius: float


class _Draw:
    """One almost-cover attempt over a fixed candidate array, kept as arrays."""

    __slots__ = ("center_idx", "nearest", "covered", "radius")

    def __init__(self, center_idx, nearest, covered, radius):
        self.center_idx = center_idx
        self.nearest = nearest
        self.covered = covered
        self.radius = radius


def _draw(metric: MetricSpace, ids: np.ndarray, pos: np.ndarray, k: int, rng) -> _Draw:
    n = len(ids)
    s = min(2 * k, n)
    idx = rng.choice(n, size=s, replace=False)
    # centers ascending by id so argmin ties go to the smallest center id
    idx = idx[np.argsort(ids[idx], kind="stable")]
    d = metric.cross(pos, pos[idx])
    nearest = d.argmin(axis=1)
    # a sampled center always owns itself, even next to a coincident center
    nearest[idx] = np.arange(s)
    dist = d[np.arange(n), nearest]
    not_center = np.ones(n, dtype=bool)
    not_center[idx] = False
    c = n // 4
    covered = np.lexsort((ids, not_center, dist))[:c]
    radius = float(dist[covered].max()) if c else 0.0
    return _Draw(idx, nearest, covered, radius)


def _materialize(ids: np.ndarray, draw: _Draw) -> Cover:
    centers = ids[draw.center_idx].tolist()
    clusters: dict[int, list[int]] = {c: [] for c in centers}
    for j in draw.covered:
        clusters[centers[draw.nearest[j]]].append(int(ids[j]))
    keep = np.ones(len(ids), dtype=bool)
    keep[draw.covered] = False
    return Cover(centers, ids[keep].tolist(), clusters, draw.radius)


def almost_cover(metric: MetricSpace, W: Sequence[int], k: int, rng) -> Cover:
    """Sample min(2k, |W|) centers and peel off the quarter of W closest to them.

    ``W`` is taken in ascending id order so results depend only on the set and
    the generator state.  Ties for the covered quarter break by distance, then
    centers before non-centers, then id; each covered point joins its nearest
    center, ties to the smaller center id.
    """
    if not W:
        raise InvalidArgument("almost_cover on an empty set")
    ids = np.array(sorted(W), dtype=np.int64)
    return _materialize(ids, _draw(metric, ids, metric.positions(ids), k, rng))


class _Cluster:
    __slots__ = ("layer", "center", "members")

    def __init__(self, layer: int, center: int, members: set[int]):
        self.layer = layer
        self.center = center
        self.members = members


@dataclass
class ReconstructReport:
    rebuilt_from: int | None
    layers: int
    changes: ChangeSet


@dataclass(frozen=True)
class SparsifierOutput:
    points: frozenset
    layers: int


class MPSparsifier:
    def __init__(self, metric: MetricSpace, k: int, *, n_max: int, boost_c: float = 2.0,
                 seed=None, boost: int | None = None, stop_factor: int = 16):
        self.metric = metric
        self.config = SparsifierConfig(int(k), int(n_max), boost_c, seed, stop_factor)
        self.k = self.config.k
        self.boost = boost if boost is not None else self.config.boost
        self.rng = np.random.default_rng(seed)
        self.n_layers = 1
        # index 0 unused; layer i data lives at index i
        self.count = [0, 0]
        self.by_depth: list[set[int]] = [set(), set()]
        self.centers: list[set[int]] = [set(), set()]
        self.depth: dict[int, int] = {}
        self.cluster_of: dict[int, _Cluster] = {}
        self.layer_clusters: list[list[_Cluster]] = [[], []]
        self._out: set[int] = set()
        self.last_report: ReconstructReport | None = None
        self.radii: dict[int, float] = {}

    # -- queries -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.depth)

    def __contains__(self, x) -> bool:
        return x in self.depth

    def output(self) -> SparsifierOutput:
        return SparsifierOutput(frozenset(self._out), self.n_layers)

    @property
    def out(self) -> set[int]:
        """Live view of the output set; do not mutate."""
        return self._out

    def layer_size(self, i: int) -> int:
        """|U_i|."""
        return sum(len(self.by_depth[j]) for j in range(i, self.n_layers + 1))

    def layer(self, i: int) -> set[int]:
        out: set[int] = set()
        for j in range(i, self.n_layers + 1):
            out |= self.by_depth[j]
        return out

    def layer_sizes(self) -> list[int]:
        sizes, acc = [], 0
        for j in range(self.n_layers, 0, -1):
            acc += len(self.by_depth[j])
            sizes.append(acc)
        return sizes[::-1]

    def clusters(self, i: int) -> dict[int, frozenset[int]]:
        """center -> members (center included) for layer i < l."""
        return {cl.center: frozenset(cl.members) for cl in self.layer_clusters[i] if cl.members}

    def cluster_map(self) -> dict[int, frozenset[int]]:
        out: dict[int, frozenset[int]] = {}
        for i in range(1, self.n_layers):
            out.update(self.clusters(i))
        return out

    def cluster_refs(self) -> dict[int, set[int]]:
        """center -> the live member set object of its cluster, without copying.

        The sets are only ever shrunk by deletions, and are abandoned (not
        cleared) when their layer is rebuilt, so holders must filter members by
        liveness.
        """
        return {cl.center: cl.members
                for i in range(1, self.n_layers)
                for cl in self.layer_clusters[i] if cl.members}

    # -- lazy updates --------------------------------------------------------

    def insert(self, x: int) -> ChangeSet:
        if x in self.depth:
            raise InvalidState(f"point {x} already present")
        self.metric.record(x)
        self.depth[x] = self.n_layers
        self.by_depth[self.n_layers].add(x)
        self._out.add(x)
        change = ChangeSet(added={x})
        return change.extend(self.reconstruct().changes)

    def delete(self, x: int) -> ChangeSet:
        d = self.depth.pop(x, None)
        if d is None:
            raise NotFound(x)
        self.by_depth[d].discard(x)
        change = ChangeSet()
        if d == self.n_layers:
            self._out.discard(x)
            change.remove(x)
        else:
            cl = self.cluster_of.pop(x)
            cl.members.discard(x)
            if cl.center == x:
                self.centers[d].discard(x)
                self._out.discard(x)
                change.remove(x)
                if cl.members:
                    p = min(cl.members)
                    cl.center = p
                    self.centers[d].add(p)
                    self._out.add(p)
                    change.add(p)
        return change.extend(self.reconstruct().changes)

    # -- reconstruction ------------------------------------------------------

    def reconstruct(self) -> ReconstructReport:
        """Count the update on every layer and rebuild from the first due layer."""
        for i in range(1, self.n_layers + 1):
            self.count[i] += 1
        sizes = self.layer_sizes()
        j = next((i for i in range(1, self.n_layers + 1)
                  if self.count[i] >= sizes[i - 1] / 4), None)
        if j is None:
            self.last_report = ReconstructReport(None, self.n_layers, ChangeSet())
            return self.last_report
        self.last_report = self.rebuild_from(j)
        return self.last_report

    def rebuild_from(self, j: int) -> ReconstructReport:
        old_part: set[int] = set(self.by_depth[self.n_layers])
        pts: set[int] = set()
        for i in range(j, self.n_layers + 1):
            pts |= self.by_depth[i]
            if i < self.n_layers:
                old_part |= self.centers[i]
        for x in pts:
            self.cluster_of.pop(x, None)
        del self.by_depth[j:], self.centers[j:], self.count[j:], self.layer_clusters[j:]
        for i in [i for i in self.radii if i >= j]:
            del self.radii[i]

        level = j
        stop = self.config.stop_size
        # below 4 points a cover peels nothing, which only small stop sizes reach
        while len(pts) > stop and len(pts) >= 4:
            ids = np.array(sorted(pts), dtype=np.int64)
            pos = self.metric.positions(ids)
            best = None
            for _ in range(self.boost):
                draw = _draw(self.metric, ids, pos, self.k, self.rng)
                if best is None or draw.radius < best.radius:
                    best = draw
            cover = _materialize(ids, best)
            self.radii[level] = cover.radius
            layer_pts: set[int] = set()
            layer_cls = []
            for c, members in cover.clusters.items():
                if not members:
                    continue
                cl = _Cluster(level, c, set(members))
                layer_cls.append(cl)
                for m in members:
                    self.cluster_of[m] = cl
                layer_pts.update(members)
            self.by_depth.append(layer_pts)
            self.layer_clusters.append(layer_cls)
            self.centers.append({cl.center for cl in layer_cls})
            self.count.append(0)
            for x in layer_pts:
                self.depth[x] = level
            pts = set(cover.remainder)
            level += 1
        self.by_depth.append(pts)
        self.layer_clusters.append([])
        self.centers.append(set())
        self.count.append(0)
        for x in pts:
            self.depth[x] = level
        self.n_layers = level

        new_part = set(pts)
        for i in range(j, level):
            new_part |= self.centers[i]
        change = ChangeSet.diff(old_part, new_part)
        self._out -= change.removed
        self._out |= change.added
        return ReconstructReport(j, level, change)
