"""Dynamic metric space, distance evaluation and clustering cost.

Every other module talks to points through :class:`MetricSpace`.  Points are
identified by caller-chosen integer ids; internally each insertion also gets a
sequence number (arrival order) and a random priority that never changes.
"""
from __future__ import annotations

import math
from collections.abc import Collection, Iterable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BoundsViolation, InvalidArgument, InvalidState, NotFound

# rows of a distance block evaluated at once by cl()/ball()
_BLOCK_CELLS = 1 << 21


@dataclass(frozen=True, slots=True)
class PointRecord:
    id: int
    seq: int
    priority: float
    position: object  # coordinate vector, or matrix row index


class UpdateKind(str, Enum):
    INSERT = "I"
    DELETE = "D"


@dataclass(frozen=True, slots=True)
class UpdateEvent:
    kind: UpdateKind
    id: int
    position: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind is UpdateKind.DELETE and self.position is not None:
            raise InvalidArgument("delete events carry no position")

    @classmethod
    def insert(cls, id: int, position=None) -> UpdateEvent:
        pos = None if position is None else tuple(float(c) for c in position)
        return cls(UpdateKind.INSERT, int(id), pos)

    @classmethod
    def delete(cls, id: int) -> UpdateEvent:
        return cls(UpdateKind.DELETE, int(id))


@dataclass
class ChangeSet:
    """Net change of a maintained set: what entered and what left."""

    added: set = field(default_factory=set)
    removed: set = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.added) + len(self.removed)

    @classmethod
    def diff(cls, old: Collection, new: Collection) -> ChangeSet:
        old, new = set(old), set(new)
        return cls(new - old, old - new)

    def add(self, x) -> None:
        if x in self.removed:
            self.removed.discard(x)
        else:
            self.added.add(x)

    def remove(self, x) -> None:
        if x in self.added:
            self.added.discard(x)
        else:
            self.removed.add(x)

    def extend(self, later: ChangeSet) -> ChangeSet:
        """Compose in place with a change applied after this one."""
        for x in later.removed:
            self.remove(x)
        for x in later.added:
            self.add(x)
        return self

    def apply_to(self, base: set) -> set:
        return (set(base) - self.removed) | self.added

    def ordered(self) -> list[tuple[UpdateKind, int]]:
        """Deletions first, then insertions, ascending id within each kind."""
        return [(UpdateKind.DELETE, x) for x in sorted(self.removed)] + [
            (UpdateKind.INSERT, x) for x in sorted(self.added)
        ]


class MetricSpace:
    """A live point set under insertions and deletions with a fixed distance.

    Two modes are supported: Euclidean L_p over coordinate vectors, and an
    explicit symmetric distance matrix whose rows are addressed by point id.
    ``d_min``/``d_max`` bound every non-zero distance among live points for the
    lifetime of the space; inserts that would break them are rejected when
    ``check_bounds`` is on.
    """

    def __init__(
        self,
        d_min: float,
        d_max: float,
        *,
        dim: int | None = None,
        p: float = 2.0,
        matrix: np.ndarray | None = None,
        seed=None,
        check_bounds: bool = True,
    ):
        if not (d_min > 0 and d_max >= d_min):
            raise InvalidArgument(f"need 0 < d_min <= d_max, got {d_min}, {d_max}")
        self.d_min = float(d_min)
        self.d_max = float(d_max)
        self.p = float(p)
        self.check_bounds = check_bounds
        if matrix is not None:
            self.mode = "matrix"
            self.matrix = np.asarray(matrix, dtype=float)
            self.dim = None
            self._pos = np.empty(64, dtype=np.int64)
        else:
            if dim is None or dim < 1:
                raise InvalidArgument("euclidean mode needs dim >= 1")
            self.mode = "euclidean"
            self.matrix = None
            self.dim = int(dim)
            self._pos = np.empty((64, self.dim), dtype=float)
        self._records: dict[int, PointRecord] = {}
        self._used: set[int] = set()
        self._next_seq = 0
        self._rng = np.random.default_rng(seed)
        # contiguous live seqs, for the bounds scan
        self._live = np.empty(64, dtype=np.int64)
        self._live_slot: dict[int, int] = {}

    @classmethod
    def from_matrix(cls, matrix, d_min=None, d_max=None, *, seed=None, validate=True,
                    check_bounds=True) -> MetricSpace:
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidArgument("distance matrix must be square")
        if validate:
            from .oracles import verify_metric

            violation = verify_metric(m)
            if violation is not None:
                raise InvalidArgument(f"not a metric: {violation}")
        off = m[~np.eye(len(m), dtype=bool)]
        nz = off[off > 0]
        if d_min is None:
            d_min = float(nz.min()) if nz.size else 1.0
        if d_max is None:
            d_max = float(nz.max()) if nz.size else d_min
        return cls(d_min, d_max, matrix=m, seed=seed, check_bounds=check_bounds)

    # -- bookkeeping ---------------------------------------------------------

    @property
    def aspect_ratio(self) -> float:
        return self.d_max / self.d_min

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, x) -> bool:
        return x in self._records

    def ids(self):
        return self._records.keys()

    def record(self, x: int) -> PointRecord:
        try:
            return self._records[x]
        except KeyError:
            raise NotFound(x) from None

    def priority(self, x: int) -> float:
        return self.record(x).priority

    def order_key(self, x: int) -> tuple[int, int]:
        """Global lexicographic order: arrival sequence, then id."""
        return (self.record(x).seq, x)

    def add(self, x: int, position=None) -> PointRecord:
        x = int(x)
        if x in self._used:
            raise InvalidState(f"point id {x} already used in this run")
        if self.mode == "matrix":
            if position is not None and int(position) != x:
                raise InvalidArgument("matrix mode addresses rows by point id")
            if not 0 <= x < len(self.matrix):
                raise InvalidArgument(f"no matrix row {x}")
            pos = x
        else:
            if position is None:
                raise InvalidArgument("euclidean insert needs coordinates")
            pos = np.asarray(position, dtype=float).reshape(-1)
            if pos.shape[0] != self.dim:
                raise InvalidArgument(f"expected {self.dim} coordinates, got {pos.shape[0]}")
        if self.check_bounds and self._records:
            d = self._distances_from(pos, self._pos[self._live[: len(self._records)]])
            nz = d[d > 0]
            if nz.size and nz.min() < self.d_min * (1 - 1e-9):
                raise BoundsViolation(f"point {x} at distance {nz.min()} < d_min={self.d_min}")
            if d.size and d.max() > self.d_max * (1 + 1e-9):
                raise BoundsViolation(f"point {x} at distance {d.max()} > d_max={self.d_max}")

        seq = self._next_seq
        self._next_seq += 1
        if seq >= len(self._pos):
            self._pos = _grow(self._pos)
        self._pos[seq] = pos
        rec = PointRecord(x, seq, float(self._rng.random()),
                          pos if self.mode == "matrix" else self._pos[seq].copy())
        n = len(self._records)
        if n >= len(self._live):
            self._live = _grow(self._live)
        self._live[n] = seq
        self._live_slot[seq] = n
        self._records[x] = rec
        self._used.add(x)
        return rec

    def remove(self, x: int) -> PointRecord:
        rec = self._records.pop(x, None)
        if rec is None:
            raise NotFound(x)
        slot = self._live_slot.pop(rec.seq)
        last = len(self._records)
        if slot != last:
            moved = self._live[last]
            self._live[slot] = moved
            self._live_slot[moved] = slot
        return rec

    # -- distances -----------------------------------------------------------

    def positions(self, ids: Iterable[int]) -> np.ndarray:
        recs = self._records
        try:
            seqs = np.fromiter((recs[i].seq for i in ids), dtype=np.int64)
        except KeyError as e:
            raise NotFound(e.args[0]) from None
        return self._pos[seqs]

    def _sq(self, pos, many: np.ndarray) -> np.ndarray:
        # one coordinate at a time: much faster than reducing a short last axis
        out = None
        for j in range(self.dim):
            t = many[..., j] - pos[..., j]
            t *= t
            if out is None:
                out = t
            else:
                out += t
        return out

    def _distances_from(self, pos, many: np.ndarray) -> np.ndarray:
        if self.mode == "matrix":
            return self.matrix[pos, many]
        if self.p == 2.0:
            return np.sqrt(self._sq(pos, many))
        return (np.abs(many - pos) ** self.p).sum(axis=-1) ** (1.0 / self.p)

    def _within(self, pos, many: np.ndarray, r: float) -> np.ndarray:
        """Mask of rows of ``many`` at distance at most ``r`` from ``pos``."""
        if self.mode == "matrix":
            return self.matrix[pos, many] <= r
        if self.p == 2.0:
            return self._sq(pos, many) <= r * r
        return self._distances_from(pos, many) <= r

    def distances_from(self, x: int, many: np.ndarray) -> np.ndarray:
        """Distances from live point ``x`` to an array of positions."""
        return self._distances_from(self.record(x).position, many)

    def cross(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Distance block between two position arrays."""
        if self.mode == "matrix":
            return self.matrix[np.ix_(a, b)]
        return self._distances_from(b[None, :, :], a[:, None, :])

    def distance(self, a: int, b: int) -> float:
        ra, rb = self.record(a), self.record(b)
        if a == b:
            return 0.0
        if self.mode == "matrix":
            return float(self.matrix[ra.position, rb.position])
        return float(self._distances_from(ra.position, rb.position[None, :])[0])

    def distance_table(self, ids: Collection[int]) -> np.ndarray:
        pos = self.positions(ids)
        return self.cross(pos, pos)


def _grow(arr: np.ndarray) -> np.ndarray:
    out = np.empty((2 * len(arr),) + arr.shape[1:], dtype=arr.dtype)
    out[: len(arr)] = arr
    return out


def _block_rows(m: int) -> int:
    return max(1, _BLOCK_CELLS // max(1, m))


def cl(metric: MetricSpace, centers: Collection[int], space: Collection[int]) -> float:
    """Clustering cost: largest distance from a point of ``space`` to ``centers``."""
    if not space:
        return 0.0
    if not centers:
        raise InvalidArgument("centers empty for a nonempty space")
    cpos = metric.positions(centers)
    spos = metric.positions(space)
    worst = 0.0
    step = _block_rows(len(cpos))
    for lo in range(0, len(spos), step):
        d = metric.cross(spos[lo: lo + step], cpos).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def ball(metric: MetricSpace, x: int, r: float, space: Collection[int]) -> set[int]:
    """All points of ``space`` within distance ``r`` of ``x``, boundary included."""
    metric.record(x)
    pts = list(space)
    if not pts:
        return set()
    d = metric.distances_from(x, metric.positions(pts))
    return {pts[i] for i in np.flatnonzero(d <= r)}


def levels_for(d_min: float, d_max: float) -> int:
    """Smallest t with d_min * 2**t >= d_max, i.e. ceil(log2(d_max/d_min))."""
    t = max(0, math.ceil(math.log2(d_max / d_min)))
    while t > 0 and d_min * 2.0 ** (t - 1) >= d_max:
        t -= 1
    while d_min * 2.0 ** t < d_max:
        t += 1
    return t
