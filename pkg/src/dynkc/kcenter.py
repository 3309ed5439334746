"""Dynamic k-center through nested threshold-graph MISs.

Level i (1 <= i <= tau) keeps the MIS I_i of the threshold graph with
threshold ``lambda_i = 2**(i-2) * d_min`` induced on I_{i-1}, with I_0 the
current point set.  Thresholds double per level and the top one reaches
d_max, so I_tau holds a single point per coincidence class.  The output is
I_{i*} plus the first k - |I_{i*}| points of I_{i*-1} minus I_{i*} in arrival
order, where i* is the first level with at most k points.
"""
from __future__ import annotations

from collections.abc import Collection
from dataclasses import dataclass, field

from sortedcontainers import SortedList

from .errors import InvalidArgument, InvalidState, NotFound
from .metric import ChangeSet, MetricSpace, levels_for
from .mis import DynamicMIS


@dataclass(frozen=True)
class LevelConfig:
    k: int
    d_min: float
    d_max: float

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgument("k must be positive")

    @property
    def tau(self) -> int:
        return levels_for(self.d_min, self.d_max) + 2

    def threshold(self, i: int) -> float:
        return 2.0 ** (i - 2) * self.d_min


@dataclass(frozen=True)
class Solution:
    centers: frozenset
    level: int
    cost_upper: float


@dataclass
class StepReport:
    solution: ChangeSet
    levels: list[ChangeSet] = field(default_factory=list)  # index 0 is I_0 = V


class _Level:
    """MIS of one level plus the split of I_{i-1} minus I_i into front/rest."""

    def __init__(self, metric: MetricSpace, threshold: float):
        self.mis = DynamicMIS(metric, threshold)
        self.front = SortedList()
        self.rest = SortedList()
        self._key: dict[int, tuple[int, int]] = {}

    def diff_size(self) -> int:
        return len(self.front) + len(self.rest)

    def place(self, x: int, key: tuple[int, int] | None) -> None:
        """Insert (key given) or remove (key None) ``x`` in the ordered difference."""
        old = self._key.pop(x, None)
        if old is not None:
            if old in self.front:
                self.front.remove(old)
            else:
                self.rest.remove(old)
        if key is not None:
            self._key[x] = key
            if self.front and key < self.front[-1]:
                self.front.add(key)
            else:
                self.rest.add(key)

    def rebalance(self, target: int) -> None:
        # one boundary element at a time
        while len(self.front) > target:
            self.rest.add(self.front.pop())
        while len(self.front) < target and self.rest:
            self.front.add(self.rest.pop(0))


class DynamicKCenter:
    """Maintains at most k centers of a dynamic subspace of ``metric``.

    The space handled here is whatever ids are inserted, which may be a subset
    of the metric's live points (the sparsified pipeline feeds it a subspace).
    """

    def __init__(self, metric: MetricSpace, k: int, *, fault: str | None = None):
        self.metric = metric
        self.config = LevelConfig(int(k), metric.d_min, metric.d_max)
        self.k = self.config.k
        self.tau = self.config.tau
        self.space: set[int] = set()
        self.levels = [None] + [
            _Level(metric, self.config.threshold(i)) for i in range(1, self.tau + 1)
        ]
        self._centers: set[int] = set()
        self._level_star = 1
        self._fault = fault

    def __len__(self) -> int:
        return len(self.space)

    def __contains__(self, x) -> bool:
        return x in self.space

    def level_members(self, i: int) -> frozenset[int]:
        if i == 0:
            return frozenset(self.space)
        return self.levels[i].mis.members()

    def level_size(self, i: int) -> int:
        return len(self.space) if i == 0 else self.levels[i].mis.size

    def lambda_(self, i: int) -> float:
        return self.config.threshold(i)

    # -- updates -------------------------------------------------------------

    def insert(self, x: int) -> StepReport:
        if x in self.space:
            raise InvalidState(f"point {x} already in the space")
        self.metric.record(x)
        self.space.add(x)
        return self._cascade(ChangeSet(added={x}))

    def delete(self, x: int) -> StepReport:
        if x not in self.space:
            raise NotFound(x)
        self.space.discard(x)
        return self._cascade(ChangeSet(removed={x}))

    def _cascade(self, base: ChangeSet) -> StepReport:
        reports = [base]
        parent = base
        for i in range(1, self.tau + 1):
            if not parent:
                # nothing below changed, so nothing here or above does either
                reports.extend(ChangeSet() for _ in range(i, self.tau + 1))
                break
            lvl = self.levels[i]
            change = lvl.mis.apply(parent)
            reports.append(change)
            below = self.level_members_view(i - 1)
            for x in parent.added | parent.removed | change.added | change.removed:
                inside = x in below and not lvl.mis.is_member(x)
                lvl.place(x, self.metric.order_key(x) if inside else None)
            if self._fault != "skip-rebalance":
                lvl.rebalance(max(0, min(self.k - lvl.mis.size, lvl.diff_size())))
            parent = change
        new = self._assemble()
        step = ChangeSet.diff(self._centers, new)
        self._centers = new
        return StepReport(step, reports)

    def level_members_view(self, i: int):
        return self.space if i == 0 else self.levels[i].mis._members

    def _assemble(self) -> set[int]:
        i_star = next(i for i in range(1, self.tau + 1) if self.levels[i].mis.size <= self.k)
        self._level_star = i_star
        lvl = self.levels[i_star]
        out = set(lvl.mis._members)
        out.update(key[1] for key in lvl.front)
        return out

    # -- queries -------------------------------------------------------------

    @property
    def level_star(self) -> int:
        return self._level_star

    @property
    def centers(self) -> frozenset[int]:
        return frozenset(self._centers)

    def solution(self) -> Solution:
        return Solution(self.centers, self._level_star, self.cost_certificate())

    def cost_certificate(self) -> float:
        """2 * lambda_{i*}: an upper bound on the cost of the current centers."""
        return 2.0 * self.config.threshold(self._level_star)

    def ordered_points(self) -> list[int]:
        """All points in the order I_tau, I_{tau-1} minus I_tau, ..., I_0 minus I_1."""
        out: list[int] = []
        for i in range(self.tau, 0, -1):
            hi = self.level_members(i) if i == self.tau else set()
            out.extend(sorted(hi, key=self.metric.order_key))
            lvl = self.levels[i]
            out.extend(key[1] for key in lvl.front)
            out.extend(key[1] for key in lvl.rest)
        return out

    def diff_split(self, i: int) -> tuple[list[int], list[int]]:
        lvl = self.levels[i]
        return [k[1] for k in lvl.front], [k[1] for k in lvl.rest]


def replay(metric: MetricSpace, k: int, points: Collection[int]) -> DynamicKCenter:
    """Build a fresh structure by inserting ``points`` in arrival order."""
    kc = DynamicKCenter(metric, k)
    for x in sorted(points, key=metric.order_key):
        kc.insert(x)
    return kc
