"""Buffered sparsifier: a lazily updated copy of an inner sparsifier's output.

The inner sparsifier runs with ceil(q*k) centers, q = 4/epsilon.  Its output
is copied at the start of each epoch and afterwards changes only lazily for
ceil((q-1)*k) updates: inserts are added, and a deleted point of the copy is
replaced by the smallest live member of the cluster it represented.  At the
end of the epoch the copy is reset to the inner output again.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgument, InvalidState, NotFound
from .metric import ChangeSet, MetricSpace, UpdateKind
from .sparsifier import MPSparsifier


@dataclass
class ResetReport:
    old: frozenset
    new: frozenset
    internal: list[tuple[UpdateKind, int]]


@dataclass
class BufferedStep:
    changes: ChangeSet
    reset: ResetReport | None = None


class BufferedSparsifier:
    def __init__(self, metric: MetricSpace, k: int, epsilon: float, *, n_max: int,
                 boost_c: float = 2.0, seed=None, stop_factor: int = 16):
        if not 0 < epsilon <= 1:
            raise InvalidArgument("epsilon must lie in (0, 1]")
        self.metric = metric
        self.k = int(k)
        self.epsilon = float(epsilon)
        self.q = 4.0 / self.epsilon
        self.epoch_length = math.ceil((self.q - 1) * self.k)
        self.inner = MPSparsifier(metric, math.ceil(self.q * self.k), n_max=n_max,
                                  boost_c=boost_c, seed=seed, stop_factor=stop_factor)
        self.updates_in_epoch = 0
        self.epochs = 0
        self._U: set[int] = set()
        self._clusters: dict[int, set[int]] = {}

    def output(self) -> frozenset[int]:
        return frozenset(self._U)

    @property
    def out(self) -> set[int]:
        return self._U

    def insert(self, x: int) -> BufferedStep:
        if x in self.inner:
            raise InvalidState(f"point {x} already present")
        self.inner.insert(x)
        self._U.add(x)
        return self._advance(ChangeSet(added={x}))

    def delete(self, x: int) -> BufferedStep:
        if x not in self.inner:
            raise NotFound(x)
        self.inner.delete(x)
        change = ChangeSet()
        if x in self._U:
            self._U.discard(x)
            change.remove(x)
            members = self._clusters.pop(x, None)
            if members is not None:
                live = [m for m in members if m != x and m in self.inner]
                if live:
                    p = min(live)
                    self._clusters[p] = members
                    self._U.add(p)
                    change.add(p)
        return self._advance(change)

    def _advance(self, change: ChangeSet) -> BufferedStep:
        self.updates_in_epoch += 1
        reset = self.reset_epoch() if self.updates_in_epoch >= self.epoch_length else None
        return BufferedStep(change, reset)

    def reset_epoch(self) -> ResetReport:
        if self.updates_in_epoch < self.epoch_length:
            raise InvalidState("epoch reset requested before the epoch ended")
        old = frozenset(self._U)
        new = frozenset(self.inner.out)
        self._U = set(new)
        self._clusters = {c: m for c, m in self.inner.cluster_refs().items() if c in new}
        self.updates_in_epoch = 0
        self.epochs += 1
        return ResetReport(old, new, ChangeSet.diff(old, new).ordered())
