"""Maximal independent set of a vertex-dynamic threshold graph.

The graph is implicit: vertices are live points, and two vertices are adjacent
when their distance is at most the threshold.  The maintained set is always the
greedy MIS over ascending (priority, id), i.e. the lexicographically-first MIS
for the random order fixed when each point arrived.  Updates repair it by
change propagation in priority order, which touches only vertices whose status
can actually flip.  Against an oblivious update sequence the expected size of
the net change per vertex update is at most 1.
"""
from __future__ import annotations

import heapq
from collections.abc import Iterable

import numpy as np

from .errors import InvalidState, NotFound
from .metric import ChangeSet, MetricSpace


class DynamicMIS:
    def __init__(self, metric: MetricSpace, threshold: float):
        self.metric = metric
        self.threshold = float(threshold)
        self._slot: dict[int, int] = {}
        self._members: set[int] = set()
        self._n = 0
        self._ids = np.empty(16, dtype=np.int64)
        self._prio = np.empty(16, dtype=float)
        self._in = np.zeros(16, dtype=bool)
        self._pos = None

    def __len__(self) -> int:
        return self._n

    def __contains__(self, x) -> bool:
        return x in self._slot

    def vertices(self) -> list[int]:
        return self._ids[: self._n].tolist()

    def members(self) -> frozenset[int]:
        return frozenset(self._members)

    @property
    def size(self) -> int:
        return len(self._members)

    def is_member(self, x: int) -> bool:
        return x in self._members

    # -- storage -------------------------------------------------------------

    def _append(self, x: int) -> int:
        rec = self.metric.record(x)
        pos = np.asarray(rec.position)
        if self._pos is None:
            self._pos = np.empty((len(self._ids),) + pos.shape, dtype=pos.dtype)
        n = self._n
        if n == len(self._ids):
            cap = 2 * n
            self._ids = np.resize(self._ids, cap)
            self._prio = np.resize(self._prio, cap)
            self._in = np.resize(self._in, cap)
            grown = np.empty((cap,) + self._pos.shape[1:], dtype=self._pos.dtype)
            grown[:n] = self._pos[:n]
            self._pos = grown
        self._ids[n] = x
        self._prio[n] = rec.priority
        self._in[n] = False
        self._pos[n] = pos
        self._slot[x] = n
        self._n = n + 1
        return n

    def _drop(self, x: int) -> None:
        s = self._slot.pop(x)
        last = self._n - 1
        if s != last:
            y = int(self._ids[last])
            self._ids[s] = y
            self._prio[s] = self._prio[last]
            self._in[s] = self._in[last]
            self._pos[s] = self._pos[last]
            self._slot[y] = s
        self._n = last

    def _neighbourhood(self, s: int):
        """Adjacency mask of slot ``s`` and mask of vertices ordered before it."""
        n = self._n
        adj = self.metric._within(self._pos[s], self._pos[:n], self.threshold)
        adj[s] = False
        p, x = self._prio[s], self._ids[s]
        pr, ids = self._prio[:n], self._ids[:n]
        earlier = (pr < p) | ((pr == p) & (ids < x))
        return adj, earlier

    # -- updates -------------------------------------------------------------

    def _propagate(self, seeds: Iterable[int], change: ChangeSet) -> None:
        heap = [(self._prio[self._slot[x]], x) for x in seeds]
        heapq.heapify(heap)
        queued = {x for _, x in heap}
        while heap:
            _, x = heapq.heappop(heap)
            queued.discard(x)
            s = self._slot[x]
            adj, earlier = self._neighbourhood(s)
            inn = self._in[: self._n]
            want = not bool(np.any(adj & earlier & inn))
            if want == bool(inn[s]):
                continue
            inn[s] = want
            if want:
                self._members.add(x)
                change.add(x)
                # later neighbours currently in the set must leave
                targets = adj & ~earlier & inn
            else:
                self._members.discard(x)
                change.remove(x)
                targets = adj & ~earlier & ~inn
            for j in np.flatnonzero(targets):
                y = int(self._ids[j])
                if y not in queued:
                    queued.add(y)
                    heapq.heappush(heap, (self._prio[j], y))

    def insert_vertex(self, x: int) -> ChangeSet:
        if x in self._slot:
            raise InvalidState(f"vertex {x} already present")
        self._append(x)
        change = ChangeSet()
        self._propagate([x], change)
        return change

    def delete_vertex(self, x: int) -> ChangeSet:
        s = self._slot.get(x)
        if s is None:
            raise NotFound(x)
        change = ChangeSet()
        if not self._in[s]:
            self._drop(x)
            return change
        adj, earlier = self._neighbourhood(s)
        later = self._ids[: self._n][adj & ~earlier].tolist()
        self._drop(x)
        self._members.discard(x)
        change.remove(x)
        self._propagate(later, change)
        return change

    def apply(self, parent_change: ChangeSet) -> ChangeSet:
        """Process a parent-set delta: deletions first, then insertions, each by priority."""
        change = ChangeSet()
        for x in sorted(parent_change.removed, key=self._del_key):
            change.extend(self.delete_vertex(x))
        for x in sorted(parent_change.added, key=lambda v: (self.metric.priority(v), v)):
            change.extend(self.insert_vertex(x))
        return change

    def _del_key(self, x: int):
        s = self._slot.get(x)
        if s is None:
            raise NotFound(x)
        return (self._prio[s], x)
