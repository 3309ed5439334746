"""Composition of a sparsifier with the nested-MIS k-center algorithm.

In ``direct`` mode the k-center structure sees the whole space.  In
``sparsified`` and ``buffered`` modes it sees only the sparsifier output U, and
every change of U is forwarded to it as an insert or delete (deletions first,
ascending id).  What a caller observes per input update is the net change of
the center set between consecutive reports; in buffered mode the epoch-reset
batch is applied in full before the next report, so intermediate solutions are
never reported.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .buffered import BufferedSparsifier
from .errors import InvalidArgument, NotFound
from .kcenter import DynamicKCenter, Solution
from .metric import ChangeSet, MetricSpace, UpdateEvent, UpdateKind, cl
from .sparsifier import MPSparsifier

MODES = ("direct", "sparsified", "buffered")


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "direct"
    k: int = 1
    epsilon: float | None = None
    n_max: int = 1024
    boost_c: float = 2.0
    seed: int | None = 0
    stop_factor: int = 16

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        if self.k < 1:
            raise InvalidArgument("k must be positive")
        if self.mode == "buffered" and not (self.epsilon and 0 < self.epsilon <= 1):
            raise InvalidArgument("buffered mode needs epsilon in (0, 1]")

    def declared(self) -> dict:
        """Composition parameters: sparsifier ratio alpha_S, size factor beta, inner ratio alpha_A."""
        alpha_a = 8.0
        if self.mode == "direct":
            return {"alpha_S": 1.0, "beta": None, "alpha_A": alpha_a, "ratio": alpha_a}
        beta = math.log2(max(2.0, self.n_max / self.k))
        return {"alpha_S": 4.0, "beta": beta, "alpha_A": alpha_a, "ratio": 4.0 + 2 * alpha_a}


@dataclass
class PipelineStep:
    t: int
    event: UpdateEvent
    changes: ChangeSet
    forwarded: int
    sparsifier_ns: int
    inner_ns: int
    reset: bool = False


@dataclass
class MetricsSnapshot:
    steps: int = 0
    recourse: int = 0
    forwarded: int = 0
    resets: int = 0
    sparsifier_ns: int = 0
    inner_ns: int = 0
    metric_ns: int = 0

    @property
    def amortized_recourse(self) -> float:
        return self.recourse / self.steps if self.steps else 0.0


@dataclass
class PipelineReport:
    solution: Solution
    cost: float
    metrics: MetricsSnapshot = field(default_factory=MetricsSnapshot)


class Pipeline:
    def __init__(self, metric: MetricSpace, config: PipelineConfig, *, fault: str | None = None):
        self.metric = metric
        self.config = config
        self.mode = config.mode
        self.kc = DynamicKCenter(metric, config.k, fault=fault)
        self.sparsifier = None
        if self.mode == "sparsified":
            self.sparsifier = MPSparsifier(metric, config.k, n_max=config.n_max,
                                           boost_c=config.boost_c, seed=config.seed,
                                           stop_factor=config.stop_factor)
        elif self.mode == "buffered":
            self.sparsifier = BufferedSparsifier(metric, config.k, config.epsilon,
                                                 n_max=config.n_max, boost_c=config.boost_c,
                                                 seed=config.seed,
                                                 stop_factor=config.stop_factor)
        self.metrics = MetricsSnapshot()
        self._reported: frozenset[int] = frozenset()

    # -- views ---------------------------------------------------------------

    @property
    def space(self):
        return self.metric.ids()

    @property
    def subspace(self) -> set[int]:
        """The point set the k-center structure currently runs on."""
        return self.kc.space

    @property
    def centers(self) -> frozenset[int]:
        return self._reported

    @property
    def epoch_length(self) -> int | None:
        return self.sparsifier.epoch_length if self.mode == "buffered" else None

    def certificate(self) -> float:
        """Upper bound on the cost of the reported centers against the whole space.

        Direct mode: 2 * lambda_{i*}.  Otherwise the measured cost of U against
        V plus the inner certificate, which bounds cost(S, V) by the triangle
        inequality.
        """
        inner = self.kc.cost_certificate()
        if self.mode == "direct":
            return inner
        return cl(self.metric, self.kc.space, self.metric.ids()) + inner

    def cost(self) -> float:
        return cl(self.metric, self._reported, self.metric.ids())

    # -- updates -------------------------------------------------------------

    def apply(self, event: UpdateEvent) -> PipelineStep:
        spars_ns = inner_ns = 0
        forwarded = 0
        reset = False
        if event.kind is UpdateKind.INSERT:
            t0 = time.perf_counter_ns()
            self.metric.add(event.id, event.position)
            self.metrics.metric_ns += time.perf_counter_ns() - t0
        elif event.id not in self.metric:
            raise NotFound(event.id)

        if self.mode == "direct":
            t0 = time.perf_counter_ns()
            if event.kind is UpdateKind.INSERT:
                self.kc.insert(event.id)
            else:
                self.kc.delete(event.id)
            inner_ns = time.perf_counter_ns() - t0
            forwarded = 1
        else:
            t0 = time.perf_counter_ns()
            if event.kind is UpdateKind.INSERT:
                result = self.sparsifier.insert(event.id)
            else:
                result = self.sparsifier.delete(event.id)
            spars_ns = time.perf_counter_ns() - t0
            if self.mode == "buffered":
                batches = [result.changes.ordered()]
                if result.reset is not None:
                    batches.append(result.reset.internal)
                    reset = True
            else:
                batches = [result.ordered()]
            t0 = time.perf_counter_ns()
            for batch in batches:
                for kind, x in batch:
                    if kind is UpdateKind.INSERT:
                        self.kc.insert(x)
                    else:
                        self.kc.delete(x)
                    forwarded += 1
            inner_ns = time.perf_counter_ns() - t0

        if event.kind is UpdateKind.DELETE:
            t0 = time.perf_counter_ns()
            self.metric.remove(event.id)
            self.metrics.metric_ns += time.perf_counter_ns() - t0

        now = self.kc.centers
        changes = ChangeSet.diff(self._reported, now)
        self._reported = now
        m = self.metrics
        m.steps += 1
        m.recourse += len(changes)
        m.forwarded += forwarded
        m.resets += reset
        m.sparsifier_ns += spars_ns
        m.inner_ns += inner_ns
        return PipelineStep(m.steps, event, changes, forwarded, spars_ns, inner_ns, reset)

    def report(self) -> PipelineReport:
        sol = self.kc.solution()
        sol = Solution(self._reported, sol.level, sol.cost_upper)
        snap = MetricsSnapshot(**vars(self.metrics))
        return PipelineReport(sol, self.cost(), snap)
