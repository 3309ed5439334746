"""Update streams: synthetic generators and the line-oriented stream file format.

File format, one record per line::

    # key=value ...            header comment (bounds, generator, seed)
    M <n>                      optional: explicit metric, followed by n rows
    I <id> <c1> ... <cD>       insert (coordinates omitted in matrix mode)
    D <id>                     delete

Generated coordinates are snapped to the integer grid of the box [0, L]^D, so
every non-zero distance is at least 1 and at most L*sqrt(D); duplicates are
allowed and simply coincide.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .metric import UpdateEvent, UpdateKind

GENERATORS = ("uniform-box", "gaussian-blobs", "sliding-window", "adversarial-duplicates")


@dataclass
class Stream:
    events: list[UpdateEvent]
    d_min: float
    d_max: float
    dim: int | None = None
    matrix: np.ndarray | None = None
    header: dict[str, str] = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        live = peak = 0
        for ev in self.events:
            live += 1 if ev.kind is UpdateKind.INSERT else -1
            peak = max(peak, live)
        return peak


@dataclass(frozen=True)
class StreamSpec:
    generator: str = "uniform-box"
    param: int | None = None  # blob count, window width, or number of sites
    n_max: int = 1000
    T: int = 2000
    dim: int = 2
    box: int = 10_000
    insert_prob: float = 0.5
    seed: int = 0

    @classmethod
    def parse(cls, text: str, **kw) -> StreamSpec:
        """Parse ``name`` or ``name:param`` as used on the command line."""
        name, _, arg = text.partition(":")
        if name not in GENERATORS:
            raise InvalidArgument(f"unknown generator {name!r}; choose from {GENERATORS}")
        param = int(arg) if arg else None
        return cls(generator=name, param=param, **kw)

    def __post_init__(self):
        if self.n_max < 1 or self.T < 0 or self.dim < 1 or self.box < 1:
            raise InvalidArgument("n_max, dim and box must be positive and T non-negative")
        if not 0 < self.insert_prob <= 1:
            raise InvalidArgument("insert_prob must lie in (0, 1]")
        if self.generator == "sliding-window" and self.param is not None and self.param < 1:
            raise InvalidArgument("window width must be positive")

    @property
    def d_min(self) -> float:
        return 1.0

    @property
    def d_max(self) -> float:
        return self.box * math.sqrt(self.dim)


def _sampler(spec: StreamSpec, rng: np.random.Generator):
    L, D = spec.box, spec.dim
    if spec.generator == "gaussian-blobs":
        c = spec.param or 5
        centers = rng.uniform(0.1 * L, 0.9 * L, size=(c, D))
        sigma = 0.02 * L

        def draw():
            p = rng.normal(centers[rng.integers(c)], sigma)
            return np.clip(np.rint(p), 0, L)
    elif spec.generator == "adversarial-duplicates":
        sites = rng.integers(0, L + 1, size=(spec.param or max(2, spec.n_max // 8), D))

        def draw():
            return sites[rng.integers(len(sites))].astype(float)
    else:
        def draw():
            return rng.integers(0, L + 1, size=D).astype(float)
    return draw


def generate(spec: StreamSpec) -> Stream:
    """Deterministic stream for ``spec``; its randomness is independent of any algorithm seed."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0x57E4]))
    draw = _sampler(spec, rng)
    events: list[UpdateEvent] = []
    next_id = 0
    if spec.generator == "sliding-window":
        w = spec.param or spec.n_max
        window: deque[int] = deque()
        while len(events) < spec.T:
            events.append(UpdateEvent.insert(next_id, draw()))
            window.append(next_id)
            next_id += 1
            if len(window) > w and len(events) < spec.T:
                events.append(UpdateEvent.delete(window.popleft()))
    else:
        live: list[int] = []
        while len(events) < spec.T:
            warm = len(events) < spec.n_max
            insert = not live or (len(live) < spec.n_max
                                  and (warm or rng.random() < spec.insert_prob))
            if insert:
                events.append(UpdateEvent.insert(next_id, draw()))
                live.append(next_id)
                next_id += 1
            else:
                j = int(rng.integers(len(live)))
                live[j], live[-1] = live[-1], live[j]
                events.append(UpdateEvent.delete(live.pop()))
    header = {"gen": spec.generator + (f":{spec.param}" if spec.param else ""),
              "n": str(spec.n_max), "T": str(spec.T), "dim": str(spec.dim),
              "box": str(spec.box), "seed": str(spec.seed),
              "dmin": repr(spec.d_min), "dmax": repr(spec.d_max)}
    return Stream(events, spec.d_min, spec.d_max, spec.dim, None, header)


def _fmt(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(float(c))


def format_stream(stream: Stream) -> str:
    lines = ["# " + " ".join(f"{k}={v}" for k, v in stream.header.items())]
    if stream.matrix is not None:
        lines.append(f"M {len(stream.matrix)}")
        lines.extend(" ".join(_fmt(v) for v in row) for row in stream.matrix)
    for ev in stream.events:
        if ev.kind is UpdateKind.DELETE:
            lines.append(f"D {ev.id}")
        elif ev.position is None:
            lines.append(f"I {ev.id}")
        else:
            lines.append(f"I {ev.id} " + " ".join(_fmt(c) for c in ev.position))
    return "\n".join(lines) + "\n"


def write_stream(stream: Stream, path: str | Path) -> None:
    Path(path).write_text(format_stream(stream), encoding="utf-8")


def read_stream(path: str | Path, d_min: float | None = None, d_max: float | None = None) -> Stream:
    header: dict[str, str] = {}
    events: list[UpdateEvent] = []
    matrix = None
    dim = None
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    it = iter(enumerate(lines, 1))
    for lineno, raw in it:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                key, eq, val = tok.partition("=")
                if eq:
                    header[key] = val
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "M":
                n = int(parts[1])
                rows = []
                for _ in range(n):
                    _, row = next(it)
                    rows.append([float(v) for v in row.split()])
                matrix = np.array(rows, dtype=float)
                if matrix.shape != (n, n):
                    raise InvalidArgument(f"line {lineno}: matrix is not {n}x{n}")
            elif tag == "I":
                coords = [float(v) for v in parts[2:]]
                if matrix is None:
                    if dim is None:
                        dim = len(coords)
                    elif len(coords) != dim:
                        raise InvalidArgument(f"line {lineno}: expected {dim} coordinates")
                    events.append(UpdateEvent.insert(int(parts[1]), coords))
                else:
                    events.append(UpdateEvent.insert(int(parts[1])))
            elif tag == "D" and len(parts) == 2:
                events.append(UpdateEvent.delete(int(parts[1])))
            else:
                raise InvalidArgument(f"line {lineno}: cannot parse {raw!r}")
        except (ValueError, IndexError, StopIteration) as e:
            if isinstance(e, InvalidArgument):
                raise
            raise InvalidArgument(f"line {lineno}: cannot parse {raw!r}") from e
    if d_min is None:
        d_min = float(header["dmin"]) if "dmin" in header else None
    if d_max is None:
        d_max = float(header["dmax"]) if "dmax" in header else None
    if matrix is not None and (d_min is None or d_max is None):
        off = matrix[~np.eye(len(matrix), dtype=bool)]
        nz = off[off > 0]
        d_min = d_min if d_min is not None else (float(nz.min()) if nz.size else 1.0)
        d_max = d_max if d_max is not None else (float(nz.max()) if nz.size else d_min)
    if d_min is None or d_max is None:
        raise InvalidArgument("stream has no dmin/dmax header; pass --dmin/--dmax")
    validate_events(events)
    return Stream(events, d_min, d_max, dim, matrix, header)


def validate_events(events: list[UpdateEvent]) -> None:
    """Inserts only for fresh ids, deletes only for live ids."""
    live: set[int] = set()
    seen: set[int] = set()
    for t, ev in enumerate(events, 1):
        if ev.kind is UpdateKind.INSERT:
            if ev.id in seen:
                raise InvalidArgument(f"event {t}: id {ev.id} inserted twice")
            seen.add(ev.id)
            live.add(ev.id)
        else:
            if ev.id not in live:
                raise InvalidArgument(f"event {t}: delete of non-live id {ev.id}")
            live.discard(ev.id)
