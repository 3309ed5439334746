"""Command-line front end: ``dynkc gen | run | verify``.

Exit codes: 0 success, 1 invariant failure, 2 configuration error.

``run`` writes one CSV row per update with these columns::

    t, op, id, n_live, u_size, cost_alg, certificate, cost_gonzalez, cost_opt,
    ratio, step_recourse, cum_recourse, sparsifier_us, inner_us

and an aggregate JSON next to it (``<out>.json``).  ``cost_opt`` and ``ratio``
are filled only with ``--verify`` and while ``n_live <= --budget-n``.  The
timing columns are wall-clock measurements; every other column is a function
of (stream, algorithm seed, configuration) alone.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import statistics
import sys
from pathlib import Path

import numpy as np

from . import checks, oracles
from .errors import BoundsViolation, BudgetExceeded, InvalidArgument, InvalidState, NotFound
from .metric import MetricSpace, UpdateEvent, UpdateKind, cl
from .pipeline import MODES, Pipeline, PipelineConfig
from .streams import (GENERATORS, Stream, StreamSpec, format_stream, generate, read_stream,
                      write_stream)

COLUMNS = ("t", "op", "id", "n_live", "u_size", "cost_alg", "certificate", "cost_gonzalez",
           "cost_opt", "ratio", "step_recourse", "cum_recourse", "sparsifier_us", "inner_us")
RATIO_BOUND = {"direct": 8.0, "sparsified": 20.0, "buffered": 20.0}
MAX_BUDGET_N = 16


class ConfigError(Exception):
    pass


# -- argument handling --------------------------------------------------------


def _stream_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--stream", metavar="FILE", help="replay a stream file")
    src.add_argument("--gen", metavar="SPEC",
                     help=f"generate a stream: one of {', '.join(GENERATORS)}, optionally NAME:PARAM")
    p.add_argument("--n", type=int, default=1000, help="maximum number of live points")
    p.add_argument("--T", type=int, default=2000, help="number of updates")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--box", type=int, default=10_000, help="coordinates lie on the grid [0, box]^dim")
    p.add_argument("--insert-prob", type=float, default=0.5)
    p.add_argument("--stream-seed", type=int, default=None,
                   help="seed of the stream generator (defaults to --seed)")
    p.add_argument("--dmin", type=float, default=None)
    p.add_argument("--dmax", type=float, default=None)


def _algo_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default="direct")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--seed", type=int, default=0, help="algorithm seed")
    p.add_argument("--boost-c", type=float, default=2.0)
    p.add_argument("--stop-factor", type=int, default=16,
                   help="sparsifier layers stop once at most stop_factor*k points remain")
    p.add_argument("--budget-n", type=int, default=12,
                   help="largest live set on which exact OPT is computed")
    p.add_argument("--no-check-bounds", action="store_true",
                   help="skip the per-insert d_min/d_max scan")
    p.add_argument("--inject-fault", choices=("skip-rebalance",), default=None,
                   help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynkc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a deterministic stream file")
    _stream_args(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", metavar="FILE", help="output path (stdout if omitted)")

    r = sub.add_parser("run", help="drive a pipeline over a stream and record metrics")
    _stream_args(r)
    _algo_args(r)
    r.add_argument("--verify", action="store_true", help="run the invariant checks after every update")
    r.add_argument("--out", metavar="FILE", help="per-update CSV (stdout if omitted)")
    r.add_argument("--json", metavar="FILE", help="aggregate JSON (default: <out>.json)")
    r.add_argument("--cost-every", type=int, default=1,
                   help="compute cost columns every N updates (0: never)")
    r.add_argument("--no-timing", action="store_true", help="write 0 in the timing columns")

    v = sub.add_parser("verify", help="run the invariant suite")
    _stream_args(v)
    _algo_args(v)
    v.add_argument("--trials", type=int, default=12, help="random instances per mode")
    v.add_argument("--steps", type=int, default=30, help="updates per random instance")
    return parser


def _check_budget(args) -> oracles.OracleBudget:
    if args.budget_n < 1:
        raise ConfigError("--budget-n must be positive")
    if args.budget_n > MAX_BUDGET_N:
        raise BudgetExceeded(f"--budget-n {args.budget_n} exceeds the exact-OPT cap {MAX_BUDGET_N}")
    return oracles.OracleBudget(max_opt_n=args.budget_n)


def load_stream(args) -> Stream:
    if args.stream:
        path = Path(args.stream)
        if not path.is_file():
            raise ConfigError(f"no such stream file: {path}")
        return read_stream(path, args.dmin, args.dmax)
    stream_seed = args.seed if args.stream_seed is None else args.stream_seed
    spec = StreamSpec.parse(args.gen or "uniform-box", n_max=args.n, T=args.T, dim=args.dim,
                            box=args.box, insert_prob=args.insert_prob, seed=stream_seed)
    stream = generate(spec)
    if args.dmin is not None or args.dmax is not None:
        stream.d_min = args.dmin if args.dmin is not None else stream.d_min
        stream.d_max = args.dmax if args.dmax is not None else stream.d_max
    return stream


def seeds(seed: int) -> tuple[int, int]:
    """Independent (priority seed, sparsifier seed) pair for one algorithm seed."""
    a, b = np.random.SeedSequence(seed).generate_state(2)
    return int(a), int(b)


def build_pipeline(args, stream: Stream) -> Pipeline:
    prio_seed, spars_seed = seeds(args.seed)
    if stream.matrix is not None:
        metric = MetricSpace.from_matrix(stream.matrix, stream.d_min, stream.d_max,
                                         seed=prio_seed, check_bounds=not args.no_check_bounds)
    else:
        metric = MetricSpace(stream.d_min, stream.d_max, dim=stream.dim or args.dim,
                             seed=prio_seed, check_bounds=not args.no_check_bounds)
    n_max = max(stream.n_max, 2)
    config = PipelineConfig(mode=args.mode, k=args.k, epsilon=args.epsilon, n_max=n_max,
                            boost_c=args.boost_c, seed=spars_seed, stop_factor=args.stop_factor)
    return Pipeline(metric, config, fault=args.inject_fault)


# -- per-step checks ----------------------------------------------------------


def step_failures(pipe: Pipeline, budget: oracles.OracleBudget) -> tuple[list[str], float | None]:
    """Every invariant that applies to the current state, plus OPT when affordable."""
    live = list(pipe.metric.ids())
    opt = None
    if live and len(live) <= budget.max_opt_n and pipe.config.k <= budget.max_opt_k:
        opt, _ = oracles.opt_k_exact(pipe.metric, live, pipe.config.k, budget)
    inner_opt = None
    if pipe.mode == "direct":
        inner_opt = opt
    elif 0 < len(pipe.subspace) <= budget.max_opt_n and pipe.config.k <= budget.max_opt_k:
        inner_opt, _ = oracles.opt_k_exact(pipe.metric, pipe.subspace, pipe.config.k, budget)
    out = checks.check_kcenter(pipe.kc, opt=inner_opt)
    if pipe.sparsifier is not None:
        inner = pipe.sparsifier if pipe.mode == "sparsified" else pipe.sparsifier.inner
        out += checks.check_sparsifier(inner)
        if set(pipe.subspace) != set(pipe.sparsifier.out):
            out.append("k-center subspace differs from the sparsifier output")
        out += checks.check_composition(pipe.metric, pipe.centers, pipe.subspace, live)
    if live:
        cost, cert = pipe.cost(), pipe.certificate()
        if cost > cert + 1e-9:
            out.append(f"cost {cost} above certificate {cert}")
        if opt is not None and len(live) > pipe.config.k:
            bound = RATIO_BOUND[pipe.mode]
            if cost > bound * opt + 1e-9:
                out.append(f"ratio {cost / opt if opt else math.inf:.3f} above {bound:g}")
    return out, opt


# -- subcommands --------------------------------------------------------------


def cmd_gen(args) -> int:
    stream = load_stream(args)
    if args.out:
        write_stream(stream, args.out)
    else:
        sys.stdout.write(format_stream(stream))
    return 0


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 9))
    return str(v)


def cmd_run(args) -> int:
    budget = _check_budget(args)
    if args.cost_every < 0:
        raise ConfigError("--cost-every must be non-negative")
    stream = load_stream(args)
    pipe = build_pipeline(args, stream)
    out_path = Path(args.out) if args.out else None
    fh = out_path.open("w", newline="", encoding="utf-8") if out_path else sys.stdout
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)

    failures: list[str] = []
    ratios, gratios, step_us, u_sizes = [], [], [], []
    cum = 0
    try:
        for t, ev in enumerate(stream.events, 1):
            step = pipe.apply(ev)
            cum += len(step.changes)
            live = pipe.metric.ids()
            n_live = len(live)
            row = {"t": t, "op": ev.kind.value, "id": ev.id, "n_live": n_live,
                   "u_size": len(pipe.subspace), "step_recourse": len(step.changes),
                   "cum_recourse": cum}
            u_sizes.append(len(pipe.subspace))
            if args.no_timing:
                row["sparsifier_us"] = row["inner_us"] = 0
            else:
                row["sparsifier_us"] = step.sparsifier_ns // 1000
                row["inner_us"] = step.inner_ns // 1000
            step_us.append((step.sparsifier_ns + step.inner_ns) / 1000)
            costs_due = n_live and args.cost_every and t % args.cost_every == 0
            if costs_due or args.verify:
                cost, cert = pipe.cost() if n_live else 0.0, pipe.certificate() if n_live else 0.0
                row["cost_alg"], row["certificate"] = cost, cert
                if cost > cert + 1e-9:
                    failures.append(f"t={t}: cost {cost} above certificate {cert}")
                if n_live:
                    g = oracles.gonzalez(pipe.metric, live, args.k, min(live))
                    gcost = cl(pipe.metric, g, live)
                    row["cost_gonzalez"] = gcost
                    if gcost > 0:
                        gratios.append(cost / gcost)
            if args.verify:
                fails, opt = step_failures(pipe, budget)
                failures.extend(f"t={t}: {f}" for f in fails)
                if opt is not None:
                    row["cost_opt"] = opt
                    if n_live > args.k:
                        row["ratio"] = row["cost_alg"] / opt if opt > 0 else (
                            1.0 if row["cost_alg"] == 0 else math.inf)
                        ratios.append(row["ratio"])
            writer.writerow([_fmt(row.get(c)) for c in COLUMNS])
    finally:
        if out_path:
            fh.close()

    m = pipe.metrics
    cfg = pipe.config
    forwarded = max(m.forwarded, 1)
    agg = {
        "mode": cfg.mode, "k": cfg.k, "epsilon": cfg.epsilon, "seed": args.seed,
        "steps": m.steps,
        "amortized_recourse": m.amortized_recourse,
        "mean_update_us": statistics.fmean(step_us) if step_us else 0.0,
        "median_update_us": statistics.median(step_us) if step_us else 0.0,
        "max_ratio_opt": max(ratios, default=None),
        "max_ratio_gonzalez": max(gratios, default=None),
        "max_u_size": max(u_sizes, default=0),
        "epoch_length": pipe.epoch_length,
        "resets": m.resets,
        "declared": cfg.declared(),
        "measured": {
            "R_S": m.forwarded / m.steps if m.steps else 0.0,
            "R_A": m.recourse / forwarded,
            "T_S_us": m.sparsifier_ns / 1000 / m.steps if m.steps else 0.0,
            "T_A_us": m.inner_ns / 1000 / forwarded,
        },
        "failures": failures[:100],
        "failure_count": len(failures),
    }
    if args.no_timing:
        for key in ("mean_update_us", "median_update_us"):
            agg[key] = 0.0
        agg["measured"]["T_S_us"] = agg["measured"]["T_A_us"] = 0.0
    json_path = args.json or (str(out_path) + ".json" if out_path else None)
    text = json.dumps(agg, indent=2, sort_keys=True)
    if json_path:
        Path(json_path).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stderr.write(text + "\n")
    for f in failures[:20]:
        sys.stderr.write(f"FAIL {f}\n")
    return 1 if failures else 0


def _random_instance(rng: np.random.Generator, n: int, steps: int, matrix: bool) -> Stream:
    """Small stream on a grid line/plane, or on a random graph metric."""
    if matrix:
        size = n + steps
        w = rng.integers(1, 10, size=(size, size)).astype(float)
        w = np.minimum(w, w.T)
        np.fill_diagonal(w, 0)
        # shortest paths make any positive weights a metric
        for m in range(size):
            w = np.minimum(w, w[:, m, None] + w[None, m, :])
        positions = [None] * size
        d = w
    else:
        dim = int(rng.integers(1, 3))
        positions = [rng.integers(0, 41, size=dim).astype(float) for _ in range(n + steps)]
        d = None
    events: list[UpdateEvent] = []
    live: list[int] = []
    nxt = 0
    while len(events) < steps:
        if len(live) < 2 or (len(live) < n and rng.random() < 0.55):
            events.append(UpdateEvent.insert(nxt, positions[nxt]))
            live.append(nxt)
            nxt += 1
        else:
            x = live.pop(int(rng.integers(len(live))))
            events.append(UpdateEvent.delete(x))
    if matrix:
        off = d[~np.eye(len(d), dtype=bool)]
        return Stream(events, float(off.min()), float(off.max()), None, d)
    dim = len(positions[0])
    return Stream(events, 1.0, 40 * math.sqrt(dim), dim, None)


def _drive(args, stream: Stream, budget) -> list[str]:
    pipe = build_pipeline(args, stream)
    out = []
    for t, ev in enumerate(stream.events, 1):
        pipe.apply(ev)
        out.extend(f"t={t}: {f}" for f in step_failures(pipe, budget)[0])
    return out


def cmd_verify(args) -> int:
    budget = _check_budget(args)
    failures: list[str] = []
    if args.stream or args.gen:
        stream = load_stream(args)
        failures += [f"[stream] {f}" for f in _drive(args, stream, budget)]
    else:
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0x7E51]))
        modes = [args.mode] if args.inject_fault else list(MODES)
        for mode in modes:
            for trial in range(args.trials):
                n = int(rng.integers(4, budget.max_opt_n + 1))
                stream = _random_instance(rng, n, args.steps, matrix=trial % 3 == 2)
                sub = argparse.Namespace(**vars(args))
                sub.mode = mode
                sub.k = int(rng.integers(1, min(args.k, 3) + 1))
                sub.epsilon = args.epsilon or 0.5
                sub.stop_factor = int(rng.choice([1, 2, 16]))
                sub.seed = args.seed * 1000 + trial
                fails = _drive(sub, stream, budget)
                failures += [f"[{mode} trial {trial}] {f}" for f in fails]
        for trial in range(args.trials):
            n = int(rng.integers(4, budget.max_opt_n + 1))
            stream = _random_instance(rng, n, n, matrix=trial % 2 == 1)
            metric = (MetricSpace.from_matrix(stream.matrix, seed=trial) if stream.matrix is not None
                      else MetricSpace(stream.d_min, stream.d_max, dim=stream.dim, seed=trial))
            for ev in stream.events:
                if ev.kind is UpdateKind.INSERT:
                    metric.add(ev.id, ev.position)
            V = sorted(metric.ids())
            k = int(rng.integers(1, 4))
            fails = checks.check_static_lemmas(metric, V, k, rng, budget)
            S = V[: k]
            U = [x for x in V if rng.random() < 0.5] + S
            fails += checks.check_composition(metric, S, set(U), V)
            failures += [f"[lemmas trial {trial}] {f}" for f in fails]
    for f in failures[:50]:
        print(f"FAIL {f}")
    print("verify: " + ("FAIL" if failures else "PASS") + f" ({len(failures)} failures)")
    return 1 if failures else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_verify(args)
    except (ConfigError, InvalidArgument, BudgetExceeded, BoundsViolation, OSError) as e:
        sys.stderr.write(f"dynkc: error: {e}\n")
        return 2
    except (InvalidState, NotFound) as e:
        sys.stderr.write(f"dynkc: error: stream is inconsistent: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
