"""Command-line front end: seed selection, spread evaluation, benchmarks.

Single runs print one JSON object; benchmark sweeps print CSV. With a fixed
--seed and --threads 1 the seed list is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .baseline import GreedyConfig, greedy_select
from .evaluator import simulate_spread
from .graph import Graph, GraphError, load_edge_list
from .models import (IC, LT, WC, ModelError, ModelSpec,
                     assign_lt_uniform, assign_weighted_cascade)
from .tim import SeedResult, TimError, TimParams, run_tim


class CliError(Exception):
    pass


@dataclass
class RunRecord:
    command: str
    dataset: str
    model: str
    params: dict
    seeds: list
    estimated_spread: float
    mc_spread: float | None = None
    mc_std_error: float | None = None
    timings: dict = field(default_factory=dict)
    rr_sets_generated: int = 0
    theta: int | None = None
    kpt_star: float | None = None
    kpt_plus: float | None = None
    peak_rss_bytes: int | None = None
    master_seed: int | None = None
    threads: int = 1
    tool_version: str = __version__


def _peak_rss_bytes() -> int | None:
    try:
        import resource
        rss_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        return int(rss_kb) * 1024
    except Exception:
        return None


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _load_graph(path: str, undirected: bool) -> Graph:
    try:
        with open(path) as fh:
            return load_edge_list(fh, directed=not undirected)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _prepare_model(graph: Graph, model_name: str,
                   rng: np.random.Generator) -> tuple[Graph, ModelSpec]:
    if model_name == "ic":
        if graph.edge_prob is None:
            raise CliError("model 'ic' requires a probability column in the input file")
        return graph, IC
    if model_name == "wc":
        if graph.edge_prob is not None:
            raise CliError("model 'wc' forbids a probability column in the input file")
        return assign_weighted_cascade(graph), WC
    if model_name == "lt":
        if graph.edge_prob is not None:
            raise CliError("model 'lt' forbids a probability column in the input file")
        return assign_lt_uniform(graph, rng), LT
    raise CliError(f"unknown model {model_name!r}")


def _default_threads() -> int:
    env = os.environ.get("INFLUMAX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--model", required=True, choices=["ic", "wc", "lt"])
    p.add_argument("--undirected", action="store_true",
                   help="treat each input line as two directed edges")
    p.add_argument("--seed", type=int, default=None, help="master RNG seed")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (INFLUMAX_THREADS env fallback; "
                        "execution is currently sequential regardless)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="influmax")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="choose a seed set")
    _add_common_flags(p_sel)
    p_sel.add_argument("--k", type=int, required=True)
    p_sel.add_argument("--epsilon", type=float, required=True)
    p_sel.add_argument("--ell", type=float, default=1.0)
    p_sel.add_argument("--algorithm", required=True,
                       choices=["tim", "tim+", "greedy"])
    p_sel.add_argument("--epsilon-prime", type=float, default=None)
    p_sel.add_argument("--r", type=int, default=10000,
                       help="Monte-Carlo trials per greedy estimate")
    p_sel.add_argument("--lazy", action="store_true",
                       help="CELF-style lazy greedy")

    p_eval = sub.add_parser("evaluate", help="estimate the spread of a seed set")
    _add_common_flags(p_eval)
    p_eval.add_argument("--seeds", required=True,
                        help="comma-separated node ids")
    p_eval.add_argument("--trials", type=int, default=10000)

    p_bench = sub.add_parser("benchmark", help="sweep algorithms, emit CSV")
    _add_common_flags(p_bench)
    p_bench.add_argument("--k-list", required=True)
    p_bench.add_argument("--epsilon-list", required=True)
    p_bench.add_argument("--algorithms", default="tim,tim+")
    p_bench.add_argument("--ell", type=float, default=1.0)
    p_bench.add_argument("--r", type=int, default=10000)
    p_bench.add_argument("--repeats", type=int, default=3)
    return parser


def _master_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(np.random.SeedSequence().entropy % (1 << 63))


def _run_selection(graph: Graph, model: ModelSpec, algorithm: str, k: int,
                   epsilon: float, ell: float, epsilon_prime: float | None,
                   r: int, lazy: bool, seed: int) -> SeedResult:
    if algorithm == "greedy":
        return greedy_select(graph, model, k,
                             GreedyConfig(r=r, lazy=lazy, master_seed=seed))
    params = TimParams(k=k, epsilon=epsilon, ell=ell, variant=algorithm,
                       epsilon_prime=epsilon_prime, master_seed=seed)
    return run_tim(graph, model, params)


def cmd_select(args) -> int:
    seed = _master_seed(args)
    rng = np.random.default_rng(seed)
    graph = _load_graph(args.graph, args.undirected)
    graph, model = _prepare_model(graph, args.model, rng)
    result = _run_selection(graph, model, args.algorithm, args.k,
                            args.epsilon, args.ell, args.epsilon_prime,
                            args.r, args.lazy, seed)
    trace = result.trace
    record = RunRecord(
        command="select",
        dataset=args.graph,
        model=args.model,
        params={"k": args.k, "epsilon": args.epsilon, "ell": args.ell,
                "algorithm": args.algorithm, "epsilon_prime": args.epsilon_prime,
                "r": args.r if args.algorithm == "greedy" else None},
        seeds=list(result.seeds),
        estimated_spread=result.estimated_spread,
        timings=result.timings,
        rr_sets_generated=result.rr_sets_generated,
        theta=trace.theta if trace else None,
        kpt_star=trace.kpt_star if trace else None,
        kpt_plus=trace.kpt_plus if trace else None,
        peak_rss_bytes=_peak_rss_bytes(),
        master_seed=seed,
        threads=args.threads or _default_threads(),
    )
    print(json.dumps(asdict(record), default=_json_default))
    return 0


def cmd_evaluate(args) -> int:
    seed = _master_seed(args)
    rng = np.random.default_rng(seed)
    graph = _load_graph(args.graph, args.undirected)
    graph, model = _prepare_model(graph, args.model, rng)
    tokens = [t for t in args.seeds.split(",") if t]
    if not tokens:
        raise CliError("at least one seed id is required")
    try:
        seeds = [graph.index_of(t) for t in tokens]
    except GraphError as exc:
        raise CliError(str(exc)) from exc
    if args.trials < 1:
        raise CliError("--trials must be >= 1")
    est = simulate_spread(graph, model, seeds, args.trials, rng)
    record = RunRecord(
        command="evaluate",
        dataset=args.graph,
        model=args.model,
        params={"trials": args.trials},
        seeds=tokens,
        estimated_spread=est.mean,
        mc_spread=est.mean,
        mc_std_error=est.std_error,
        peak_rss_bytes=_peak_rss_bytes(),
        master_seed=seed,
        threads=args.threads or _default_threads(),
    )
    print(json.dumps(asdict(record), default=_json_default))
    return 0


def cmd_benchmark(args) -> int:
    seed = _master_seed(args)
    base_graph = _load_graph(args.graph, args.undirected)
    k_list = [int(x) for x in args.k_list.split(",") if x]
    eps_list = [float(x) for x in args.epsilon_list.split(",") if x]
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for a in algorithms:
        if a not in ("tim", "tim+", "greedy"):
            raise CliError(f"unknown algorithm {a!r}")
    if args.repeats < 1:
        raise CliError("--repeats must be >= 1")

    writer = csv.writer(sys.stdout)
    writer.writerow(["algorithm", "k", "epsilon", "run", "seconds",
                     "spread_estimate", "theta", "kpt_star", "kpt_plus"])
    for algorithm in algorithms:
        for k in k_list:
            for epsilon in eps_list:
                secs, spreads, thetas, stars, pluses = [], [], [], [], []
                for run in range(1, args.repeats + 1):
                    run_seed = seed + run
                    rng = np.random.default_rng(run_seed)
                    graph, model = _prepare_model(base_graph, args.model, rng)
                    t0 = time.perf_counter()
                    result = _run_selection(graph, model, algorithm, k,
                                            epsilon, args.ell, None,
                                            args.r, True, run_seed)
                    elapsed = time.perf_counter() - t0
                    trace = result.trace
                    secs.append(elapsed)
                    spreads.append(result.estimated_spread)
                    thetas.append(trace.theta if trace else None)
                    stars.append(trace.kpt_star if trace else None)
                    pluses.append(trace.kpt_plus if trace else None)
                    writer.writerow([
                        algorithm, k, epsilon, run, f"{elapsed:.6f}",
                        f"{result.estimated_spread:.6f}",
                        thetas[-1] if thetas[-1] is not None else "",
                        stars[-1] if stars[-1] is not None else "",
                        pluses[-1] if pluses[-1] is not None else "",
                    ])

                def _avg(values):
                    vals = [v for v in values if v is not None]
                    return f"{sum(vals) / len(vals):.6f}" if vals else ""

                writer.writerow([algorithm, k, epsilon, "avg", _avg(secs),
                                 _avg(spreads), _avg(thetas), _avg(stars),
                                 _avg(pluses)])
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "select": cmd_select,
        "evaluate": cmd_evaluate,
        "benchmark": cmd_benchmark,
    }
    try:
        return handlers[args.command](args)
    except (CliError, GraphError, ModelError, TimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
