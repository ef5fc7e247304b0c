"""Command-line harness: ``pursuit generate|decompose|eval|bench``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import gamblers as gm
from .corpus import (
    COLUMNS,
    IncompatibleConfig,
    Instance,
    Row,
    evaluate_instance,
    suite_instances,
    worst_ratios,
)
from .gamblers import GamblerModel
from .graph import GRAPH_KINDS, Graph, GraphError, diameter, generate, read_edge_list, to_dot, write_edge_list
from .sectors import decompose
from .strategies import STRATEGIES, part_length


@dataclass
class ExperimentConfig:
    graph: Graph
    graph_kind: str
    k: int
    strategy: str
    gamblers: list[GamblerModel]
    trials: int
    seed: int
    fmt: str = "csv"


def _default_seed() -> int:
    return int(os.environ.get("PURSUIT_SEED", "0"))


def _add_graph_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--kind", choices=GRAPH_KINDS, required=required)
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--p", type=float, default=None, help="edge probability for connected_gnp")
    p.add_argument("--rows", type=int, default=None, help="grid rows")
    p.add_argument("--seed", type=int, default=None, help="defaults to $PURSUIT_SEED or 0")


def _graph_from_args(args) -> tuple[Graph, str]:
    if getattr(args, "graph", None):
        return read_edge_list(args.graph), "file"
    if args.kind is None or args.n is None:
        raise IncompatibleConfig("give either --graph FILE or --kind and --n")
    return generate(args.kind, args.n, seed=args.seed, p=args.p, rows=args.rows), args.kind


def _corpus_gamblers(g: Graph, k: int, strategy: str, seed: int) -> list[GamblerModel]:
    models = gm.adversarial_suite(g, k, seed)
    if strategy == "changing_two_part" and g.n > k:
        models += gm.changing_suite(g, k, 2 * part_length(g.n, k), seed)
    elif strategy == "diameter_chase":
        models += gm.changing_suite(g, k, max(1, diameter(g)), seed)
    return models


def _select_gamblers(args, g: Graph) -> list[GamblerModel]:
    if args.gambler_json:
        with open(args.gambler_json) as fh:
            return [gm.from_json(fh.read())]
    models = _corpus_gamblers(g, args.k, args.strategy, args.seed)
    if args.gambler == "all":
        return models
    chosen = [m for m in models if m.name == args.gambler]
    if not chosen:
        names = ", ".join(["all"] + [m.name for m in models])
        raise IncompatibleConfig(f"unknown gambler {args.gambler!r}; available: {names}")
    return chosen


def write_rows(rows: list[Row], fmt: str, out: io.TextIOBase, header: str | None = None) -> None:
    if fmt == "json":
        json.dump([r.to_dict() for r in rows], out, indent=2, default=float)
        out.write("\n")
        return
    if header:
        out.write(f"# {header}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())


def summarize(rows: list[Row]) -> str:
    lines = []
    ratios = worst_ratios(rows)
    for strat in sorted(ratios):
        mine = [r for r in rows if r.strategy == strat]
        failed = [r for r in mine if not r.passed]
        gap = [r for r in failed if r.status == "move-gap"]
        line = f"{strat}: {len(mine)} rows, {len(failed)} failed, worst E/(n/k) = {ratios[strat]:.4f}"
        if gap:
            line += f", {len(gap)} move-gap violations"
        lines.append(line)
        for r in failed[:10]:
            lines.append(f"  FAIL {r.graph_kind} n={r.n} k={r.k} gambler={r.gambler} E={r.exact_E:.6g} bound={r.bound:.6g}")
    return "\n".join(lines)


def _evaluate_one(job: tuple[Instance, int, int]) -> Row:
    inst, trials, seed = job
    return evaluate_instance(inst, trials, seed)


def run_instances(instances: list[Instance], trials: int, seed: int, workers: int = 1) -> list[Row]:
    """Evaluate rows, optionally in parallel; output order follows the input order."""
    jobs = [(inst, trials, seed + i) for i, inst in enumerate(instances)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_one, jobs, chunksize=4))
    return [_evaluate_one(j) for j in jobs]


def _open_out(path: str | None):
    return open(path, "w", newline="") if path else None


def cmd_generate(args) -> int:
    g, _ = _graph_from_args(args)
    if args.dot:
        text = to_dot(g)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    elif args.out:
        write_edge_list(g, args.out)
    else:
        write_edge_list(g, sys.stdout)
    return 0


def cmd_decompose(args) -> int:
    g = read_edge_list(args.graph)
    dec = decompose(g, args.k)
    dec.validate(g)
    text = dec.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    g, kind = _graph_from_args(args)
    cfg = ExperimentConfig(g, kind, args.k, args.strategy, _select_gamblers(args, g), args.trials, args.seed, args.format)
    instances = [Instance(cfg.graph_kind, cfg.graph, cfg.k, cfg.strategy, m) for m in cfg.gamblers]
    rows = run_instances(instances, cfg.trials, cfg.seed)
    write_rows(rows, cfg.fmt, sys.stdout)
    return 0 if all(r.passed for r in rows) else 1


def _config_instances(path: str, default_seed: int) -> list[Instance]:
    """Rows from ``{"rows": [{"kind", "n", "k", "strategy", "gambler", "seed"?, "p"?}]}``."""
    with open(path) as fh:
        cfg = json.load(fh)
    out = []
    for item in cfg["rows"]:
        seed = int(item.get("seed", default_seed))
        g = generate(item["kind"], int(item["n"]), seed=seed, p=item.get("p"), rows=item.get("rows"))
        models = _corpus_gamblers(g, int(item["k"]), item["strategy"], seed)
        wanted = item.get("gambler", "all")
        picked = models if wanted == "all" else [m for m in models if m.name == wanted]
        if not picked:
            raise IncompatibleConfig(f"unknown gambler {wanted!r} in config")
        out += [Instance(item["kind"], g, int(item["k"]), item["strategy"], m) for m in picked]
    return out


def cmd_bench(args) -> int:
    if args.config:
        instances = _config_instances(args.config, args.seed)
        label = args.config
    else:
        instances = suite_instances(args.suite, args.seed)
        label = args.suite
    rows = run_instances(instances, args.trials, args.seed, args.workers)
    header = None
    if not args.reproducible:
        header = f"generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')} suite={label} seed={args.seed}"
    fh = _open_out(args.out)
    try:
        write_rows(rows, args.format, fh or sys.stdout, header)
    finally:
        if fh:
            fh.close()
    print(summarize(rows), file=sys.stderr)
    return 0 if all(r.passed for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pursuit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a benchmark graph as an edge list")
    _add_graph_args(p, required=True)
    p.add_argument("--out")
    p.add_argument("--dot", action="store_true", help="write Graphviz DOT instead")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("decompose", help="sector decomposition of an edge-list graph as JSON")
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("eval", help="exact and Monte Carlo capture time for one configuration")
    p.add_argument("--graph", help="edge-list file (instead of --kind/--n)")
    _add_graph_args(p, required=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--gambler", default="uniform", help="corpus gambler name, or 'all'")
    p.add_argument("--gambler-json", help='file with {"schedule": [[p, ...], ...]}')
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run a bound-verification suite")
    p.add_argument("--suite", default="all", choices=("known", "unknown", "changing", "diameter", "all"))
    p.add_argument("--config", help="JSON suite config (overrides --suite)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials per row (0 = exact only)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--reproducible", action="store_true", help="omit the timestamp header line")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None:
        args.seed = _default_seed()
    try:
        return args.func(args)
    except (IncompatibleConfig, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
