"""Command-line entry point: ``csbats <subcommand> [options]``."""

import argparse
import itertools
import logging
import os
import sys
from typing import Any, List, Optional, Sequence

from csbats.analysis.bounds import check_all_variables, lemma1_check, tree_vs_cycle
from csbats.analysis.dependence import correlation_heatmap
from csbats.analysis.report import write_report_csv
from csbats.analysis.trace import collect_trace, indicator_identity_violations, save_trace
from csbats.channel.network import (
    ChannelConfig,
    RankDistribution,
    estimate_rank_distribution,
    rank_distribution_sweep,
)
from csbats.experiments.config import CONSTRUCTIONS, ExperimentConfig, load_config, range_values
from csbats.experiments.plotdata import emit_plotdata
from csbats.experiments.runner import build_graph, run_experiment, run_table2, write_results
from csbats.graphs.distribution import save_distribution
from csbats.graphs.tanner import complexity_report
from csbats.optimize.degree import DEFAULT_ETA, DEFAULT_GRID, OptProblem, optimize
from csbats.simulation import DECODER_KINDS

logger = logging.getLogger(__name__)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="Flat 'key = value' experiment configuration file")
    p.add_argument("--seed", type=int, help="Master seed")
    p.add_argument("--out", help="Output directory")
    p.add_argument("--trials", type=int, help="Decoding runs per graph instance")
    p.add_argument("--instances", type=int, help="Graph instances per sweep point")
    p.add_argument(
        "--construction",
        help=f"Comma-separated constructions: {', '.join(CONSTRUCTIONS)}",
    )
    p.add_argument(
        "--decoder", help=f"Comma-separated decoders: {', '.join(DECODER_KINDS)}"
    )
    p.add_argument("--hops", help="Hop count or range a..b[:step]")
    p.add_argument("--batches", help="Batch count N or range a..b[:step]")
    p.add_argument("--loss", type=float, help="Per-link packet loss probability")
    p.add_argument("--workers", type=int, help="Worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csbats",
        description="BATS and Cyclic-Shift BATS code experiments",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log progress")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("experiment", help="Decoding rate sweep over hops and batch counts")
    _add_common(p)

    p = sub.add_parser("table2", help="Random base graphs vs column-designed base graphs")
    _add_common(p)

    p = sub.add_parser("rankdist", help="Estimate end-to-end rank distributions")
    _add_common(p)
    p.add_argument("-M", "--batch-size", type=int, default=16, help="Batch size M")

    p = sub.add_parser("depcheck", help="Dependence analysis of decodability indicators")
    _add_common(p)
    p.add_argument(
        "--tree-vs-cycle",
        action="store_true",
        help="Also compare tree-shaped and fully shared check-node pairs",
    )

    p = sub.add_parser("optimize", help="Optimize a degree distribution")
    _add_common(p)
    p.add_argument("-K", type=int, default=256, help="Number of source symbols")
    p.add_argument("-M", "--batch-size", type=int, default=16, help="Batch size M")
    p.add_argument("--rank-file", help="File holding one rank distribution line")
    p.add_argument("--eta", type=float, default=DEFAULT_ETA)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--max-degree", type=int, help="Largest degree allowed")

    p = sub.add_parser("graph", help="Edge counts and encoder cost of a construction")
    _add_common(p)
    return parser


def resolve_config(args: argparse.Namespace, **defaults: Any) -> ExperimentConfig:
    """Config file (or ``defaults``) with command-line flags applied on top."""
    cfg = load_config(args.config) if args.config else ExperimentConfig(**defaults)
    return cfg.with_overrides(
        master_seed=args.seed,
        output_dir=args.out,
        repeats=args.trials,
        graph_instances=args.instances,
        constructions=args.construction,
        decoders=args.decoder,
        hops=args.hops,
        batches=args.batches,
        loss=args.loss,
        workers=args.workers,
    )


def _print_rows(rows: Sequence[Any]) -> None:
    for row in rows:
        print(
            f"{row.construction:>20} {row.decoder:>12} N={row.N:<3} hops={row.hops:<3} "
            f"rate={row.mean_rate:.4f}+-{row.std_rate:.4f} "
            f"inact={row.mean_inact:.2f}+-{row.std_inact:.2f} edges={row.edges:.1f}"
        )


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    rows = run_experiment(cfg)
    csv_path, _ = write_results(rows, cfg, cfg.output_dir, "experiment")
    emit_plotdata(rows, os.path.join(cfg.output_dir, "plotdata"))
    _print_rows(rows)
    print(f"Wrote {csv_path}")
    return 0


def cmd_table2(args: argparse.Namespace) -> int:
    cfg = resolve_config(
        args,
        batches="19..28",
        constructions=("cs-column-designed",),
        decoders=("bp",),
        graph_instances=500,
        repeats=1,
    )
    rows = run_table2(cfg)
    csv_path, _ = write_results(rows, cfg, cfg.output_dir, "table2")
    emit_plotdata(rows, os.path.join(cfg.output_dir, "plotdata"))
    _print_rows(rows)
    print(f"Wrote {csv_path}")
    return 0


def cmd_rankdist(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, hops="1..20", repeats=10000)
    sweep = rank_distribution_sweep(
        args.batch_size,
        cfg.loss,
        cfg.hop_values(),
        cfg.repeats,
        cfg.master_seed,
        recode=cfg.recode,
        coefficient_mode=cfg.coefficient_mode,
    )
    lines = [f"{hops} {h.mean():.4f} {h.to_line()}" for hops, h in sweep.items()]
    print("\n".join(lines))
    if args.out:
        os.makedirs(cfg.output_dir, exist_ok=True)
        path = os.path.join(cfg.output_dir, "rankdist.txt")
        with open(path, "w", encoding="utf-8") as f:
            f.write("# hops mean_rank h_0 .. h_M\n")
            f.write("\n".join(lines) + "\n")
        print(f"Wrote {path}")
    return 0


def _channel(cfg: ExperimentConfig, hops: int) -> ChannelConfig:
    return ChannelConfig(
        hops=hops,
        loss=cfg.loss,
        M=cfg.M,
        recode=cfg.recode,
        coefficient_mode=cfg.coefficient_mode,
    )


def _sharing_pairs(supports: List[List[int]]) -> List[Any]:
    sets = [set(s) for s in supports]
    return [(i, j) for i, j in itertools.combinations(range(len(sets)), 2) if sets[i] & sets[j]]


def cmd_depcheck(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, decoders=("bp",), repeats=2000)
    construction = cfg.constructions[0]
    decoder = cfg.decoders[0]
    N = cfg.batch_values()[0]
    hops = cfg.hop_values()[0]
    t = build_graph(construction, cfg, N, 0)
    trace = collect_trace(
        t, _channel(cfg, hops), decoder, cfg.repeats, cfg.master_seed, cfg.pk, cfg.max_pending
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    save_trace(trace, os.path.join(cfg.output_dir, "trace.bin"))

    reports = check_all_variables(trace)
    write_report_csv(reports, os.path.join(cfg.output_dir, "bounds.csv"))
    pairs = _sharing_pairs(trace.supports)
    if pairs:
        write_report_csv(
            [correlation_heatmap(trace, i, j) for i, j in pairs],
            os.path.join(cfg.output_dir, "heatmap.csv"),
        )
        write_report_csv(
            [lemma1_check(trace, i, [j]) for i, j in pairs],
            os.path.join(cfg.output_dir, "conditional.csv"),
        )
    satisfied = sum(r.satisfied for r in reports)
    print(
        f"{construction}/{decoder} N={N} hops={hops} T={trace.trials}: "
        f"{satisfied}/{len(reports)} variable nodes within bounds"
    )
    if decoder == "bp":
        print(f"Indicator identity violations: {indicator_identity_violations(trace)}")

    if args.tree_vs_cycle:
        structures = tree_vs_cycle(_channel(cfg, hops), cfg.repeats, cfg.master_seed)
        write_report_csv(structures.values(), os.path.join(cfg.output_dir, "tree_vs_cycle.csv"))
        for name, report in structures.items():
            print(f"{name:>6}: P(V=1)={report.p_v:.4f} rho={report.rho!r}")
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, repeats=10000)
    if args.rank_file:
        with open(args.rank_file, "r", encoding="utf-8") as f:
            h = RankDistribution.from_line(f.readline())
    else:
        channel = ChannelConfig(
            hops=cfg.hop_values()[0],
            loss=cfg.loss,
            M=args.batch_size,
            recode=cfg.recode,
            coefficient_mode=cfg.coefficient_mode,
        )
        h = estimate_rank_distribution(channel, cfg.repeats, cfg.master_seed)
    problem = OptProblem(
        h=h,
        K=args.K,
        M=h.M,
        eta=args.eta,
        grid=args.grid,
        max_degree=args.max_degree,
    )
    psi, theta = optimize(problem)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "psi.txt")
    save_distribution(
        psi, path, comment=f"theta={theta:.6f} eta={args.eta} grid={args.grid}\nh={h.to_line()}"
    )
    print(f"theta = {theta:.6f}")
    for d, mass in psi.to_dict().items():
        print(f"{d:>4} {mass:.6f}")
    print(f"Wrote {path}")
    return 0


def cmd_graph(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, batches="16..24:2")
    for construction in cfg.constructions:
        for N in range_values(cfg.batches):
            t = build_graph(construction, cfg, N, 0)
            report = complexity_report(t, cfg.pk)
            print(
                f"{construction:>20} N={N:<3} edges={report['edge_count']:<5} "
                f"max_row_degree={report['max_row_degree']:<4} "
                f"buffer={report['buffer_symbols']} symbols ({report['buffer_bytes']} B) "
                f"routing={report['routing_wires']} wires"
            )
    return 0


COMMANDS = {
    "experiment": cmd_experiment,
    "table2": cmd_table2,
    "rankdist": cmd_rankdist,
    "depcheck": cmd_depcheck,
    "optimize": cmd_optimize,
    "graph": cmd_graph,
}


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.INFO if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError) as e:
        logger.error("%s", e)
        print(f"csbats: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
