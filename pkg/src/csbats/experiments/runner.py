"""Sweep runner: decoding rate and inactivation statistics per sweep point."""

import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from csbats.channel.network import ChannelConfig
from csbats.core.gf import REDUCTION_POLYNOMIAL
from csbats.core.seeding import STAGE_GRAPH, derive_rng
from csbats.experiments.config import TABLE2_ARMS, ExperimentConfig, PathLike
from csbats.graphs.base import (
    CS7_DEGREES,
    design_base_graph,
    load_base_graph,
    preset_base_graph,
    random_base_graph,
)
from csbats.graphs.distribution import DegreeDistribution, load_distribution
from csbats.graphs.tanner import TannerGraph, expand_cs, graph_metrics, random_tanner
from csbats.simulation import run_trial

logger = logging.getLogger(__name__)

RESULT_SCHEMA = "csbats.results/1"

CSV_COLUMNS = (
    "construction",
    "decoder",
    "N",
    "hops",
    "loss",
    "trials",
    "mean_rate",
    "std_rate",
    "mean_inact",
    "std_inact",
    "edges",
    "max_row_degree",
    "seconds",
)

PRESET_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "presets")

# Degree distribution shipped for the random construction
DEFAULT_PSI_FILE = os.path.join(PRESET_DIR, "psi_inact.txt")


@dataclass
class ResultRow:
    """Aggregated statistics of one (construction, decoder, N, hops) point.

    ``std_*`` are sample standard deviations (``ddof=1``; 0 for one trial).
    """

    construction: str
    decoder: str
    N: int
    hops: int
    loss: float
    trials: int
    mean_rate: float
    std_rate: float
    mean_inact: float
    std_inact: float
    edges: float
    max_row_degree: int
    seconds: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def csv_fields(self) -> List[str]:
        return [
            self.construction,
            self.decoder,
            str(self.N),
            str(self.hops),
            f"{self.loss:.6g}",
            str(self.trials),
            f"{self.mean_rate:.6f}",
            f"{self.std_rate:.6f}",
            f"{self.mean_inact:.6f}",
            f"{self.std_inact:.6f}",
            f"{self.edges:.2f}",
            str(self.max_row_degree),
            f"{self.seconds:.3f}",
        ]


def _sample_std(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def random_psi(cfg: ExperimentConfig) -> DegreeDistribution:
    return load_distribution(cfg.psi_file or DEFAULT_PSI_FILE)


def build_graph(
    construction: str,
    cfg: ExperimentConfig,
    N: int,
    instance: int,
    psi: Optional[DegreeDistribution] = None,
) -> TannerGraph:
    """Tanner graph for one graph instance of a sweep point.

    Presets and file-based base graphs are deterministic; the random
    constructions draw from stream ``(instance, 0, STAGE_GRAPH)``.

    Raises:
        ValueError: If the construction is unknown.
    """
    rng = derive_rng(cfg.master_seed, instance, 0, STAGE_GRAPH)
    if construction == "random":
        return random_tanner(psi if psi is not None else random_psi(cfg), cfg.K, N, rng)
    if construction == "cs-7":
        base = preset_base_graph("cs7", cfg.K)
    elif construction == "cs-8":
        base = preset_base_graph("cs8", cfg.K)
    elif construction == "cs-file":
        base = load_base_graph(cfg.base_file)
        if base.K != cfg.K:
            raise ValueError(f"{cfg.base_file}: base graph has K={base.K}, config has K={cfg.K}")
    elif construction == "cs-random-base":
        base = random_base_graph(CS7_DEGREES, cfg.K, rng)
    elif construction == "cs-column-designed":
        base = design_base_graph(CS7_DEGREES, cfg.K, tie_break="random", seed=rng)
    else:
        raise ValueError(f"Unknown construction {construction!r}")
    return expand_cs(base, N)


def _instance_count(construction: str, cfg: ExperimentConfig) -> int:
    # Deterministic constructions build the same graph for every instance
    if construction in ("cs-7", "cs-8", "cs-file"):
        return 1
    return cfg.graph_instances


def _repeat_count(construction: str, cfg: ExperimentConfig) -> int:
    if construction in ("cs-7", "cs-8", "cs-file"):
        return cfg.repeats * cfg.graph_instances
    return cfg.repeats


def _run_instance(
    args: Tuple[str, str, int, int, int, ExperimentConfig, Optional[DegreeDistribution]]
) -> Tuple[List[float], List[int], int, int]:
    construction, decoder, N, hops, instance, cfg, psi = args
    t = build_graph(construction, cfg, N, instance, psi)
    channel = ChannelConfig(
        hops=hops,
        loss=cfg.loss,
        M=cfg.M,
        recode=cfg.recode,
        coefficient_mode=cfg.coefficient_mode,
    )
    rates: List[float] = []
    inacts: List[int] = []
    for repeat in range(_repeat_count(construction, cfg)):
        result = run_trial(
            t, channel, decoder, cfg.master_seed, instance, repeat, cfg.pk, cfg.max_pending
        )
        rates.append(result.decoding_rate)
        inacts.append(result.inactivation_count)
    metrics = graph_metrics(t)
    return rates, inacts, metrics.edge_count, metrics.max_row_degree


def run_point(
    construction: str,
    decoder: str,
    N: int,
    hops: int,
    cfg: ExperimentConfig,
    executor: Optional[ProcessPoolExecutor] = None,
    psi: Optional[DegreeDistribution] = None,
) -> ResultRow:
    """Run every trial of one sweep point and aggregate them."""
    started = time.perf_counter()
    if construction == "random" and psi is None:
        psi = random_psi(cfg)
    tasks = [
        (construction, decoder, N, hops, instance, cfg, psi)
        for instance in range(_instance_count(construction, cfg))
    ]
    mapper = executor.map if executor is not None else map
    rates: List[float] = []
    inacts: List[int] = []
    edges: List[int] = []
    max_degree = 0
    for r, i, e, d in mapper(_run_instance, tasks):
        rates.extend(r)
        inacts.extend(i)
        edges.append(e)
        max_degree = max(max_degree, d)
    seconds = time.perf_counter() - started if cfg.timing else 0.0
    row = ResultRow(
        construction=construction,
        decoder=decoder,
        N=N,
        hops=hops,
        loss=cfg.loss,
        trials=len(rates),
        mean_rate=float(np.mean(rates)),
        std_rate=_sample_std(rates),
        mean_inact=float(np.mean(inacts)),
        std_inact=_sample_std(inacts),
        edges=float(np.mean(edges)),
        max_row_degree=max_degree,
        seconds=seconds,
    )
    logger.info(
        "%s/%s N=%d hops=%d: rate %.4f +- %.4f over %d trials (%.1fs)",
        construction,
        decoder,
        N,
        hops,
        row.mean_rate,
        row.std_rate,
        row.trials,
        seconds,
    )
    return row


def _sweep(
    cfg: ExperimentConfig,
    constructions: Iterable[str],
    decoders: Iterable[str],
) -> List[ResultRow]:
    points = [
        (c, d, N, h)
        for c in constructions
        for d in decoders
        for N in cfg.batch_values()
        for h in cfg.hop_values()
    ]
    logger.info("Running %d sweep points with %d worker(s)", len(points), cfg.workers)
    psi = random_psi(cfg) if "random" in constructions else None
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            return [run_point(c, d, N, h, cfg, executor, psi) for c, d, N, h in points]
    return [run_point(c, d, N, h, cfg, None, psi) for c, d, N, h in points]


def run_experiment(cfg: ExperimentConfig) -> List[ResultRow]:
    """Sweep constructions x decoders x batch counts x hop counts.

    Every point reuses the same stream addresses, so arms differ only in
    what they are meant to compare.
    """
    return _sweep(cfg, list(cfg.constructions), list(cfg.decoders))


def run_table2(cfg: ExperimentConfig) -> List[ResultRow]:
    """Random base graphs against column-designed ones under BP decoding.

    ``cfg.graph_instances`` base graphs are drawn per arm, all with the
    seven reference row degrees.
    """
    return _sweep(cfg, list(TABLE2_ARMS), ["bp"])


def format_results_csv(rows: Sequence[ResultRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(row.csv_fields()) for row in rows)
    return "\n".join(lines) + "\n"


def run_metadata(cfg: ExperimentConfig, command: str) -> Dict[str, Any]:
    return {
        "schema": RESULT_SCHEMA,
        "command": command,
        "field": f"GF(2^8) modulo {REDUCTION_POLYNOMIAL:#x}",
        "polynomial": f"{REDUCTION_POLYNOMIAL:#x}",
        "coefficient_mode": cfg.coefficient_mode,
        "master_seed": cfg.master_seed,
        "seed_streams": "SeedSequence(master_seed, spawn_key=(instance, repeat, stage))",
        "hops_definition": "number of links; hops - 1 intermediate nodes recode",
        "std_definition": "sample standard deviation (ddof=1)",
        "config": cfg.to_dict(),
    }


def write_results(
    rows: Sequence[ResultRow], cfg: ExperimentConfig, out_dir: PathLike, command: str
) -> Tuple[str, str]:
    """Write ``results.csv`` and ``metadata.json`` into ``out_dir``.

    Returns:
        Paths of the CSV and metadata files.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    meta_path = os.path.join(out_dir, "metadata.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        f.write(format_results_csv(rows))
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump(run_metadata(cfg, command), f, indent=2, sort_keys=True)
        f.write("\n")
    return csv_path, meta_path


def parse_results_csv(text: str) -> List[ResultRow]:
    """Read rows written by :func:`format_results_csv`.

    Raises:
        ValueError: If the header does not match.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise ValueError("Not a csbats results table")
    rows = []
    for line in lines[1:]:
        v = line.split(",")
        rows.append(
            ResultRow(
                construction=v[0],
                decoder=v[1],
                N=int(v[2]),
                hops=int(v[3]),
                loss=float(v[4]),
                trials=int(v[5]),
                mean_rate=float(v[6]),
                std_rate=float(v[7]),
                mean_inact=float(v[8]),
                std_inact=float(v[9]),
                edges=float(v[10]),
                max_row_degree=int(v[11]),
                seconds=float(v[12]),
            )
        )
    return rows


def confidence_halfwidth(row: ResultRow, z: float = 1.96) -> float:
    """Normal-approximation half-width of the mean rate's confidence interval."""
    if row.trials < 2:
        return math.inf
    return z * row.std_rate / math.sqrt(row.trials)
