"""Monte Carlo acceptance runs at desk scale.

Excluded by default; run with ``pytest -m slow``.
"""

import numpy as np
import pytest

from csbats.analysis.bounds import check_all_variables
from csbats.analysis.dependence import coupled_bernoulli, expected_v
from csbats.analysis.trace import collect_trace
from csbats.channel.network import ChannelConfig
from csbats.experiments.config import ExperimentConfig
from csbats.experiments.runner import (
    build_graph,
    confidence_halfwidth,
    run_experiment,
    run_table2,
)

pytestmark = pytest.mark.slow


def point(rows, construction, decoder, N=20, hops=10):
    (row,) = [
        r
        for r in rows
        if (r.construction, r.decoder, r.N, r.hops) == (construction, decoder, N, hops)
    ]
    return row


def separated(better, worse):
    """Non-overlapping 95% intervals with ``better`` above ``worse``."""
    return (
        better.mean_rate - confidence_halfwidth(better)
        > worse.mean_rate + confidence_halfwidth(worse)
    )


def test_cs7_ten_hops():
    """CS-7 at N=20 over ten lossy hops decodes about 0.76 with about 4.4 inactivations."""
    cfg = ExperimentConfig(repeats=200, timing=False)
    row = point(run_experiment(cfg), "cs-7", "inactivation")
    assert row.mean_rate == pytest.approx(0.76, abs=0.06)
    assert row.mean_inact == pytest.approx(4.4, abs=2.0)


def test_cyclic_shift_beats_random():
    cfg = ExperimentConfig(
        constructions=("cs-7", "random"),
        decoders=("bp", "inactivation"),
        graph_instances=100,
        repeats=5,
        timing=False,
    )
    rows = run_experiment(cfg)
    for decoder in ("bp", "inactivation"):
        assert separated(point(rows, "cs-7", decoder), point(rows, "random", decoder))


def test_hop_stability():
    """CS-7 loses little rate from 1 to 20 hops; random graphs lose much more."""
    cfg = ExperimentConfig(
        constructions=("cs-7", "random"),
        hops="1..20:19",
        graph_instances=40,
        repeats=5,
        timing=False,
    )
    rows = run_experiment(cfg)
    cs_drop = point(rows, "cs-7", "inactivation", hops=1).mean_rate - point(
        rows, "cs-7", "inactivation", hops=20
    ).mean_rate
    random_drop = point(rows, "random", "inactivation", hops=1).mean_rate - point(
        rows, "random", "inactivation", hops=20
    ).mean_rate
    assert cs_drop <= 0.15
    assert random_drop >= 0.20


def test_column_design_beats_random_base():
    cfg = ExperimentConfig(
        batches="20..28:4",
        hops="10",
        graph_instances=100,
        repeats=1,
        timing=False,
    )
    rows = run_table2(cfg)
    for N in (20, 24, 28):
        designed = point(rows, "cs-column-designed", "bp", N=N)
        random_base = point(rows, "cs-random-base", "bp", N=N)
        assert separated(designed, random_base)


def test_bounds_hold_on_cs7_traces():
    """At least 99% of the covered variables of CS-7 stay within their 3-sigma bounds."""
    cfg = ExperimentConfig(decoders=("bp",))
    t = build_graph("cs-7", cfg, 20, 0)
    channel = ChannelConfig(hops=10, loss=cfg.loss, M=cfg.M)
    trace = collect_trace(t, channel, "bp", T=5000, seed=cfg.master_seed)
    reports = check_all_variables(trace)
    assert reports
    satisfied = sum(r.satisfied for r in reports)
    assert satisfied >= 0.99 * len(reports)


@pytest.mark.parametrize("rho", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_coupled_pair_matches_closed_form(rho):
    """The empirical P(V=1) of a two-check variable follows its closed form."""
    x, y = coupled_bernoulli(0.5, 0.5, rho, 100000, seed=int(rho * 100))
    assert np.mean(x | y) == pytest.approx(expected_v(0.5, 0.5, rho), abs=0.01)
