import json
import math
import os

import pytest

from csbats.experiments.cli import build_parser, main
from csbats.experiments.config import (
    ExperimentConfig,
    format_config,
    format_range,
    load_config,
    parse_config,
    parse_range,
)
from csbats.experiments.plotdata import emit_plotdata, parse_plotdata, series_filename
from csbats.experiments.runner import (
    CSV_COLUMNS,
    ResultRow,
    build_graph,
    confidence_halfwidth,
    format_results_csv,
    parse_results_csv,
    run_experiment,
    run_table2,
    write_results,
)
from csbats.graphs.distribution import load_distribution
from csbats.graphs.tanner import graph_metrics

TINY = """
# desk-sized sweep
K = 32
pk = 1
M = 4
loss = 0.1
hops = 2
batches = 10..12:2
constructions = cs-7, random
decoders = bp, inactivation
repeats = 2
workers = 1
timing = false
"""


@pytest.fixture
def tiny_config():
    return parse_config(TINY)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY)
    return str(path)


class TestRanges:
    """Range syntax used by the config file and the command line."""

    def test_parse_range(self):
        assert parse_range("7") == (7, 7, 1)
        assert parse_range("1..20") == (1, 20, 1)
        assert parse_range("16..24:2") == (16, 24, 2)

    def test_format_range(self):
        assert format_range((7, 7, 1)) == "7"
        assert format_range((1, 20, 1)) == "1..20"
        assert format_range((16, 24, 2)) == "16..24:2"

    def test_bad_ranges(self):
        for text in ("a..b", "5..2", "1..4:0", "1..4:x"):
            with pytest.raises(ValueError):
                parse_range(text)


class TestConfig:
    """Experiment configuration files."""

    def test_parse(self, tiny_config):
        assert tiny_config.K == 32
        assert tiny_config.batch_values() == [10, 12]
        assert tiny_config.hop_values() == [2]
        assert tiny_config.constructions == ("cs-7", "random")
        assert tiny_config.timing is False
        assert tiny_config.max_pending is None

    def test_format_roundtrip(self, tiny_config):
        assert parse_config(format_config(tiny_config)) == tiny_config

    def test_load_from_file(self, config_file, tiny_config):
        assert load_config(config_file) == tiny_config

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="Unknown configuration key 'colour'"):
            parse_config("colour = blue\n")

    def test_line_without_equals(self):
        with pytest.raises(ValueError, match=":2:"):
            parse_config("K = 8\nK 8\n")

    def test_rejects_unsupported_field(self):
        with pytest.raises(ValueError):
            ExperimentConfig(q=16)

    def test_layered_needs_cyclic_shift(self):
        with pytest.raises(ValueError):
            ExperimentConfig(constructions=("random",), decoders=("layered",))

    def test_file_construction_needs_path(self):
        with pytest.raises(ValueError):
            ExperimentConfig(constructions=("cs-file",))

    def test_alternative_key_names(self):
        """Singular and long-form key names map onto the sweep fields."""
        cfg = parse_config(
            "N = 16..24:2\nrepeats_per_instance = 3\nconstruction = random\ndecoder = bp\n"
        )
        assert cfg.batch_values() == [16, 18, 20, 22, 24]
        assert cfg.repeats == 3
        assert cfg.constructions == ("random",)
        assert cfg.decoders == ("bp",)
        with pytest.raises(ValueError, match="given twice"):
            parse_config("N = 20\nbatches = 24\n")

    def test_inactivation_budget_is_opt_in(self):
        """Inactivation is unbudgeted unless max_pending is set."""
        assert ExperimentConfig().max_pending is None
        cfg = parse_config(TINY + "max_pending = 3\n")
        assert cfg.max_pending == 3
        assert parse_config(format_config(cfg)).max_pending == 3
        assert "max_pending = none" in format_config(ExperimentConfig())

    def test_overrides_skip_none(self, tiny_config):
        cfg = tiny_config.with_overrides(master_seed=9, loss=None, hops="1..3")
        assert cfg.master_seed == 9
        assert cfg.loss == tiny_config.loss
        assert cfg.hop_values() == [1, 2, 3]


class TestRunner:
    """Sweeps and their result tables."""

    def test_build_graph(self):
        cfg = ExperimentConfig()
        t = build_graph("cs-7", cfg, 20, 0)
        assert graph_metrics(t).edge_count == 324
        assert build_graph("cs-column-designed", cfg, 20, 1).m == 7
        assert build_graph("cs-random-base", cfg, 20, 1).row_degrees()[:7].sum() == 117
        with pytest.raises(ValueError):
            build_graph("ldpc", cfg, 20, 0)

    def test_random_instances_differ(self):
        cfg = ExperimentConfig()
        assert build_graph("random", cfg, 20, 0) != build_graph("random", cfg, 20, 1)
        assert build_graph("random", cfg, 20, 0) == build_graph("random", cfg, 20, 0)

    def test_cs_file_construction(self, tmp_path):
        from csbats.graphs.base import preset_base_graph, save_base_graph

        path = str(tmp_path / "base.txt")
        save_base_graph(preset_base_graph("cs8", 64), path)
        cfg = ExperimentConfig(K=64, constructions=("cs-file",), base_file=path)
        assert build_graph("cs-file", cfg, 10, 0).m == 8

    def test_rows_cover_the_sweep(self, tiny_config):
        rows = run_experiment(tiny_config)
        assert len(rows) == 2 * 2 * 2
        for row in rows:
            assert row.trials == 2
            assert 0.0 <= row.mean_rate <= 1.0
            assert row.seconds == 0.0
        bp = {(r.construction, r.N): r.mean_rate for r in rows if r.decoder == "bp"}
        inact = {(r.construction, r.N): r.mean_rate for r in rows if r.decoder == "inactivation"}
        for key, rate in bp.items():
            assert inact[key] >= rate

    def test_reruns_are_byte_identical(self, tiny_config):
        first = format_results_csv(run_experiment(tiny_config))
        second = format_results_csv(run_experiment(tiny_config))
        assert first == second

    def test_table2_arms(self, tiny_config):
        cfg = tiny_config.with_overrides(K=64, batches="8", graph_instances=2, repeats=1)
        rows = run_table2(cfg)
        assert [r.construction for r in rows] == ["cs-random-base", "cs-column-designed"]
        assert all(r.decoder == "bp" and r.trials == 2 for r in rows)

    def test_csv_roundtrip(self, tiny_config):
        rows = run_experiment(tiny_config)
        again = parse_results_csv(format_results_csv(rows))
        assert [(r.construction, r.decoder, r.N, r.hops) for r in again] == [
            (r.construction, r.decoder, r.N, r.hops) for r in rows
        ]
        assert again[0].mean_rate == pytest.approx(rows[0].mean_rate, abs=1e-6)
        with pytest.raises(ValueError):
            parse_results_csv("a,b,c\n")

    def test_write_results(self, tiny_config, tmp_path):
        rows = run_experiment(tiny_config)
        csv_path, meta_path = write_results(rows, tiny_config, str(tmp_path), "experiment")
        with open(csv_path) as f:
            assert f.readline().strip() == ",".join(CSV_COLUMNS)
        with open(meta_path) as f:
            meta = json.load(f)
        assert meta["polynomial"] == "0x11d"
        assert meta["config"]["batches"] == "10..12:2"

    def test_confidence_halfwidth(self):
        row = ResultRow("cs-7", "bp", 20, 10, 0.1, 100, 0.8, 0.1, 0.0, 0.0, 324.0, 27, 0.0)
        assert confidence_halfwidth(row) == pytest.approx(1.96 * 0.1 / 10)
        single = ResultRow("cs-7", "bp", 20, 10, 0.1, 1, 0.8, 0.0, 0.0, 0.0, 324.0, 27, 0.0)
        assert math.isinf(confidence_halfwidth(single))


class TestPlotData:
    """Plot-ready series files."""

    def rows(self):
        rows = []
        for N in (16, 20):
            for hops in (1, 2, 3):
                rows.append(
                    ResultRow("cs-7", "bp", N, hops, 0.1, 10, 1.0 / hops, 0.01 * N, 0, 0, 0, 27, 0)
                )
        return rows

    def test_roundtrip(self, tmp_path):
        paths = emit_plotdata(self.rows(), str(tmp_path))
        assert len(paths) == 2
        assert os.path.basename(paths[0]) == series_filename(("cs-7", "bp", "N", 16))
        series = parse_plotdata(str(tmp_path))
        points = series[("cs-7", "bp", "N", 20)]
        assert [p[0] for p in points] == [1.0, 2.0, 3.0]
        assert points[1][1] == pytest.approx(0.5)
        assert points[0][2] == pytest.approx(0.2)

    def test_x_axis_is_batches_when_hops_fixed(self, tmp_path):
        rows = [r for r in self.rows() if r.hops == 2]
        emit_plotdata(rows, str(tmp_path))
        series = parse_plotdata(str(tmp_path))
        assert list(series) == [("cs-7", "bp", "hops", 2)]
        assert [p[0] for p in series[("cs-7", "bp", "hops", 2)]] == [16.0, 20.0]

    def test_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plotdata([], str(tmp_path))


class TestCommandLine:
    """The csbats command."""

    def test_graph(self, capsys):
        assert main(["graph", "--construction", "cs-7", "--batches", "16..24:2"]) == 0
        out = capsys.readouterr().out
        for edges in (257, 285, 324, 362, 388):
            assert f"edges={edges}" in out

    def test_experiment_writes_outputs(self, config_file, tmp_path):
        out = tmp_path / "run"
        assert main(["-q", "experiment", "--config", config_file, "--out", str(out)]) == 0
        assert (out / "results.csv").exists()
        assert (out / "metadata.json").exists()
        assert len(os.listdir(out / "plotdata")) == 4

    def test_rankdist(self, capsys):
        args = ["rankdist", "-M", "4", "--hops", "1..2", "--trials", "50", "--loss", "0.1"]
        assert main(args) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [line.split()[0] for line in lines] == ["1", "2"]
        assert len(lines[0].split()) == 2 + 5

    def test_optimize(self, tmp_path):
        args = [
            "optimize", "-K", "8", "-M", "4", "--grid", "9",
            "--trials", "200", "--hops", "1", "--out", str(tmp_path),
        ]
        assert main(args) == 0
        psi = load_distribution(str(tmp_path / "psi.txt"))
        assert psi.max_degree <= 8

    def test_depcheck(self, config_file, tmp_path):
        args = [
            "depcheck", "--config", config_file, "--construction", "cs-7",
            "--decoder", "bp", "--trials", "30", "--out", str(tmp_path),
        ]
        assert main(args) == 0
        assert (tmp_path / "trace.bin").exists()
        assert (tmp_path / "bounds.csv").exists()

    def test_bad_range_is_reported(self, capsys):
        assert main(["graph", "--batches", "9..3"]) == 2
        assert "csbats: error" in capsys.readouterr().err

    def test_help_lists_decoders(self, capsys):
        """Subcommand help names every decoder."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["experiment", "--help"])
        out = capsys.readouterr().out
        for name in ("bp", "inactivation", "layered"):
            assert name in out
