import numpy as np
import pytest

from csbats.channel.network import (
    ChannelConfig,
    RankDistribution,
    estimate_rank_distribution,
    probe_batch,
    rank_distribution_sweep,
    transmit,
)
from csbats.codec.batch import SourceBlock, encode
from csbats.core.gf import identity, mat_mul
from csbats.graphs.tanner import TannerGraph


class TestChannelConfig:
    """Validation and dict round trips."""

    def test_defaults(self):
        cfg = ChannelConfig()
        assert (cfg.hops, cfg.loss, cfg.M, cfg.recode) == (1, 0.0, 16, True)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ChannelConfig(hops=0)
        with pytest.raises(ValueError):
            ChannelConfig(loss=1.5)
        with pytest.raises(ValueError):
            ChannelConfig(M=0)
        with pytest.raises(ValueError):
            ChannelConfig(coefficient_mode="sparse")

    def test_dict_roundtrip(self):
        cfg = ChannelConfig(hops=4, loss=0.2, M=8, recode=False)
        assert ChannelConfig.from_dict(cfg.to_dict()) == cfg


class TestTransmit:
    """Erasures and recoding along a line network."""

    def test_lossless_single_hop_is_identity(self):
        b = transmit(probe_batch(8), ChannelConfig(M=8), seed=0)
        assert np.array_equal(b.coeff, identity(8))

    def test_total_loss_leaves_nothing(self):
        b = transmit(probe_batch(8), ChannelConfig(hops=3, loss=1.0, M=8), seed=0)
        assert b.rank() == 0

    def test_recoded_batch_stays_consistent(self):
        """Received payload equals source symbols times received coefficients."""
        src = SourceBlock.random(6, 3, seed=4)
        batch = encode(src, TannerGraph(np.ones((1, 6), dtype=bool)), 8, seed=5)[0]
        out = transmit(batch, ChannelConfig(hops=4, loss=0.25, M=8), seed=6)
        assert np.array_equal(mat_mul(src.select(out.variable_indices), out.coeff), out.payload)

    def test_wrong_packet_count(self):
        with pytest.raises(ValueError):
            transmit(probe_batch(4), ChannelConfig(M=8))


class TestRankDistribution:
    """Empirical rank distributions."""

    def test_single_hop_rank_is_binomial(self):
        """Without recoding the rank counts surviving packets."""
        h = estimate_rank_distribution(ChannelConfig(hops=1, loss=0.2, M=16), 4000, seed=1)
        assert h.mean() == pytest.approx(16 * 0.8, abs=0.1)

    def test_no_recoding_compounds_loss(self):
        """Packets must survive every link when nodes only forward."""
        cfg = ChannelConfig(hops=3, loss=0.1, M=16, recode=False)
        h = estimate_rank_distribution(cfg, 4000, seed=2)
        assert h.mean() == pytest.approx(16 * 0.9**3, abs=0.1)

    def test_lossless_recoding_keeps_full_rank(self):
        h = estimate_rank_distribution(ChannelConfig(hops=3, loss=0.0, M=16), 300, seed=3)
        assert h.mean() > 15.9

    def test_rank_decreases_with_hops(self):
        sweep = rank_distribution_sweep(16, 0.2, range(1, 5), 2000, seed=4)
        means = [sweep[n].mean() for n in range(1, 5)]
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_total_loss_distribution(self):
        h = estimate_rank_distribution(ChannelConfig(loss=1.0, M=4), 50, seed=0)
        assert h == RankDistribution([1, 0, 0, 0, 0])

    def test_line_roundtrip(self):
        h = RankDistribution.from_counts([1, 2, 3, 4])
        assert RankDistribution.from_line(h.to_line()) == h
        assert h.M == 3
        assert h.cdf()[-1] == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            RankDistribution([1.0])
        with pytest.raises(ValueError):
            RankDistribution([0.5, 0.6])
        with pytest.raises(ValueError):
            RankDistribution.from_counts([0, 0])
        with pytest.raises(ValueError):
            RankDistribution.from_line("0.5 x")
        with pytest.raises(ValueError):
            estimate_rank_distribution(ChannelConfig(), 0)
