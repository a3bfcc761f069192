from .network import (
    ChannelConfig,
    RankDistribution,
    estimate_rank_distribution,
    probe_batch,
    rank_distribution_sweep,
    transmit,
)

__all__ = [
    "ChannelConfig",
    "RankDistribution",
    "estimate_rank_distribution",
    "probe_batch",
    "rank_distribution_sweep",
    "transmit",
]
