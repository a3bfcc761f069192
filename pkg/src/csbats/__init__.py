from .analysis import (
    IndicatorTrace,
    check_all_variables,
    collect_trace,
    correlation_heatmap,
    lemma1_check,
    pearson,
    theorem1_check,
    tree_vs_cycle,
)
from .channel import ChannelConfig, RankDistribution, estimate_rank_distribution, transmit
from .codec import (
    Batch,
    DecodeResult,
    MissingLayerError,
    SourceBlock,
    bp_decode,
    encode,
    inactivation_decode,
    layered_decode,
    recode,
)
from .core import GF256, derive_rng
from .experiments import ExperimentConfig, run_experiment, run_table2
from .graphs import (
    BaseGraph,
    DegreeDistribution,
    TannerGraph,
    design_base_graph,
    expand_cs,
    preset_base_graph,
    random_tanner,
)
from .optimize import InfeasibleProblem, OptProblem, optimize
from .simulation import run_trial

__version__ = "0.4.0"

__all__ = [
    # Field and randomness
    "GF256",
    "derive_rng",
    # Graphs
    "BaseGraph",
    "DegreeDistribution",
    "TannerGraph",
    "design_base_graph",
    "expand_cs",
    "preset_base_graph",
    "random_tanner",
    # Encoding and decoding
    "Batch",
    "DecodeResult",
    "MissingLayerError",
    "SourceBlock",
    "bp_decode",
    "encode",
    "inactivation_decode",
    "layered_decode",
    "recode",
    # Channel
    "ChannelConfig",
    "RankDistribution",
    "estimate_rank_distribution",
    "transmit",
    # Degree optimization
    "InfeasibleProblem",
    "OptProblem",
    "optimize",
    # Experiments
    "ExperimentConfig",
    "run_experiment",
    "run_table2",
    "run_trial",
    # Dependence analysis
    "IndicatorTrace",
    "check_all_variables",
    "collect_trace",
    "correlation_heatmap",
    "lemma1_check",
    "pearson",
    "theorem1_check",
    "tree_vs_cycle",
]
