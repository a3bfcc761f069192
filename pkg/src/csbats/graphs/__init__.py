from .distribution import (
    DegreeDistribution,
    DistributionError,
    load_distribution,
    save_distribution,
    truncate_top_m,
)
from .base import (
    CS7_DEGREES,
    CS8_DEGREES,
    BaseGraph,
    GraphFormatError,
    derive_row_degrees,
    design_base_graph,
    expansion_balance,
    load_base_graph,
    preset_base_graph,
    random_base_graph,
    save_base_graph,
    search_base_graph,
)
from .tanner import (
    GraphMetrics,
    Provenance,
    TannerGraph,
    complexity_report,
    expand_cs,
    graph_metrics,
    random_tanner,
)

__all__ = [
    "DegreeDistribution",
    "DistributionError",
    "load_distribution",
    "save_distribution",
    "truncate_top_m",
    "CS7_DEGREES",
    "CS8_DEGREES",
    "BaseGraph",
    "GraphFormatError",
    "derive_row_degrees",
    "design_base_graph",
    "expansion_balance",
    "load_base_graph",
    "preset_base_graph",
    "random_base_graph",
    "save_base_graph",
    "search_base_graph",
    "GraphMetrics",
    "Provenance",
    "TannerGraph",
    "complexity_report",
    "expand_cs",
    "graph_metrics",
    "random_tanner",
]
