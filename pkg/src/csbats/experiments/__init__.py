from .config import (
    CONSTRUCTIONS,
    TABLE2_ARMS,
    ExperimentConfig,
    format_config,
    load_config,
    parse_config,
    parse_range,
)
from .plotdata import emit_plotdata, parse_plotdata
from .runner import (
    ResultRow,
    build_graph,
    parse_results_csv,
    run_experiment,
    run_point,
    run_table2,
    write_results,
)

__all__ = [
    # Configuration
    "CONSTRUCTIONS",
    "TABLE2_ARMS",
    "ExperimentConfig",
    "format_config",
    "load_config",
    "parse_config",
    "parse_range",
    # Sweeps
    "ResultRow",
    "build_graph",
    "parse_results_csv",
    "run_experiment",
    "run_point",
    "run_table2",
    "write_results",
    # Plot data
    "emit_plotdata",
    "parse_plotdata",
]
