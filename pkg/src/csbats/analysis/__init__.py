from .bounds import (
    BoundReport,
    BoundViolationWarning,
    ConditionalReport,
    InactivationTraceWarning,
    StructureReport,
    check_all_variables,
    lemma1_check,
    structure_graphs,
    theorem1_check,
    tree_vs_cycle,
)
from .dependence import (
    Heatmap,
    NegativeCorrelationWarning,
    NotApplicable,
    correlation_heatmap,
    coupled_bernoulli,
    expected_v,
    pearson,
    wilson_interval,
)
from .report import write_report_csv
from .trace import (
    IndicatorTrace,
    collect_trace,
    indicator_identity_violations,
    load_trace,
    save_trace,
)

__all__ = [
    # Traces
    "IndicatorTrace",
    "collect_trace",
    "indicator_identity_violations",
    "load_trace",
    "save_trace",
    # Correlation
    "Heatmap",
    "NotApplicable",
    "correlation_heatmap",
    "coupled_bernoulli",
    "expected_v",
    "pearson",
    "wilson_interval",
    # Bounds
    "BoundReport",
    "ConditionalReport",
    "StructureReport",
    "check_all_variables",
    "lemma1_check",
    "structure_graphs",
    "theorem1_check",
    "tree_vs_cycle",
    # Reports
    "write_report_csv",
    # Warnings
    "BoundViolationWarning",
    "InactivationTraceWarning",
    "NegativeCorrelationWarning",
]
