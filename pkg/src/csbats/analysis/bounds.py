"""Statistical checks of the variable-node decodability bounds.

For a variable node with check nodes ``C_1..C_n``::

    1 - min_i P(C_i = 0)  <=  P(V = 1)  <=  1 - prod_i P(C_i = 0)

and a check node is at least as likely to fail once others are known to
have failed: ``P(C_i = 0) <= P(C_i = 0 | C_j = 0, j in J)``. Both are
checked on empirical traces with Wilson intervals at 3-sigma coverage.
"""

import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from csbats.analysis.dependence import THREE_SIGMA, Correlation, pearson, wilson_interval
from csbats.analysis.trace import IndicatorTrace, check_indices, collect_trace
from csbats.channel.network import ChannelConfig
from csbats.graphs.tanner import TannerGraph

SATISFIED = "satisfied"
VIOLATED = "violated"
INSUFFICIENT = "insufficient"

# Conditioning events rarer than this are reported instead of estimated
MIN_CONDITIONING_EVENTS = 100


class BoundViolationWarning(UserWarning):
    """An empirical probability falls outside a bound beyond its interval."""

    pass


class InactivationTraceWarning(UserWarning):
    """Bounds are checked on a trace not produced by belief propagation."""

    pass


Interval = Tuple[float, float]


@dataclass
class BoundReport:
    """Empirical ``P(V=1)`` against its lower and upper bounds."""

    vn_index: int
    neighbors: List[int]
    trials: int
    p_v: float
    p_v_ci: Interval
    lower: float
    lower_ci: Interval
    upper: float
    upper_ci: Interval
    verdict: str
    caveat: Optional[str] = None

    @property
    def satisfied(self) -> bool:
        return self.verdict == SATISFIED

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["neighbors"] = " ".join(str(n) for n in self.neighbors)
        for key in ("p_v_ci", "lower_ci", "upper_ci"):
            low, high = data.pop(key)
            data[f"{key}_low"] = low
            data[f"{key}_high"] = high
        data["caveat"] = self.caveat or ""
        return data


@dataclass
class ConditionalReport:
    """``P(C_i = 0)`` against ``P(C_i = 0 | C_j = 0 for j in J)``."""

    i: int
    J: List[int] = field(default_factory=list)
    trials: int = 0
    events: int = 0
    p_uncond: float = 0.0
    uncond_ci: Interval = (0.0, 1.0)
    p_cond: Optional[float] = None
    cond_ci: Optional[Interval] = None
    verdict: str = INSUFFICIENT

    def to_dict(self) -> Dict[str, Any]:
        return {
            "i": self.i,
            "J": " ".join(str(j) for j in self.J),
            "trials": self.trials,
            "events": self.events,
            "p_uncond": self.p_uncond,
            "uncond_ci_low": self.uncond_ci[0],
            "uncond_ci_high": self.uncond_ci[1],
            "p_cond": "" if self.p_cond is None else self.p_cond,
            "cond_ci_low": "" if self.cond_ci is None else self.cond_ci[0],
            "cond_ci_high": "" if self.cond_ci is None else self.cond_ci[1],
            "verdict": self.verdict,
        }


def _non_bp_caveat(trace: IndicatorTrace) -> Optional[str]:
    if trace.decoder in (None, "bp"):
        return None
    warnings.warn(
        f"Bounds assume belief-propagation traces; this trace used {trace.decoder!r}",
        InactivationTraceWarning,
        stacklevel=3,
    )
    return f"{trace.decoder} decoding recovers variables outside the bound's premise"


def theorem1_check(
    trace: IndicatorTrace, vn_index: int, confidence: float = THREE_SIGMA
) -> BoundReport:
    """Compare ``P(V=1)`` of one variable with the bounds from its check nodes.

    Raises:
        ValueError: If the variable has no neighboring check node.
    """
    (k,) = check_indices((vn_index,), trace.K, "variable node")
    neighbors = trace.neighbors(k)
    if not neighbors:
        raise ValueError(f"Variable node {k} has no neighboring check node")
    caveat = _non_bp_caveat(trace)
    T = trace.trials

    v_hits = int(np.count_nonzero(trace.vn[:, k]))
    p_v = v_hits / T
    p_v_ci = wilson_interval(v_hits, T, confidence)

    hits = trace.cn[:, neighbors].sum(axis=0).astype(int)
    alphas = hits / T
    cis = [wilson_interval(int(h), T, confidence) for h in hits]
    best = int(np.argmax(alphas))
    lower = float(alphas[best])
    lower_ci = cis[best]
    upper = float(1.0 - np.prod(1.0 - alphas))
    upper_ci = (
        float(1.0 - np.prod([1.0 - lo for lo, _ in cis])),
        float(1.0 - np.prod([1.0 - hi for _, hi in cis])),
    )

    violated = p_v_ci[1] < lower_ci[0] or p_v_ci[0] > upper_ci[1]
    verdict = VIOLATED if violated else SATISFIED
    if violated:
        warnings.warn(
            f"Variable node {k}: P(V=1)={p_v:.4f} outside [{lower:.4f}, {upper:.4f}]",
            BoundViolationWarning,
            stacklevel=2,
        )
    return BoundReport(
        vn_index=k,
        neighbors=neighbors,
        trials=T,
        p_v=p_v,
        p_v_ci=p_v_ci,
        lower=lower,
        lower_ci=lower_ci,
        upper=upper,
        upper_ci=upper_ci,
        verdict=verdict,
        caveat=caveat,
    )


def lemma1_check(
    trace: IndicatorTrace,
    i: int,
    J: Sequence[int],
    confidence: float = THREE_SIGMA,
    min_events: int = MIN_CONDITIONING_EVENTS,
) -> ConditionalReport:
    """Check that conditioning on other failures cannot make ``C_i`` likelier to succeed.

    A conditioning event seen fewer than ``min_events`` times yields an
    ``"insufficient"`` verdict with no conditional estimate.

    Raises:
        ValueError: If ``i`` is in ``J`` or an index is out of range.
    """
    (i,) = check_indices((i,), trace.N, "check node")
    J = check_indices(J, trace.N, "check node")
    if i in J:
        raise ValueError(f"Check node {i} cannot condition on itself")
    T = trace.trials
    fail_i = ~trace.cn[:, i]
    uncond_hits = int(np.count_nonzero(fail_i))
    report = ConditionalReport(
        i=i,
        J=list(J),
        trials=T,
        p_uncond=uncond_hits / T,
        uncond_ci=wilson_interval(uncond_hits, T, confidence),
    )
    if J:
        event = ~trace.cn[:, J].any(axis=1)
    else:
        event = np.ones(T, dtype=bool)
    report.events = int(np.count_nonzero(event))
    if report.events < min_events:
        return report

    cond_hits = int(np.count_nonzero(fail_i & event))
    report.p_cond = cond_hits / report.events
    report.cond_ci = wilson_interval(cond_hits, report.events, confidence)
    if report.uncond_ci[0] > report.cond_ci[1]:
        report.verdict = VIOLATED
        warnings.warn(
            f"Check node {i}: P(C=0)={report.p_uncond:.4f} exceeds "
            f"P(C=0 | J failed)={report.p_cond:.4f}",
            BoundViolationWarning,
            stacklevel=2,
        )
    else:
        report.verdict = SATISFIED
    return report


def check_all_variables(
    trace: IndicatorTrace, confidence: float = THREE_SIGMA
) -> List[BoundReport]:
    """:func:`theorem1_check` for every variable that has a neighbor."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundViolationWarning)
        return [
            theorem1_check(trace, k, confidence)
            for k in range(trace.K)
            if trace.neighbors(k)
        ]


@dataclass
class StructureReport:
    """Decodability of variable 0 when its two check nodes form a tree or a cycle."""

    structure: str
    p_v: float
    p_v_ci: Interval
    alpha1: float
    alpha2: float
    rho: Correlation

    def to_dict(self) -> Dict[str, Any]:
        return {
            "structure": self.structure,
            "p_v": self.p_v,
            "p_v_ci_low": self.p_v_ci[0],
            "p_v_ci_high": self.p_v_ci[1],
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "rho": "NA" if not isinstance(self.rho, float) else self.rho,
        }


def structure_graphs(degree: int) -> Dict[str, TannerGraph]:
    """Two check nodes sharing variable 0 only (tree) or every variable (cycle).

    Both graphs have ``K = 2 * degree - 1`` so the runs are comparable.
    """
    if degree < 2:
        raise ValueError(f"degree must be at least 2, got {degree!r}")
    K = 2 * degree - 1
    tree = np.zeros((2, K), dtype=bool)
    tree[0, :degree] = True
    tree[1, 0] = True
    tree[1, degree:] = True
    cycle = np.zeros((2, K), dtype=bool)
    cycle[:, :degree] = True
    return {"tree": TannerGraph(tree), "cycle": TannerGraph(cycle)}


def tree_vs_cycle(
    cfg: ChannelConfig,
    trials: int,
    seed: int = 0,
    degree: Optional[int] = None,
) -> Dict[str, StructureReport]:
    """Compare a tree-shaped neighborhood of a variable node with a fully shared one.

    Args:
        cfg: Channel for both check nodes.
        trials: Runs per structure.
        seed: Master seed; both structures use the same stream addresses.
        degree: Check-node degree, ``cfg.M // 2 + 1`` by default.
    """
    degree = cfg.M // 2 + 1 if degree is None else degree
    reports = {}
    for name, graph in structure_graphs(degree).items():
        trace = collect_trace(graph, cfg, "bp", trials, seed)
        hits = int(np.count_nonzero(trace.vn[:, 0]))
        alphas = trace.alpha()
        rho = pearson(trace.cn[:, 0], trace.cn[:, 1])
        reports[name] = StructureReport(
            structure=name,
            p_v=hits / trials,
            p_v_ci=wilson_interval(hits, trials),
            alpha1=float(alphas[0]),
            alpha2=float(alphas[1]),
            rho=rho,
        )
    return reports
