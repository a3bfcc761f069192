"""Correlation statistics of Bernoulli decodability indicators."""

import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Tuple, Union

import numpy as np
from scipy import stats

from csbats.analysis.trace import IndicatorTrace, check_indices
from csbats.core.seeding import SeedLike, as_rng

# Two-sided coverage of a 3-sigma normal interval
THREE_SIGMA = 0.9973


class NegativeCorrelationWarning(UserWarning):
    """Two check-node indicators are negatively correlated beyond sampling noise."""

    pass


class _NotApplicable:
    """Result of a statistic that is undefined for the given samples."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "NotApplicable"


NotApplicable = _NotApplicable()

Correlation = Union[float, _NotApplicable]


def pearson(x: Any, y: Any) -> Correlation:
    """Sample Pearson correlation of two equally long indicator series.

    Returns:
        The correlation in ``[-1, 1]``, or ``NotApplicable`` when either
        series is constant.

    Raises:
        ValueError: If the lengths differ or are below 2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"Series must be 1-D and equally long, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError(f"Need at least 2 samples, got {x.size}")
    var_x = x.var()
    var_y = y.var()
    if var_x == 0.0 or var_y == 0.0:
        return NotApplicable
    cov = (x * y).mean() - x.mean() * y.mean()
    return float(np.clip(cov / math.sqrt(var_x * var_y), -1.0, 1.0))


def wilson_interval(
    successes: int, n: int, confidence: float = 0.95
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Raises:
        ValueError: If ``n < 1`` or ``successes`` is outside ``[0, n]``.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must lie in [0, {n}], got {successes!r}")
    ci = stats.binomtest(int(successes), int(n)).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    return float(ci.low), float(ci.high)


def expected_v(alpha1: float, alpha2: float, rho: float) -> float:
    """``P(V = 1)`` for a variable node with two check nodes of correlation ``rho``.

    Example:
        >>> expected_v(0.5, 0.5, 0.5)
        0.625

    Raises:
        ValueError: If an alpha is outside ``(0, 1]`` or ``rho`` outside ``[0, 1]``.
    """
    for name, alpha in (("alpha1", alpha1), ("alpha2", alpha2)):
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1], got {alpha!r}")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho!r}")
    spread = math.sqrt(alpha1 * (1 - alpha1) * alpha2 * (1 - alpha2))
    return alpha1 + alpha2 - alpha1 * alpha2 - rho * spread


def coupled_bernoulli(
    alpha1: float, alpha2: float, rho: float, T: int, seed: SeedLike = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw ``T`` pairs of Bernoulli variables with given means and correlation.

    Raises:
        ValueError: If no joint distribution has these marginals and ``rho``.
    """
    spread = math.sqrt(alpha1 * (1 - alpha1) * alpha2 * (1 - alpha2))
    p11 = alpha1 * alpha2 + rho * spread
    p10 = alpha1 - p11
    p01 = alpha2 - p11
    p00 = 1.0 - p11 - p10 - p01
    joint = np.array([p00, p01, p10, p11])
    if np.any(joint < -1e-12):
        raise ValueError(
            f"No Bernoulli pair has means ({alpha1!r}, {alpha2!r}) and rho={rho!r}"
        )
    joint = np.clip(joint, 0.0, None)
    outcome = as_rng(seed).choice(4, size=T, p=joint / joint.sum())
    return outcome >= 2, outcome % 2 == 1


@dataclass
class Heatmap:
    """Joint frequencies of ``(C_i, C_j)``; ``counts[a, b]`` counts ``C_i=a, C_j=b``."""

    i: int
    j: int
    counts: np.ndarray
    rho: Correlation

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "i": self.i,
            "j": self.j,
            "n00": int(self.counts[0, 0]),
            "n01": int(self.counts[0, 1]),
            "n10": int(self.counts[1, 0]),
            "n11": int(self.counts[1, 1]),
            "rho": "NA" if self.rho is NotApplicable else self.rho,
        }


def correlation_heatmap(trace: IndicatorTrace, i: int, j: int) -> Heatmap:
    """2x2 joint table of two check-node indicators plus their correlation.

    A correlation below ``-3 / sqrt(T)`` is not physically meaningful for
    decodability indicators and raises a ``NegativeCorrelationWarning``.
    """
    i, j = check_indices((i, j), trace.N, "check node")
    a = trace.cn[:, i].astype(int)
    b = trace.cn[:, j].astype(int)
    counts = np.zeros((2, 2), dtype=int)
    np.add.at(counts, (a, b), 1)
    rho = pearson(a, b) if trace.trials >= 2 else NotApplicable
    if rho is not NotApplicable and rho < -3.0 / math.sqrt(trace.trials):
        warnings.warn(
            f"Check nodes {i} and {j} are negatively correlated (rho={rho:.3f})",
            NegativeCorrelationWarning,
            stacklevel=2,
        )
    return Heatmap(i, j, counts, rho)
