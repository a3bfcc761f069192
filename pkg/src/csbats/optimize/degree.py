"""Degree-distribution optimization as a linear program in ``(psi, theta)``.

Maximize ``theta`` subject to ``omega(x, psi, h) + theta * ln(1 - x) >= 0``
on a uniform grid of ``x`` in ``[0, eta]``, with ``psi`` on the probability
simplex. ``omega`` must be linear in ``psi`` for fixed ``x`` and ``h``.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize as sp_optimize
from scipy import stats

from csbats.channel.network import RankDistribution
from csbats.core.gf import FIELD_ORDER
from csbats.graphs.distribution import DegreeDistribution

DEFAULT_ETA = 0.98
DEFAULT_GRID = 512

# Masses below this after solving are treated as solver noise
MASS_FLOOR = 1e-12

# (x, dense psi with psi[d - 1] = mass of degree d, h) -> real
OmegaEvaluator = Callable[[float, np.ndarray, RankDistribution], float]


class InfeasibleProblem(ValueError):
    """Raised when no distribution achieves a positive rate."""

    pass


def zeta(k: int, r: int, q: int = FIELD_ORDER) -> float:
    """Probability that ``k`` uniform vectors in a rank-``r`` space are independent."""
    prob = 1.0
    for j in range(k):
        prob *= 1.0 - float(q) ** (j - r)
    return prob


def _rank_weights(h: RankDistribution, q: int = FIELD_ORDER) -> np.ndarray:
    """``g_i = sum_{r > i} h_r * zeta(i + 1, r)`` for ``i = 0..M-1``."""
    M = h.M
    return np.array(
        [
            sum(h.probs[r] * zeta(i + 1, r, q) for r in range(i + 1, M + 1))
            for i in range(M)
        ]
    )


def batch_omega_coefficients(
    x: float, max_degree: int, h: RankDistribution, q: int = FIELD_ORDER
) -> np.ndarray:
    """Per-degree coefficients of :func:`batch_omega` at ``x``.

    Entry ``d - 1`` is ``d * sum_i Binom(i; d-1, 1-x) * g_i`` over
    ``i < min(d, M)``.
    """
    g = _rank_weights(h, q)
    d = np.arange(1, max_degree + 1)
    i = np.arange(h.M)
    # pmf vanishes for i > d - 1, which enforces i < min(d, M)
    pmf = stats.binom.pmf(i[np.newaxis, :], (d - 1)[:, np.newaxis], 1.0 - x)
    return d * (pmf @ g)


def batch_omega(x: float, psi: np.ndarray, h: RankDistribution) -> float:
    """The standard BATS ``omega`` for BP decoding with rank distribution ``h``.

    ``omega(x) = sum_d psi_d * d * sum_{i<min(d,M)} C(d-1, i) x^(d-1-i)
    (1-x)^i * sum_{r>i} h_r * zeta(i + 1, r)``. This form is taken from the
    BATS literature rather than derived here.
    """
    psi = np.asarray(psi, dtype=float)
    return float(np.dot(batch_omega_coefficients(x, psi.size, h), psi))


batch_omega.coefficients = batch_omega_coefficients  # type: ignore[attr-defined]


def constant_omega(c: float) -> OmegaEvaluator:
    """``omega == c`` on the simplex (written ``c * sum(psi)`` to stay linear)."""

    def omega(x: float, psi: np.ndarray, h: RankDistribution) -> float:
        return c * float(np.sum(psi))

    return omega


def linear_omega(weights: Callable[[float], Sequence[float]]) -> OmegaEvaluator:
    """``omega = dot(weights(x), psi)`` for a caller-supplied weight curve."""

    def omega(x: float, psi: np.ndarray, h: RankDistribution) -> float:
        w = np.asarray(weights(x), dtype=float)
        psi = np.asarray(psi, dtype=float)
        return float(np.dot(w[: psi.size], psi))

    return omega


def omega_coefficients(
    omega: OmegaEvaluator, x: float, max_degree: int, h: RankDistribution
) -> np.ndarray:
    """Column vector of ``omega`` at ``x``: its value on each unit distribution."""
    direct = getattr(omega, "coefficients", None)
    if direct is not None:
        return np.asarray(direct(x, max_degree, h), dtype=float)
    unit = np.eye(max_degree)
    return np.array([omega(x, unit[d], h) for d in range(max_degree)])


@dataclass
class OptProblem:
    """Inputs of the degree-distribution LP.

    Attributes:
        h: End-to-end rank distribution.
        K: Number of source symbols.
        M: Batch size; must match ``h.M``.
        eta: Right end of the constraint range, in ``(0, 1)``.
        grid: Number of uniformly spaced constraint points on ``[0, eta]``.
        omega: Evaluator linear in ``psi``.
        max_degree: Largest degree allowed in ``psi`` (``K`` when None).
    """

    h: RankDistribution
    K: int
    M: int
    eta: float = DEFAULT_ETA
    grid: int = DEFAULT_GRID
    omega: OmegaEvaluator = batch_omega
    max_degree: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta!r}")
        if self.grid < 2:
            raise ValueError(f"grid must be at least 2, got {self.grid!r}")
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K!r}")
        if self.M != self.h.M:
            raise ValueError(
                f"M={self.M} does not match the rank distribution's M={self.h.M}"
            )
        if self.max_degree is not None and not 1 <= self.max_degree <= self.K:
            raise ValueError(f"max_degree must lie in [1, {self.K}], got {self.max_degree!r}")

    @property
    def degree_cap(self) -> int:
        return self.K if self.max_degree is None else self.max_degree

    def points(self) -> np.ndarray:
        return np.linspace(0.0, self.eta, self.grid)


def constraint_matrix(p: OptProblem) -> Tuple[np.ndarray, np.ndarray]:
    """Rows of ``omega`` coefficients and the matching ``ln(1 - x)`` values."""
    xs = p.points()
    rows = np.array([omega_coefficients(p.omega, float(x), p.degree_cap, p.h) for x in xs])
    return rows, np.log1p(-xs)


def optimize(p: OptProblem) -> Tuple[DegreeDistribution, float]:
    """Solve the LP with the HiGHS solver.

    Returns:
        The optimal distribution (projected onto the simplex) and ``theta``.

    Raises:
        InfeasibleProblem: If the solver finds no solution or the best
            achievable ``theta`` is not positive (for example ``h_0 == 1``).
    """
    omega_rows, logs = constraint_matrix(p)
    D = p.degree_cap
    # linprog minimizes and wants A_ub @ z <= b_ub with z = (psi, theta)
    cost = np.zeros(D + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-omega_rows, -logs[:, np.newaxis]])
    b_ub = np.zeros(len(logs))
    a_eq = np.hstack([np.ones((1, D)), np.zeros((1, 1))])
    bounds = [(0.0, None)] * D + [(None, None)]
    res = sp_optimize.linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=bounds,
        method="highs",
    )
    if res.status != 0:
        raise InfeasibleProblem(f"Degree optimization failed: {res.message}")
    theta = float(-res.fun)
    if theta <= 0.0 or not math.isfinite(theta):
        raise InfeasibleProblem(f"No positive rate is achievable (theta={theta!r})")

    masses = np.clip(res.x[:D], 0.0, None)
    masses[masses < MASS_FLOOR] = 0.0
    masses = masses / masses.sum()
    psi = DegreeDistribution(masses)
    # Re-evaluate theta on the projected distribution so every constraint holds
    values = omega_rows[:, : psi.max_degree] @ psi.masses
    interior = logs < 0
    if np.any(interior):
        theta = min(theta, float(np.min(values[interior] / -logs[interior])))
    return psi, theta
