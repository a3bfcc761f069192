import math

import numpy as np
import pytest

from csbats.channel.network import RankDistribution
from csbats.optimize.degree import (
    InfeasibleProblem,
    OptProblem,
    batch_omega,
    batch_omega_coefficients,
    constant_omega,
    constraint_matrix,
    linear_omega,
    optimize,
    zeta,
)

H4 = RankDistribution([0.05, 0.1, 0.15, 0.3, 0.4])


class TestOmega:
    """Building blocks of the BP constraint."""

    def test_zeta_edges(self):
        """No vectors are always independent; more vectors than the rank never are."""
        assert zeta(0, 3) == 1.0
        assert zeta(4, 3) == 0.0
        assert zeta(1, 1) == pytest.approx(255 / 256)

    def test_coefficients_match_direct_sum(self):
        """Vectorized coefficients equal the textbook double sum."""
        x = 0.37
        coefficients = batch_omega_coefficients(x, 6, H4)
        for d in range(1, 7):
            total = 0.0
            for i in range(min(d, H4.M)):
                g = sum(H4.probs[r] * zeta(i + 1, r) for r in range(i + 1, H4.M + 1))
                total += math.comb(d - 1, i) * x ** (d - 1 - i) * (1 - x) ** i * g
            assert coefficients[d - 1] == pytest.approx(d * total, rel=1e-12)

    def test_batch_omega_is_linear(self):
        psi = np.array([0.2, 0.0, 0.5, 0.3])
        expected = float(np.dot(batch_omega_coefficients(0.5, 4, H4), psi))
        assert batch_omega(0.5, psi, H4) == pytest.approx(expected)


class TestOptimize:
    """The linear program in (psi, theta)."""

    def test_constant_omega_rate(self):
        """A constant omega c gives theta = c / -ln(1 - eta)."""
        p = OptProblem(h=H4, K=5, M=4, grid=33, omega=constant_omega(0.7))
        _, theta = optimize(p)
        assert theta == pytest.approx(0.7 / -math.log(1 - p.eta), rel=1e-6)

    def test_single_source_symbol(self):
        """With K=1 the only choice is degree 1 and theta is g_0 / -ln(1 - eta)."""
        p = OptProblem(h=H4, K=1, M=4, grid=17)
        psi, theta = optimize(p)
        assert psi.degrees() == [1]
        g0 = sum(H4.probs[r] * zeta(1, r) for r in range(1, 5))
        assert theta == pytest.approx(g0 / -math.log(1 - p.eta), rel=1e-6)

    def test_three_degree_brute_force(self):
        """The LP optimum is at least as good as any point of a fine simplex grid."""
        p = OptProblem(
            h=H4,
            K=3,
            M=4,
            grid=40,
            omega=linear_omega(lambda x: [1.0 - x, 0.6, 0.3 + 0.9 * x]),
        )
        psi, theta = optimize(p)
        rows, logs = constraint_matrix(p)
        step = 0.005
        grid = np.arange(0.0, 1.0 + step / 2, step)
        a, b = np.meshgrid(grid, grid)
        keep = a + b <= 1.0 + 1e-12
        simplex = np.stack([a[keep], b[keep], np.clip(1.0 - a[keep] - b[keep], 0, None)], axis=1)
        values = simplex @ rows.T
        interior = logs < 0
        feasible = values[:, ~interior].min(axis=1) >= 0
        rates = (values[:, interior] / -logs[interior]).min(axis=1)
        best = rates[feasible].max()
        assert best <= theta + 1e-7
        assert best >= theta - 0.03
        full = np.zeros(3)
        full[: psi.max_degree] = psi.masses
        achieved = ((rows @ full)[interior] / -logs[interior]).min()
        assert achieved == pytest.approx(theta, abs=1e-6)

    def test_finer_grid_never_raises_theta(self):
        """Refining a nested constraint grid can only lower theta."""
        coarse = OptProblem(h=H4, K=12, M=4, grid=9)
        fine = OptProblem(h=H4, K=12, M=4, grid=17)
        _, theta_coarse = optimize(coarse)
        _, theta_fine = optimize(fine)
        assert theta_fine <= theta_coarse + 1e-7
        assert theta_fine > 0

    def test_max_degree_caps_support(self):
        psi, _ = optimize(OptProblem(h=H4, K=12, M=4, grid=9, max_degree=3))
        assert psi.max_degree <= 3

    def test_all_batches_lost_is_infeasible(self):
        """h_0 == 1 leaves no positive rate."""
        h = RankDistribution([1.0, 0.0, 0.0])
        with pytest.raises(InfeasibleProblem):
            optimize(OptProblem(h=h, K=4, M=2, grid=9))

    def test_problem_validation(self):
        with pytest.raises(ValueError):
            OptProblem(h=H4, K=4, M=4, eta=1.0)
        with pytest.raises(ValueError):
            OptProblem(h=H4, K=4, M=3)
        with pytest.raises(ValueError):
            OptProblem(h=H4, K=4, M=4, grid=1)
        with pytest.raises(ValueError):
            OptProblem(h=H4, K=4, M=4, max_degree=5)
