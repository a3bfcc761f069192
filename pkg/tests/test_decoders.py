import numpy as np
import pytest

from csbats.channel.network import ChannelConfig
from csbats.codec.batch import Batch, decodable, encode, substitute
from csbats.codec.decoder import (
    MissingLayerError,
    bp_decode,
    inactivation_decode,
    layered_decode,
)
from csbats.core.gf import GF256, as_matrix, mat_mul, rank, solve
from csbats.graphs.base import BaseGraph
from csbats.graphs.distribution import DegreeDistribution
from csbats.graphs.tanner import expand_cs, random_tanner
from csbats.simulation import decode, received_batches, run_trial, trial_source

LOSSY = ChannelConfig(hops=2, loss=0.3, M=4)


def peeling_oracle(batches, K):
    """Textbook peeling: solve any decodable batch, substitute, repeat."""
    work = list(batches)
    known = {}
    progress = True
    while progress:
        progress = False
        for i, b in enumerate(work):
            if b is None or not decodable(b):
                continue
            if b.degree:
                values = solve(b.coeff.T, b.payload.T)
                for row, k in enumerate(b.variable_indices):
                    known[int(k)] = values[row]
            work[i] = None
            for j, other in enumerate(work):
                if other is None:
                    continue
                for k in [int(k) for k in other.variable_indices if int(k) in known]:
                    other = substitute(other, k, known[k])
                work[j] = other
            progress = True
    return known


def ge_determined(batches, K):
    """Variables fixed by joint Gaussian elimination over every received packet."""
    rows = []
    for b in batches:
        for j in range(b.received):
            eq = np.zeros(K, dtype=np.uint8)
            eq[b.variable_indices] = np.asarray(b.coeff[:, j])
            rows.append(eq)
    if not rows:
        return set()
    a = as_matrix(np.array(rows))
    base_rank = rank(a)
    determined = set()
    for k in range(K):
        unit = np.zeros((1, K), dtype=np.uint8)
        unit[0, k] = 1
        if rank(np.concatenate((a, GF256(unit)))) == base_rank:
            determined.add(k)
    return determined


def lossy_trials(K=12, N=9, degree=4, count=12):
    t = random_tanner(DegreeDistribution.point(degree), K, N, seed=21)
    for repeat in range(count):
        src = trial_source(K, 2, 5, 0, repeat)
        yield t, src, received_batches(t, LOSSY, 5, 0, repeat, pk=2)


def assert_symbols_match(result, src):
    for k in np.flatnonzero(result.decoded_mask):
        assert np.array_equal(result.decoded_symbols[:, k], src.symbol(k))


class TestBeliefPropagation:
    """Peeling decoder."""

    def test_no_batches(self):
        """Nothing received decodes nothing."""
        result = bp_decode([], 5)
        assert result.decoded_count == 0
        assert result.cn_indicator.shape == (0,)
        assert result.decoding_rate == 0.0

    def test_single_lossless_batch(self):
        """One batch with degree <= M recovers all of its symbols."""
        t = random_tanner(DegreeDistribution.point(3), 3, 1, seed=0)
        src = trial_source(3, 4, 1)
        batches = encode(src, t, 8, seed=2)
        result = bp_decode(batches, 3)
        assert result.decoded_count == 3
        assert result.cn_indicator.tolist() == [True]
        assert_symbols_match(result, src)

    def test_matches_peeling_oracle(self):
        """Decoded set and symbols agree with straightforward peeling."""
        for _, src, batches in lossy_trials():
            result = bp_decode(batches, 12)
            oracle = peeling_oracle(batches, 12)
            assert result.decoded_set() == frozenset(oracle)
            assert result.inactivation_count == 0
            assert_symbols_match(result, src)

    def test_order_independent(self):
        """Scanning batches in reverse decodes the same set."""
        for _, _, batches in lossy_trials(count=6):
            forward = bp_decode(batches, 12)
            backward = bp_decode(batches, 12, order=list(reversed(range(len(batches)))))
            assert forward.decoded_set() == backward.decoded_set()

    def test_order_must_be_permutation(self):
        _, _, batches = next(lossy_trials(count=1))
        with pytest.raises(ValueError):
            bp_decode(batches, 12, order=[0, 0, 1])

    def test_variable_out_of_range(self):
        _, _, batches = next(lossy_trials(count=1))
        with pytest.raises(ValueError):
            bp_decode(batches, 5)

    def test_indicator_identity(self):
        """A variable is recovered exactly when some neighboring batch is decodable."""
        for t, _, batches in lossy_trials():
            result = bp_decode(batches, 12)
            for k in range(12):
                neighbors = t.neighbors(k)
                expected = bool(result.cn_indicator[neighbors].any()) if neighbors.size else False
                assert bool(result.decoded_mask[k]) == expected


class TestInactivation:
    """BP with inactivation."""

    def test_two_unknowns_two_rank_one_batches(self):
        """Two rank-one batches on the same pair stall BP but not inactivation."""
        x = as_matrix([[17, 200]])
        batches = []
        for i, column in enumerate(([[1], [2]], [[1], [3]])):
            coeff = as_matrix(column)
            batches.append(
                Batch(
                    id=i,
                    variable_indices=[0, 1],
                    generator=coeff,
                    coeff=coeff,
                    payload=mat_mul(x, coeff),
                )
            )
        assert bp_decode(batches, 2).decoded_count == 0
        result = inactivation_decode(batches, 2)
        assert result.decoded_count == 2
        assert result.inactivation_count == 1
        assert result.decoded_symbols.tolist() == [[17, 200]]
        assert result.cn_indicator.tolist() == [True, True]

    def test_matches_gaussian_elimination(self):
        """Unlimited inactivation recovers exactly what joint elimination recovers."""
        for _, src, batches in lossy_trials():
            result = inactivation_decode(batches, 12)
            assert result.decoded_set() == frozenset(ge_determined(batches, 12))
            assert_symbols_match(result, src)

    def test_superset_of_bp(self):
        """Any budget decodes at least what BP decodes."""
        for _, _, batches in lossy_trials():
            bp = bp_decode(batches, 12).decoded_set()
            for budget in (0, 1, 3, None):
                assert bp <= inactivation_decode(batches, 12, max_pending=budget).decoded_set()

    def test_zero_budget_is_bp(self):
        for _, _, batches in lossy_trials(count=6):
            assert (
                inactivation_decode(batches, 12, max_pending=0).decoded_set()
                == bp_decode(batches, 12).decoded_set()
            )

    def test_lossless_small_degrees_need_no_inactivation(self):
        """Batches no larger than M on a clean channel peel without stalling."""
        base = BaseGraph.from_supports([[0, 1, 2], [3, 4]], 6)
        t = expand_cs(base, 6)
        result = run_trial(t, ChannelConfig(hops=1, loss=0.0, M=4), "inactivation", 3)
        assert result.decoded_count == 6
        assert result.inactivation_count == 0

    def test_negative_budget(self):
        with pytest.raises(ValueError):
            inactivation_decode([], 3, max_pending=-1)

    def test_peak_retains_everything_loaded(self):
        _, _, batches = next(lossy_trials(count=1))
        result = inactivation_decode(batches, 12)
        assert result.peak_retained_columns == sum(b.received for b in batches)


class TestLayered:
    """Layer-by-layer decoding of cyclic-shift graphs."""

    def layered_trials(self, count=8):
        base = BaseGraph.from_supports([[0, 1, 2, 5], [3, 6, 8], [4, 7, 9, 10, 11]], 12)
        t = expand_cs(base, 9)
        for repeat in range(count):
            src = trial_source(12, 2, 9, 0, repeat)
            yield t, src, received_batches(t, LOSSY, 9, 0, repeat, pk=2)

    def test_matches_unlimited_inactivation(self):
        """Consuming every layer recovers the same set as full inactivation."""
        for t, src, batches in self.layered_trials():
            layered = layered_decode(batches, 12, t.m)
            full = inactivation_decode(batches, 12)
            assert layered.decoded_set() == full.decoded_set()
            assert_symbols_match(layered, src)

    def test_peak_bounded_by_one_layer(self):
        """Finished layers release their packets."""
        for t, _, batches in self.layered_trials(count=4):
            result = layered_decode(batches, 12, t.m)
            assert result.peak_retained_columns <= t.m * LOSSY.M

    def test_missing_layer(self):
        _, _, batches = next(lossy_trials(count=1))
        with pytest.raises(MissingLayerError):
            layered_decode(batches, 12, 3)

    def test_overfull_layer(self):
        t, _, batches = next(self.layered_trials(count=1))
        with pytest.raises(ValueError):
            layered_decode(batches, 12, 2)

    def test_dispatch_rejects_random_graphs(self):
        t, _, batches = next(lossy_trials(count=1))
        with pytest.raises(ValueError):
            decode(batches, t, "layered")


def varied_instances(count, master_seed):
    """Random graphs with K <= 16 and M <= 4 over a lossy two-hop line."""
    rng = np.random.default_rng(master_seed)
    psi = DegreeDistribution.from_dict({2: 0.3, 3: 0.4, 4: 0.3})
    for instance in range(count):
        K = int(rng.integers(6, 17))
        M = int(rng.integers(2, 5))
        N = int(rng.integers(K // 2 + 1, K + 3))
        channel = ChannelConfig(hops=2, loss=0.25, M=M)
        t = random_tanner(psi, K, N, seed=rng)
        src = trial_source(K, 2, master_seed, instance, 0)
        yield K, src, received_batches(t, channel, master_seed, instance, 0, pk=2)


@pytest.mark.slow
class TestDecodersOverManyInstances:
    """Decoder invariants over many random instances and scan orders."""

    def test_bp_ignores_scan_order(self):
        """Twenty shuffled scan orders on fifty instances give the same symbols."""
        rng = np.random.default_rng(40)
        for K, src, batches in varied_instances(50, master_seed=41):
            reference = bp_decode(batches, K)
            for _ in range(20):
                order = rng.permutation(len(batches)).tolist()
                shuffled = bp_decode(batches, K, order=order)
                assert shuffled.decoded_set() == reference.decoded_set()
                assert np.array_equal(shuffled.cn_indicator, reference.cn_indicator)
                assert_symbols_match(shuffled, src)

    def test_inactivation_is_gaussian_elimination(self):
        """On a hundred instances unlimited inactivation matches joint elimination."""
        for K, src, batches in varied_instances(100, master_seed=42):
            bp = bp_decode(batches, K).decoded_set()
            result = inactivation_decode(batches, K)
            assert result.decoded_set() == frozenset(ge_determined(batches, K))
            assert bp <= result.decoded_set()
            assert_symbols_match(result, src)
