"""Multi-hop packet-erasure network with recoding at intermediate nodes."""

from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, Iterable, Optional

import numpy as np

from csbats.codec.batch import Batch, check_coefficient_mode, erase, recode
from csbats.core import gf
from csbats.core.seeding import SeedLike, as_rng

# Tolerance on the probabilities of an in-memory rank distribution
RANK_TOLERANCE = 1e-9

# (received columns, batch size) -> transfer matrix, replacing random recoding
TransferFactory = Callable[[int, int], gf.FieldMatrix]


@dataclass(frozen=True)
class ChannelConfig:
    """A line network of ``hops`` links with i.i.d. per-packet loss.

    ``hops`` counts links, so ``hops - 1`` intermediate nodes recode.
    """

    hops: int = 1
    loss: float = 0.0
    M: int = 16
    recode: bool = True
    coefficient_mode: str = "uniform"

    def __post_init__(self):
        if self.hops < 1:
            raise ValueError(f"hops must be at least 1, got {self.hops!r}")
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError(f"loss must lie in [0, 1], got {self.loss!r}")
        if self.M < 1:
            raise ValueError(f"Batch size M must be at least 1, got {self.M!r}")
        check_coefficient_mode(self.coefficient_mode)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChannelConfig":
        return cls(**data)


class RankDistribution:
    """Probabilities ``h_0..h_M`` of a received batch's rank.

    Example:
        >>> h = RankDistribution([0.0, 0.25, 0.75])
        >>> h.M, h.mean()
        (2, 1.75)
    """

    __slots__ = ["_probs"]

    def __init__(self, probs: Iterable[float]):
        """Raises:
        ValueError: If fewer than two entries are given, any entry is
            negative, or the entries do not sum to 1 within ``1e-9``.
        """
        array = np.asarray(list(probs), dtype=float)
        if array.ndim != 1 or array.size < 2:
            raise ValueError("A rank distribution needs entries for ranks 0..M, M >= 1")
        if np.any(array < 0) or not np.all(np.isfinite(array)):
            raise ValueError("Rank probabilities must be finite and non-negative")
        total = float(array.sum())
        if abs(total - 1.0) > RANK_TOLERANCE:
            raise ValueError(f"Rank probabilities must sum to 1, got {total!r}")
        array = array.copy()
        array.setflags(write=False)
        self._probs = array

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "RankDistribution":
        counts = np.asarray(list(counts), dtype=float)
        if counts.sum() <= 0:
            raise ValueError("Cannot normalize an empty rank histogram")
        return cls(counts / counts.sum())

    @classmethod
    def full_rank(cls, M: int) -> "RankDistribution":
        probs = np.zeros(M + 1)
        probs[M] = 1.0
        return cls(probs)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def M(self) -> int:
        return int(self._probs.size - 1)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.M + 1), self._probs))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self._probs)

    def to_line(self) -> str:
        return " ".join(repr(float(p)) for p in self._probs)

    @classmethod
    def from_line(cls, line: str) -> "RankDistribution":
        """Parse the whitespace-separated probabilities written by :meth:`to_line`."""
        try:
            values = [float(v) for v in line.split()]
        except ValueError as e:
            raise ValueError(f"Malformed rank distribution line: {e}")
        return cls(values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RankDistribution):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __repr__(self) -> str:
        return f"RankDistribution(M={self.M}, mean={self.mean():.4f})"


def transmit(
    b: Batch,
    cfg: ChannelConfig,
    seed: SeedLike = None,
    transfer: Optional[TransferFactory] = None,
) -> Batch:
    """Send a batch over ``cfg.hops`` lossy links.

    On every link each current packet is erased independently with
    probability ``cfg.loss``. Every node except the destination recodes the
    survivors back to ``cfg.M`` packets when ``cfg.recode`` is set.

    Args:
        b: Batch as emitted by the source, with ``cfg.M`` packets.
        cfg: Channel parameters.
        seed: Seed or generator for erasures and recoding.
        transfer: Optional factory for the recoding matrices.

    Raises:
        ValueError: If ``b`` does not hold ``cfg.M`` packets.
    """
    if b.received != cfg.M:
        raise ValueError(f"Source batch must hold M={cfg.M} packets, got {b.received}")
    rng = as_rng(seed)
    current = b
    for hop in range(cfg.hops):
        current = erase(current, rng.random(current.received) >= cfg.loss)
        if cfg.recode and hop < cfg.hops - 1:
            h = None if transfer is None else transfer(current.received, cfg.M)
            current = recode(current, cfg.M, rng, cfg.coefficient_mode, transfer=h)
    return current


def probe_batch(M: int) -> Batch:
    """Degree-``M`` batch with ``G = I`` so its rank is the channel's rank."""
    return Batch(
        id=0,
        variable_indices=np.arange(M),
        generator=gf.identity(M),
        coeff=gf.identity(M),
        payload=gf.zeros(0, M),
    )


def estimate_rank_distribution(
    cfg: ChannelConfig, trials: int, seed: SeedLike = None
) -> RankDistribution:
    """Empirical end-to-end rank histogram over ``trials`` probe batches.

    Raises:
        ValueError: If ``trials < 1``.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials!r}")
    rng = as_rng(seed)
    probe = probe_batch(cfg.M)
    ranks = [transmit(probe, cfg, rng).rank() for _ in range(trials)]
    return RankDistribution.from_counts(np.bincount(ranks, minlength=cfg.M + 1))


def rank_distribution_sweep(
    M: int,
    loss: float,
    hops: Iterable[int],
    trials: int,
    seed: SeedLike = None,
    recode: bool = True,
    coefficient_mode: str = "uniform",
) -> Dict[int, RankDistribution]:
    """:func:`estimate_rank_distribution` for each hop count, one RNG stream."""
    rng = as_rng(seed)
    return {
        int(n): estimate_rank_distribution(
            ChannelConfig(
                hops=int(n),
                loss=loss,
                M=M,
                recode=recode,
                coefficient_mode=coefficient_mode,
            ),
            trials,
            rng,
        )
        for n in hops
    }
