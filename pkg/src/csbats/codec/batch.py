"""Source blocks, batches, batch encoding and recoding."""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from csbats.core import gf
from csbats.core.gf import GF256, FieldMatrix
from csbats.core.seeding import SeedLike, as_rng
from csbats.graphs.tanner import TannerGraph

COEFFICIENT_MODES = ("uniform", "nonzero")


def check_coefficient_mode(mode: str) -> bool:
    """Return True for ``"nonzero"``; reject unknown modes.

    Raises:
        ValueError: If ``mode`` is not ``"uniform"`` or ``"nonzero"``.
    """
    if mode not in COEFFICIENT_MODES:
        raise ValueError(
            f"coefficient mode must be one of {COEFFICIENT_MODES}, got {mode!r}"
        )
    return mode == "nonzero"


class SourceBlock:
    """``K`` input symbols of ``pk`` field elements each.

    Symbols are stored as the columns of a ``pk x K`` field matrix, the
    layout in which a batch's selected symbols form ``B_i``.
    """

    __slots__ = ["_symbols"]

    def __init__(self, symbols: FieldMatrix):
        self._symbols = gf.as_matrix(symbols)

    @classmethod
    def random(cls, K: int, pk: int, seed: SeedLike = None) -> "SourceBlock":
        return cls(gf.random_matrix(pk, K, as_rng(seed)))

    @classmethod
    def zeros(cls, K: int, pk: int) -> "SourceBlock":
        return cls(gf.zeros(pk, K))

    @property
    def symbols(self) -> FieldMatrix:
        return self._symbols

    @property
    def K(self) -> int:
        return int(self._symbols.shape[1])

    @property
    def pk(self) -> int:
        return int(self._symbols.shape[0])

    def symbol(self, k: int) -> FieldMatrix:
        return self._symbols[:, k]

    def select(self, indices: Sequence[int]) -> FieldMatrix:
        """``B_i``: the selected symbols as a ``pk x len(indices)`` matrix."""
        return self._symbols[:, np.asarray(indices, dtype=int)]


@dataclass
class Batch:
    """One check node's runtime state.

    Attributes:
        id: Row index in the Tanner graph.
        variable_indices: Columns combined into this batch (the current
            unknowns; substitution shrinks it).
        generator: ``G_i``, ``dg x M``, fixed at encoding time.
        coeff: Effective coefficients ``G_i H``, ``dg x m`` for ``m``
            surviving packets.
        payload: Received packets ``Y_i``, ``pk x m``.
        layer: Cyclic-shift layer, or ``None`` for random rows.
    """

    id: int
    variable_indices: np.ndarray
    generator: FieldMatrix
    coeff: FieldMatrix
    payload: FieldMatrix
    layer: Optional[int] = None

    def __post_init__(self):
        self.variable_indices = np.asarray(self.variable_indices, dtype=int)
        if self.coeff.shape[0] != self.variable_indices.size:
            raise ValueError(
                f"Batch {self.id}: {self.coeff.shape[0]} coefficient rows for "
                f"{self.variable_indices.size} variables"
            )
        if self.payload.shape[1] != self.coeff.shape[1]:
            raise ValueError(
                f"Batch {self.id}: payload has {self.payload.shape[1]} columns, "
                f"coefficients have {self.coeff.shape[1]}"
            )

    @property
    def degree(self) -> int:
        return int(self.variable_indices.size)

    @property
    def received(self) -> int:
        """Number of packets (columns) currently held."""
        return int(self.coeff.shape[1])

    @property
    def pk(self) -> int:
        return int(self.payload.shape[0])

    def rank(self) -> int:
        return gf.rank(self.coeff)


def decodable(b: Batch) -> bool:
    """A batch is decodable when its coefficient rank equals its degree."""
    if b.degree > b.received:
        return False
    return b.rank() == b.degree


def encode(
    src: SourceBlock,
    t: TannerGraph,
    M: int,
    seed: SeedLike = None,
    coefficient_mode: str = "uniform",
    generators: Optional[Sequence[FieldMatrix]] = None,
) -> List[Batch]:
    """Generate one batch per Tanner row: ``X_i = B_i G_i``.

    Args:
        src: Source block; ``src.K`` must equal ``t.K``.
        t: Tanner graph selecting each batch's symbols.
        M: Batch size (packets per batch).
        seed: Seed or generator for the generator matrices.
        coefficient_mode: ``"uniform"`` draws entries from all 256 values,
            ``"nonzero"`` from the 255 nonzero ones.
        generators: Optional explicit ``G_i`` per row, bypassing the RNG.

    Returns:
        Batches with ``coeff`` initialized to ``G_i`` and ``M`` columns.

    Raises:
        ValueError: If ``src.K != t.K``, ``M < 1``, or an explicit generator
            has the wrong shape.
    """
    if src.K != t.K:
        raise ValueError(f"Source has K={src.K} symbols, graph has K={t.K}")
    if M < 1:
        raise ValueError(f"Batch size M must be at least 1, got {M!r}")
    if generators is not None and len(generators) != t.N:
        raise ValueError(f"Expected {t.N} generator matrices, got {len(generators)}")
    nonzero = check_coefficient_mode(coefficient_mode)
    rng = as_rng(seed)
    layers = t.layers() if t.is_cyclic_shift else None

    batches: List[Batch] = []
    for i, support in enumerate(t.supports()):
        if generators is None:
            g = gf.random_matrix(support.size, M, rng, nonzero=nonzero)
        else:
            g = gf.as_matrix(generators[i])
            if g.shape != (support.size, M):
                raise ValueError(
                    f"Generator {i} has shape {g.shape}, expected {(support.size, M)}"
                )
        payload = gf.mat_mul(src.select(support), g)
        batches.append(
            Batch(
                id=i,
                variable_indices=support,
                generator=g,
                coeff=g.copy(),
                payload=payload,
                layer=None if layers is None else int(layers[i]),
            )
        )
    return batches


def recode(
    b: Batch,
    M: int,
    seed: SeedLike = None,
    coefficient_mode: str = "uniform",
    transfer: Optional[FieldMatrix] = None,
) -> Batch:
    """Random linear recombination at an intermediate node: ``Y H``.

    A batch with no surviving packets becomes ``M`` zero packets.

    Args:
        b: Batch with ``m >= 0`` received packets.
        M: Packets to emit.
        seed: Seed or generator for ``H``.
        coefficient_mode: As for :func:`encode`.
        transfer: Optional explicit ``m x M`` transfer matrix.

    Returns:
        A new batch; ``b`` is left untouched.
    """
    nonzero = check_coefficient_mode(coefficient_mode)
    m = b.received
    if transfer is None:
        h = gf.random_matrix(m, M, as_rng(seed), nonzero=nonzero)
    else:
        h = gf.as_matrix(transfer)
        if h.shape != (m, M):
            raise ValueError(f"Transfer matrix has shape {h.shape}, expected {(m, M)}")
    return replace(b, coeff=gf.mat_mul(b.coeff, h), payload=gf.mat_mul(b.payload, h))


def erase(b: Batch, keep: np.ndarray) -> Batch:
    """Keep only the packets (columns) flagged in ``keep``."""
    keep = np.asarray(keep, dtype=bool)
    return replace(b, coeff=b.coeff[:, keep], payload=b.payload[:, keep])


def substitute(b: Batch, k: int, symbol: FieldMatrix) -> Batch:
    """Remove known variable ``k`` from ``b``.

    Its contribution ``symbol * coeff_row`` is cancelled from the payload
    and its coefficient row dropped, so the remaining unknowns satisfy
    ``payload == B_rest @ coeff``.

    Raises:
        ValueError: If ``k`` is not one of the batch's variables.
    """
    hits = np.flatnonzero(b.variable_indices == k)
    if hits.size == 0:
        raise ValueError(f"Variable {k!r} is not in batch {b.id}")
    row = b.coeff[hits[0]]
    symbol = GF256(np.asarray(symbol, dtype=np.uint8).reshape(-1))
    keep = b.variable_indices != k
    return replace(
        b,
        variable_indices=b.variable_indices[keep],
        coeff=b.coeff[keep],
        payload=b.payload + symbol[:, np.newaxis] * row[np.newaxis, :],
    )
