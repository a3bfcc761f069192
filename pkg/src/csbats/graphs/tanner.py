"""Tanner graphs: random BATS sampling and Cyclic-Shift expansion."""

import hashlib
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from csbats.core.seeding import SeedLike, as_rng
from csbats.graphs.base import BaseGraph
from csbats.graphs.distribution import DegreeDistribution


@dataclass(frozen=True)
class Provenance:
    """Where a Tanner row came from: a base row and a shift count, or random."""

    base_row: Optional[int] = None
    shift: Optional[int] = None

    @property
    def is_random(self) -> bool:
        return self.base_row is None


RANDOM_ROW = Provenance()


class TannerGraph:
    """``N x K`` bi-adjacency matrix; rows are check nodes (batches).

    Rows built by :func:`expand_cs` remember their base row and shift so the
    layered decoder and the dependence analysis can group them by layer.
    """

    __slots__ = ["_rows", "_provenance", "_m"]

    def __init__(
        self,
        rows: Any,
        provenance: Optional[Sequence[Provenance]] = None,
        m: Optional[int] = None,
    ):
        """Wrap an incidence matrix.

        Args:
            rows: ``N x K`` binary matrix. ``N`` may be zero.
            provenance: One record per row; random rows by default.
            m: Base-graph row count for cyclic-shift graphs.

        Raises:
            ValueError: If a row is empty or the provenance length differs
                from ``N``.
        """
        array = np.asarray(rows, dtype=bool)
        if array.ndim != 2:
            raise ValueError(f"Tanner rows must be 2-D, got shape {array.shape}")
        empty = np.flatnonzero(~array.any(axis=1)) if array.shape[1] else np.arange(array.shape[0])
        if empty.size:
            raise ValueError(f"Tanner graph row {int(empty[0])} has degree 0")
        if provenance is None:
            provenance = [RANDOM_ROW] * array.shape[0]
        if len(provenance) != array.shape[0]:
            raise ValueError(
                f"Expected {array.shape[0]} provenance records, got {len(provenance)}"
            )
        array = array.copy()
        array.setflags(write=False)
        self._rows = array
        self._provenance = tuple(provenance)
        self._m = m

    @classmethod
    def empty(cls, K: int) -> "TannerGraph":
        return cls(np.zeros((0, K), dtype=bool))

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def N(self) -> int:
        return int(self._rows.shape[0])

    @property
    def K(self) -> int:
        return int(self._rows.shape[1])

    @property
    def m(self) -> Optional[int]:
        """Base-graph row count, or ``None`` for random graphs."""
        return self._m

    @property
    def provenance(self) -> tuple:
        return self._provenance

    @property
    def is_cyclic_shift(self) -> bool:
        return self._m is not None

    def support(self, row: int) -> np.ndarray:
        return np.flatnonzero(self._rows[row])

    def supports(self) -> List[np.ndarray]:
        return [np.flatnonzero(row) for row in self._rows]

    def row_degrees(self) -> np.ndarray:
        return self._rows.sum(axis=1).astype(int)

    def column_degrees(self) -> np.ndarray:
        return self._rows.sum(axis=0).astype(int)

    def neighbors(self, k: int) -> np.ndarray:
        """Check nodes (row indices) adjacent to variable ``k``."""
        return np.flatnonzero(self._rows[:, k])

    def layers(self, m: Optional[int] = None) -> np.ndarray:
        """Layer index per row.

        Cyclic-shift rows use their recorded shift. Random rows have no
        layers of their own; passing ``m`` groups them as ``i // m``.

        Raises:
            ValueError: If the graph is random and ``m`` is not given.
        """
        if self.is_cyclic_shift:
            return np.array([p.shift for p in self._provenance], dtype=int)
        if m is None:
            raise ValueError("Random Tanner graphs need an explicit m to form layers")
        if m < 1:
            raise ValueError(f"m must be at least 1, got {m!r}")
        return np.arange(self.N, dtype=int) // m

    def digest(self) -> str:
        """Stable SHA-256 of the shape and incidence bits."""
        h = hashlib.sha256()
        h.update(f"{self.N}x{self.K}".encode("ascii"))
        h.update(np.packbits(self._rows, axis=None).tobytes())
        return h.hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "K": self.K,
            "m": self._m,
            "rows": [[int(k) for k in s] for s in self.supports()],
            "provenance": [
                None if p.is_random else [p.base_row, p.shift]
                for p in self._provenance
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TannerGraph":
        """Reconstruct from a ``to_dict()`` result.

        Raises:
            ValueError: If required keys are missing.
        """
        if not isinstance(data, dict):
            raise ValueError("Input must be a dictionary")
        for key in ("N", "K", "rows"):
            if key not in data:
                raise ValueError(f"Dictionary must contain {key!r} key")
        rows = np.zeros((data["N"], data["K"]), dtype=bool)
        for i, support in enumerate(data["rows"]):
            rows[i, support] = True
        raw = data.get("provenance") or [None] * data["N"]
        provenance = [RANDOM_ROW if p is None else Provenance(p[0], p[1]) for p in raw]
        return cls(rows, provenance, data.get("m"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (
            np.array_equal(self._rows, other._rows)
            and self._provenance == other._provenance
        )

    def __repr__(self) -> str:
        kind = f"cs(m={self._m})" if self.is_cyclic_shift else "random"
        return f"TannerGraph(N={self.N}, K={self.K}, {kind})"


def expand_cs(base: BaseGraph, N: int) -> TannerGraph:
    """Cyclic-Shift expansion: row ``i`` is base row ``i mod m`` shifted right ``i // m``.

    Raises:
        ValueError: If ``N < 1``.
    """
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N!r}")
    m = base.m
    rows = np.empty((N, base.K), dtype=bool)
    provenance = []
    for i in range(N):
        layer = i // m
        rows[i] = np.roll(base.rows[i % m], layer)
        provenance.append(Provenance(base_row=i % m, shift=layer))
    return TannerGraph(rows, provenance, m=m)


def random_tanner(
    psi: DegreeDistribution, K: int, N: int, seed: SeedLike = None
) -> TannerGraph:
    """Classical random BATS graph.

    Each row's degree is drawn i.i.d. from ``psi`` (redrawn if it exceeds
    ``K``); that many distinct columns are chosen uniformly.

    Raises:
        ValueError: If ``psi`` has no mass at or below ``K``.
    """
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N!r}")
    if psi.degrees()[0] > K:
        raise ValueError(f"Every degree of psi exceeds K={K}")
    rng = as_rng(seed)
    rows = np.zeros((N, K), dtype=bool)
    for i in range(N):
        d = int(psi.sample(rng, 1)[0])
        while d > K:
            d = int(psi.sample(rng, 1)[0])
        rows[i, rng.choice(K, size=d, replace=False)] = True
    return TannerGraph(rows)


@dataclass
class GraphMetrics:
    """Edge and degree counts of a Tanner graph."""

    edge_count: int
    max_row_degree: int
    column_degrees: np.ndarray = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "edge_count": self.edge_count,
            "max_row_degree": self.max_row_degree,
            "column_degrees": self.column_degrees.tolist(),
        }


def graph_metrics(t: TannerGraph) -> GraphMetrics:
    return GraphMetrics(
        edge_count=int(t.rows.sum()),
        max_row_degree=int(t.row_degrees().max()) if t.N else 0,
        column_degrees=t.column_degrees(),
    )


def complexity_report(t: TannerGraph, pk: int = 256) -> Dict[str, int]:
    """Encoder buffering and routing cost implied by the graph structure.

    A cyclic-shift encoder buffers at most the largest base-row degree and
    routes each buffer slot from one fixed position. A random encoder must
    provision for any degree up to ``K`` and route every input to every slot.
    Field elements are one byte, so buffer bytes are ``symbols * pk``.
    """
    metrics = graph_metrics(t)
    if t.is_cyclic_shift:
        buffer_symbols = metrics.max_row_degree
        routing_wires = metrics.max_row_degree
    else:
        buffer_symbols = t.K
        routing_wires = t.K * t.K
    return {
        "edge_count": metrics.edge_count,
        "max_row_degree": metrics.max_row_degree,
        "buffer_symbols": buffer_symbols,
        "buffer_bytes": buffer_symbols * pk,
        "routing_wires": routing_wires,
    }
