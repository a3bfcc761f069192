"""Base graphs (protographs) for Cyclic-Shift BATS codes.

A base graph is an ``m x K`` binary bi-adjacency matrix; every row is a
check node of layer 0. Rows of later layers are produced by cyclic shifts
(see :mod:`csbats.graphs.tanner`).
"""

import functools
import math
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from csbats.core.seeding import SeedLike, as_rng
from csbats.graphs.distribution import DegreeDistribution, truncate_top_m

PathLike = Union[str, "os.PathLike[str]"]

# Row degrees of the m=7 and m=8 reference graphs (K = 256)
CS7_DEGREES = (11, 12, 14, 14, 19, 20, 27)
CS8_DEGREES = (11, 12, 14, 14, 16, 19, 20, 27)

PRESET_DEGREES = {
    "cs7": CS7_DEGREES,
    "cs8": CS8_DEGREES,
}

# Seed of the shipped presets' column-design random tie-breaks
PRESET_SEED = 2024

# Presets are searched for on this expansion length
PRESET_SEARCH_N = 20
PRESET_CANDIDATES = 32

TIE_BREAKS = ("random", "lowest")


class GraphFormatError(ValueError):
    """Raised when a base-graph file cannot be parsed."""

    pass


class BaseGraph:
    """Binary ``m x K`` protograph.

    Example:
        >>> base = design_base_graph([2, 2, 2], 3, tie_break="lowest")
        >>> base.column_degrees().tolist()
        [2, 2, 2]
    """

    __slots__ = ["_rows"]

    def __init__(self, rows: Any):
        """Wrap a binary incidence matrix.

        Raises:
            ValueError: If the matrix is not 2-D or a row is empty.
        """
        array = np.asarray(rows, dtype=bool)
        if array.ndim != 2 or array.shape[0] == 0:
            raise ValueError(
                f"A base graph needs a non-empty 2-D row matrix, got shape "
                f"{array.shape}"
            )
        empty = np.flatnonzero(~array.any(axis=1))
        if empty.size:
            raise ValueError(f"Base graph row {int(empty[0])} has degree 0")
        array = array.copy()
        array.setflags(write=False)
        self._rows = array

    @classmethod
    def from_supports(cls, supports: Sequence[Sequence[int]], K: int) -> "BaseGraph":
        """Build from per-row column index lists.

        Raises:
            ValueError: If an index falls outside ``[0, K)``.
        """
        rows = np.zeros((len(supports), K), dtype=bool)
        for i, support in enumerate(supports):
            for k in support:
                if not 0 <= int(k) < K:
                    raise ValueError(f"Row {i}: column {k!r} outside [0, {K})")
                rows[i, int(k)] = True
        return cls(rows)

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def m(self) -> int:
        return int(self._rows.shape[0])

    @property
    def K(self) -> int:
        return int(self._rows.shape[1])

    def row_degrees(self) -> List[int]:
        return [int(d) for d in self._rows.sum(axis=1)]

    def column_degrees(self) -> np.ndarray:
        return self._rows.sum(axis=0).astype(int)

    def supports(self) -> List[List[int]]:
        return [[int(k) for k in np.flatnonzero(row)] for row in self._rows]

    def to_dict(self) -> Dict[str, Any]:
        return {"m": self.m, "K": self.K, "rows": self.supports()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BaseGraph":
        """Reconstruct from a ``to_dict()`` result.

        Raises:
            ValueError: If keys are missing or the row count disagrees with ``m``.
        """
        if not isinstance(data, dict):
            raise ValueError("Input must be a dictionary")
        for key in ("m", "K", "rows"):
            if key not in data:
                raise ValueError(f"Dictionary must contain {key!r} key")
        if len(data["rows"]) != data["m"]:
            raise ValueError(
                f"Expected {data['m']} rows, got {len(data['rows'])}"
            )
        return cls.from_supports(data["rows"], data["K"])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BaseGraph):
            return NotImplemented
        return np.array_equal(self._rows, other._rows)

    def __repr__(self) -> str:
        return f"BaseGraph(m={self.m}, K={self.K}, degrees={self.row_degrees()})"


def derive_row_degrees(psi: DegreeDistribution, m: int) -> List[int]:
    """Choose ``m`` base-graph row degrees that mimic the top-``m`` masses of ``psi``.

    Degree ``d`` appears ``gamma_d`` times with ``gamma_d`` either the floor or
    the ceiling of ``m * psi'_d``, where ``psi'`` is :func:`truncate_top_m`
    of ``psi``, and the counts sum to exactly ``m``. Rounding up goes to the
    largest fractional parts first (larger mass, then larger degree, on ties).

    Returns:
        The degrees, ascending.

    Raises:
        ValueError: If ``m < 1``.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m!r}")
    top = truncate_top_m(psi, m)
    targets = {d: m * top.mass(d) for d in top.degrees()}
    counts = {d: int(math.floor(t)) for d, t in targets.items()}
    remaining = m - sum(counts.values())
    order = sorted(
        targets,
        key=lambda d: (targets[d] - counts[d], top.mass(d), d),
        reverse=True,
    )
    for d in order[:remaining]:
        counts[d] += 1
    degrees: List[int] = []
    for d in sorted(counts):
        degrees.extend([d] * counts[d])
    return degrees


def _check_degrees(degrees: Sequence[int], K: int) -> None:
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K!r}")
    if not degrees:
        raise ValueError("At least one row degree is required")
    for d in degrees:
        if not 1 <= int(d) <= K:
            raise ValueError(f"Row degree {d!r} outside [1, {K}]")


def design_base_graph(
    degrees: Sequence[int],
    K: int,
    tie_break: str = "random",
    seed: SeedLike = None,
) -> BaseGraph:
    """Column degree design: each row takes the columns with the fewest edges.

    Rows are placed in input order. Row ``i`` selects the ``degrees[i]``
    columns whose current column degree is smallest; among equal column
    degrees the choice is random (``tie_break="random"``) or by lowest
    index (``tie_break="lowest"``).

    Args:
        degrees: Row degrees, each in ``[1, K]``.
        K: Number of variable nodes (columns).
        tie_break: ``"random"`` or ``"lowest"``.
        seed: Seed or generator for random tie-breaks.

    Raises:
        ValueError: If a degree is outside ``[1, K]`` or ``tie_break`` is unknown.
    """
    _check_degrees(degrees, K)
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}, got {tie_break!r}")
    rng = as_rng(seed) if tie_break == "random" else None

    rows = np.zeros((len(degrees), K), dtype=bool)
    column_degrees = np.zeros(K, dtype=int)
    for i, d in enumerate(degrees):
        if rng is None:
            secondary = np.arange(K)
        else:
            secondary = rng.permutation(K)
        # lexsort sorts by the last key first
        order = np.lexsort((secondary, column_degrees))
        chosen = order[: int(d)]
        rows[i, chosen] = True
        column_degrees[chosen] += 1
    return BaseGraph(rows)


def random_base_graph(degrees: Sequence[int], K: int, seed: SeedLike = None) -> BaseGraph:
    """Uniformly random supports with the given row degrees (no column design)."""
    _check_degrees(degrees, K)
    rng = as_rng(seed)
    rows = np.zeros((len(degrees), K), dtype=bool)
    for i, d in enumerate(degrees):
        rows[i, rng.choice(K, size=int(d), replace=False)] = True
    return BaseGraph(rows)


def search_base_graph(
    degrees: Sequence[int],
    K: int,
    N: int,
    candidates: int = 32,
    seed: SeedLike = None,
) -> BaseGraph:
    """Pick the best-covering of several column-designed base graphs.

    Each candidate is built by :func:`design_base_graph` with random
    tie-breaks and expanded to ``N`` rows. A variable no row of the
    expansion touches can never be decoded, so candidates are ranked by
    the number of such columns first and by column-degree variance second;
    the first candidate wins ties.

    Raises:
        ValueError: If ``candidates < 1``.
    """
    if candidates < 1:
        raise ValueError(f"candidates must be at least 1, got {candidates!r}")
    rng = as_rng(seed)
    best: Optional[BaseGraph] = None
    best_score = (math.inf, math.inf)
    for _ in range(candidates):
        base = design_base_graph(degrees, K, tie_break="random", seed=rng)
        score = expansion_balance(base, N)
        if score < best_score:
            best, best_score = base, score
    return best


def expansion_balance(base: BaseGraph, N: int) -> Tuple[int, float]:
    """``(uncovered columns, column-degree variance)`` of the ``N``-row expansion."""
    from csbats.graphs.tanner import expand_cs

    column_degrees = expand_cs(base, N).column_degrees()
    return int(np.count_nonzero(column_degrees == 0)), float(np.var(column_degrees))


def preset_base_graph(name: str, K: int = 256, seed: int = PRESET_SEED) -> BaseGraph:
    """Shipped base graph for a named degree preset (``cs7``, ``cs8``).

    The graph is the :func:`search_base_graph` pick among
    ``PRESET_CANDIDATES`` column-designed candidates, scored on the
    ``PRESET_SEARCH_N``-row expansion. Results are cached per
    ``(name, K, seed)``.

    Raises:
        ValueError: If the preset name is unknown.
    """
    if name not in PRESET_DEGREES:
        raise ValueError(
            f"Unknown base-graph preset {name!r}; choose from {sorted(PRESET_DEGREES)}"
        )
    return _searched_preset(name, int(K), int(seed))


@functools.lru_cache(maxsize=None)
def _searched_preset(name: str, K: int, seed: int) -> BaseGraph:
    return search_base_graph(
        PRESET_DEGREES[name], K, PRESET_SEARCH_N, candidates=PRESET_CANDIDATES, seed=seed
    )


def format_base_graph(base: BaseGraph) -> str:
    lines = [f"{base.m} {base.K}"]
    lines.extend(" ".join(str(k) for k in support) for support in base.supports())
    return "\n".join(lines) + "\n"


def parse_base_graph(text: str, source: str = "<string>") -> BaseGraph:
    """Parse the ``m K`` header plus one ascending index list per row.

    Raises:
        GraphFormatError: On a malformed header, wrong row count, unsorted
            or out-of-range indices, or empty rows.
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise GraphFormatError(f"{source}: empty base-graph file")
    header = lines[0].split()
    try:
        m, K = (int(v) for v in header)
    except ValueError:
        raise GraphFormatError(f"{source}: header must be 'm K', got {lines[0]!r}")
    if len(lines) - 1 != m:
        raise GraphFormatError(f"{source}: header says {m} rows, found {len(lines) - 1}")
    supports: List[List[int]] = []
    for number, line in enumerate(lines[1:], start=2):
        try:
            indices = [int(v) for v in line.split()]
        except ValueError:
            raise GraphFormatError(f"{source}:{number}: non-integer column index")
        if indices != sorted(set(indices)):
            raise GraphFormatError(f"{source}:{number}: indices must be strictly ascending")
        if indices[0] < 0 or indices[-1] >= K:
            raise GraphFormatError(f"{source}:{number}: index outside [0, {K})")
        supports.append(indices)
    return BaseGraph.from_supports(supports, K)


def load_base_graph(path: PathLike) -> BaseGraph:
    with open(path, "r", encoding="utf-8") as f:
        return parse_base_graph(f.read(), source=str(path))


def save_base_graph(base: BaseGraph, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_base_graph(base))
