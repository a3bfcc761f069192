"""Degree distributions (Psi) and their text file exchange format."""

import os
from typing import Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np

from csbats.core.seeding import SeedLike, as_rng

# Invariant tolerance for an in-memory distribution
NORMALIZATION_TOLERANCE = 1e-9

# Files may be written with fewer digits; anything within this is renormalized
FILE_TOLERANCE = 1e-6

PathLike = Union[str, "os.PathLike[str]"]


class DistributionError(ValueError):
    """Raised for negative, non-normalized, or unparsable distributions."""

    pass


class DegreeDistribution:
    """Probability masses over batch degrees ``1..max_degree``.

    Masses are held in a dense array where index ``d - 1`` is degree ``d``.
    Instances are immutable; operations return new distributions.

    Example:
        >>> psi = DegreeDistribution.from_dict({2: 0.5, 3: 0.3, 4: 0.2})
        >>> psi.mean()
        2.7
    """

    __slots__ = ["_masses"]

    def __init__(self, masses: Iterable[float]):
        """Create a distribution from a dense mass vector.

        Args:
            masses: ``masses[d - 1]`` is the probability of degree ``d``.

        Raises:
            DistributionError: If any mass is negative or the masses do not
                sum to 1 within ``1e-9``.
        """
        array = np.asarray(list(masses), dtype=float)
        if array.ndim != 1 or array.size == 0:
            raise DistributionError("A degree distribution needs at least one mass")
        if np.any(array < 0) or not np.all(np.isfinite(array)):
            raise DistributionError("Degree masses must be finite and non-negative")
        total = float(array.sum())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise DistributionError(f"Degree masses must sum to 1, got {total!r}")
        # Trailing zeros carry no information
        last = int(np.flatnonzero(array)[-1]) + 1
        array = array[:last].copy()
        array.setflags(write=False)
        self._masses = array

    @classmethod
    def from_dict(cls, masses: Mapping[int, float]) -> "DegreeDistribution":
        """Build from a ``{degree: mass}`` mapping.

        Raises:
            DistributionError: If a degree is below 1, or the masses are
                invalid as for the constructor.
        """
        if not masses:
            raise DistributionError("A degree distribution needs at least one mass")
        bad = [d for d in masses if int(d) < 1]
        if bad:
            raise DistributionError(f"Degrees start at 1, got {bad[0]!r}")
        dense = np.zeros(max(int(d) for d in masses))
        for degree, mass in masses.items():
            dense[int(degree) - 1] = mass
        return cls(dense)

    @classmethod
    def point(cls, degree: int) -> "DegreeDistribution":
        """All mass on a single degree."""
        return cls.from_dict({degree: 1.0})

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    @property
    def max_degree(self) -> int:
        return int(self._masses.size)

    def degrees(self) -> List[int]:
        """Degrees with nonzero mass, ascending."""
        return [int(i) + 1 for i in np.flatnonzero(self._masses)]

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self._masses))

    def mass(self, degree: int) -> float:
        if 1 <= degree <= self.max_degree:
            return float(self._masses[degree - 1])
        return 0.0

    def mean(self) -> float:
        support = np.arange(1, self.max_degree + 1)
        return float(np.dot(support, self._masses))

    def variance(self) -> float:
        support = np.arange(1, self.max_degree + 1)
        return float(np.dot(support**2, self._masses)) - self.mean() ** 2

    def sample(self, rng: SeedLike, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. degrees."""
        rng = as_rng(rng)
        return rng.choice(np.arange(1, self.max_degree + 1), size=size, p=self._masses)

    def to_dict(self) -> Dict[int, float]:
        return {d: float(self._masses[d - 1]) for d in self.degrees()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DegreeDistribution):
            return NotImplemented
        return np.array_equal(self._masses, other._masses)

    def __repr__(self) -> str:
        return f"DegreeDistribution({self.to_dict()!r})"


def truncate_top_m(psi: DegreeDistribution, m: int) -> DegreeDistribution:
    """Keep the ``m`` largest masses and renormalize them to sum to 1.

    Ties between equal masses keep the larger degree. When ``psi`` has at
    most ``m`` nonzero masses it is returned unchanged.

    Raises:
        ValueError: If ``m < 1``.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m!r}")
    degrees = psi.degrees()
    if len(degrees) <= m:
        return psi
    ranked = sorted(degrees, key=lambda d: (psi.mass(d), d), reverse=True)[:m]
    total = sum(psi.mass(d) for d in ranked)
    kept = {d: psi.mass(d) / total for d in ranked}
    # Absorb rounding drift into the largest mass so the sum is exactly 1
    drift = 1.0 - sum(kept.values())
    kept[ranked[0]] += drift
    return DegreeDistribution.from_dict(kept)


def _parse_lines(lines: Iterable[str], source: str) -> List[Tuple[int, float]]:
    pairs: List[Tuple[int, float]] = []
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise DistributionError(
                f"{source}:{number}: expected 'degree mass', got {raw.strip()!r}"
            )
        try:
            degree = int(fields[0])
            mass = float(fields[1])
        except ValueError as e:
            raise DistributionError(f"{source}:{number}: {e}")
        if degree < 1:
            raise DistributionError(f"{source}:{number}: degree must be >= 1")
        if mass < 0:
            raise DistributionError(f"{source}:{number}: negative mass {mass!r}")
        if pairs and degree <= pairs[-1][0]:
            raise DistributionError(
                f"{source}:{number}: degrees must be strictly ascending"
            )
        pairs.append((degree, mass))
    if not pairs:
        raise DistributionError(f"{source}: no degree masses found")
    return pairs


def parse_distribution(text: str, source: str = "<string>") -> DegreeDistribution:
    """Parse the ``degree mass`` line format.

    Raises:
        DistributionError: On malformed lines, negative masses, descending
            degrees, or a total further than ``1e-6`` from 1.
    """
    pairs = _parse_lines(text.splitlines(), source)
    total = sum(mass for _, mass in pairs)
    if abs(total - 1.0) > FILE_TOLERANCE:
        raise DistributionError(
            f"{source}: masses sum to {total!r}, which is not normalized"
        )
    if abs(total - 1.0) <= NORMALIZATION_TOLERANCE:
        return DegreeDistribution.from_dict(dict(pairs))
    return DegreeDistribution.from_dict({d: m / total for d, m in pairs})


def format_distribution(psi: DegreeDistribution, comment: str = "") -> str:
    lines = []
    if comment:
        lines.extend(f"# {part}" for part in comment.splitlines())
    # repr() keeps every bit of the float so save/load is exact
    lines.extend(f"{d} {psi.mass(d)!r}" for d in psi.degrees())
    return "\n".join(lines) + "\n"


def load_distribution(path: PathLike) -> DegreeDistribution:
    """Read a distribution file (see :func:`parse_distribution`)."""
    with open(path, "r", encoding="utf-8") as f:
        return parse_distribution(f.read(), source=str(path))


def save_distribution(
    psi: DegreeDistribution, path: PathLike, comment: str = ""
) -> None:
    """Write ``psi`` so that :func:`load_distribution` returns an equal value."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_distribution(psi, comment))
