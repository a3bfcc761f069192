"""GF(2^8) scalar and matrix arithmetic for batch encoding and decoding."""

from typing import Optional, Union

import galois
import numpy as np

# x^8 + x^4 + x^3 + x^2 + 1, recorded in every run's metadata
REDUCTION_POLYNOMIAL = 0x11D

FIELD_ORDER = 256

GF256 = galois.GF(2**8, irreducible_poly=REDUCTION_POLYNOMIAL)

# A FieldMatrix is a 2-D GF256 array; the alias keeps signatures readable.
FieldMatrix = galois.FieldArray

FieldLike = Union[int, np.integer]


class Unsolvable(ValueError):
    """Raised when a linear system has no unique solution.

    In decoding this is the ordinary "batch not yet decodable" outcome, so
    callers usually catch it rather than let it propagate.
    """

    pass


def _check_element(value: FieldLike) -> int:
    value = int(value)
    if not 0 <= value < FIELD_ORDER:
        raise ValueError(f"Field elements are bytes in [0, 255], got {value!r}")
    return value


def field_mul(a: FieldLike, b: FieldLike) -> int:
    """Multiply two field elements.

    Example:
        >>> field_mul(0x80, 0x02)
        29
    """
    return int(GF256(_check_element(a)) * GF256(_check_element(b)))


def field_add(a: FieldLike, b: FieldLike) -> int:
    """Add two field elements (bitwise XOR in characteristic 2)."""
    return _check_element(a) ^ _check_element(b)


def field_inv(a: FieldLike) -> int:
    """Return the multiplicative inverse of a nonzero element.

    Raises:
        ZeroDivisionError: If ``a`` is zero.
    """
    a = _check_element(a)
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse in GF(2^8)")
    return int(np.reciprocal(GF256(a)))


def as_matrix(data) -> FieldMatrix:
    """Coerce nested lists or an integer array into a 2-D field matrix.

    Raises:
        ValueError: If the data is not two-dimensional or holds values
            outside a byte.
    """
    if isinstance(data, GF256):
        matrix = data
    else:
        array = np.asarray(data, dtype=np.int64)
        if array.size and (array.min() < 0 or array.max() >= FIELD_ORDER):
            raise ValueError("Matrix entries must be bytes in [0, 255]")
        matrix = GF256(array.astype(np.uint8))
    if matrix.ndim != 2:
        raise ValueError(f"A field matrix must be 2-D, got shape {matrix.shape}")
    return matrix


def zeros(rows: int, cols: int) -> FieldMatrix:
    return GF256.Zeros((rows, cols))


def identity(n: int) -> FieldMatrix:
    return GF256.Identity(n)


def random_matrix(
    rows: int,
    cols: int,
    rng: np.random.Generator,
    nonzero: bool = False,
) -> FieldMatrix:
    """Draw a matrix with i.i.d. uniform entries.

    Args:
        rows: Row count.
        cols: Column count.
        rng: Source of randomness; the caller owns the stream.
        nonzero: Draw from the 255 nonzero elements instead of all 256.

    Returns:
        A ``rows x cols`` field matrix.
    """
    low = 1 if nonzero else 0
    values = rng.integers(low, FIELD_ORDER, size=(rows, cols), dtype=np.uint8)
    return GF256(values)


def mat_mul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    """Standard matrix product over GF(2^8).

    Raises:
        ValueError: If ``a.cols != b.rows``.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"Dimension mismatch: {a.shape[0]}x{a.shape[1]} times "
            f"{b.shape[0]}x{b.shape[1]}"
        )
    if 0 in a.shape or 0 in b.shape:
        return zeros(a.shape[0], b.shape[1])
    return a @ b


def rank(a: FieldMatrix) -> int:
    """Rank over GF(2^8) by row reduction. Empty matrices have rank 0."""
    a = as_matrix(a)
    if a.size == 0:
        return 0
    return int(np.linalg.matrix_rank(a))


def solve(a: FieldMatrix, y: FieldMatrix) -> FieldMatrix:
    """Solve ``a @ x == y`` for the unique ``x``.

    The unknown count is ``a.cols``; a unique solution needs
    ``rank(a) == a.cols`` and a consistent right-hand side.

    Args:
        a: Coefficient matrix, ``n x u``.
        y: Right-hand side, ``n x p``.

    Returns:
        The ``u x p`` solution.

    Raises:
        Unsolvable: If the system is rank deficient or inconsistent.
        ValueError: If the row counts differ.
    """
    a = as_matrix(a)
    y = as_matrix(y)
    if a.shape[0] != y.shape[0]:
        raise ValueError(
            f"Row count mismatch: coefficients have {a.shape[0]} rows, "
            f"right-hand side has {y.shape[0]}"
        )
    unknowns = a.shape[1]
    if unknowns == 0:
        if np.count_nonzero(y):
            raise Unsolvable("Inconsistent system with no unknowns")
        return zeros(0, y.shape[1])
    if a.shape[0] < unknowns:
        raise Unsolvable(
            f"{a.shape[0]} equations cannot determine {unknowns} unknowns"
        )
    reduced = np.concatenate((a, y), axis=1).row_reduce(ncols=unknowns)
    pivots = reduced[:unknowns, :unknowns]
    if not np.array_equal(pivots, identity(unknowns)):
        raise Unsolvable(f"Coefficient rank is below {unknowns}")
    if np.count_nonzero(reduced[unknowns:, unknowns:]):
        raise Unsolvable("Inconsistent right-hand side")
    return reduced[:unknowns, unknowns:]


def full_rank_probability(rows: int, cols: int, q: Optional[int] = None) -> float:
    """Probability that a uniform ``rows x cols`` matrix has rank ``rows``.

    Equals ``prod_{i=0}^{rows-1} (1 - q^(i - cols))`` for ``rows <= cols``
    and zero otherwise.
    """
    q = FIELD_ORDER if q is None else q
    if rows > cols:
        return 0.0
    prob = 1.0
    for i in range(rows):
        prob *= 1.0 - float(q) ** (i - cols)
    return prob
