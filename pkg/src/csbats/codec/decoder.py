"""Belief-propagation, inactivation and layered decoding of BATS batches.

All three decoders share one engine. A variable is *unknown*, *inactive*
(symbolically fixed) or *solved*. A solved value is a constant vector plus
GF coefficients over inactive variables; it is numeric once that map is
empty. Each check keeps the coefficient rows of its unknown variables, the
rows of the inactive variables it still references, and its payload, so
that every unsolved check satisfies::

    payload == X_unknown @ coeff + X_inactive @ inactive_rows

Surplus equations of a solved check become constraints on inactive
variables. Characteristic 2 means subtraction is addition throughout.
"""

from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from csbats.core import gf
from csbats.core.gf import GF256, FieldMatrix
from csbats.codec.batch import Batch

UNKNOWN = 0
SOLVED = 1
INACTIVE = 2

# coefficient per inactive variable, right-hand side (pk,)
Constraint = Tuple[Dict[int, int], FieldMatrix]


class MissingLayerError(ValueError):
    """Raised when layered decoding meets a batch without a layer index."""

    pass


@dataclass
class DecodeResult:
    """Outcome of one decoding run.

    ``cn_indicator[n]`` is true when batch ``n`` became decodable, i.e. all
    of its variables ended up recovered. ``peak_retained_columns`` counts
    the most payload columns held by unsolved batches at one time.
    """

    decoded_mask: np.ndarray
    decoded_symbols: FieldMatrix
    cn_indicator: np.ndarray
    inactivation_count: int = 0
    constraint_rank: int = 0
    peak_retained_columns: int = 0

    @property
    def K(self) -> int:
        return int(self.decoded_mask.size)

    @property
    def vn_indicator(self) -> np.ndarray:
        return self.decoded_mask.copy()

    @property
    def decoded_count(self) -> int:
        return int(np.count_nonzero(self.decoded_mask))

    @property
    def decoding_rate(self) -> float:
        if self.K == 0:
            return 0.0
        return self.decoded_count / self.K

    def decoded_set(self) -> FrozenSet[int]:
        return frozenset(int(k) for k in np.flatnonzero(self.decoded_mask))


class _Check:
    __slots__ = [
        "index",
        "vars",
        "coeff",
        "inact_ids",
        "inact",
        "payload",
        "support",
        "solved",
        "loaded",
    ]

    def __init__(self, index: int, b: Batch):
        self.index = index
        self.vars: List[int] = [int(k) for k in b.variable_indices]
        self.support = tuple(self.vars)
        self.coeff = b.coeff.copy()
        self.inact_ids: List[int] = []
        self.inact = gf.zeros(0, b.received)
        self.payload = b.payload.copy()
        self.solved = False
        self.loaded = False

    @property
    def columns(self) -> int:
        return int(self.coeff.shape[1])

    def take_row(self, v: int) -> FieldMatrix:
        """Remove and return the coefficient row of unknown ``v``."""
        idx = self.vars.index(v)
        row = self.coeff[idx].copy()
        keep = np.ones(len(self.vars), dtype=bool)
        keep[idx] = False
        self.coeff = self.coeff[keep]
        self.vars.pop(idx)
        return row

    def add_inactive(self, a: int, row: FieldMatrix) -> None:
        if a in self.inact_ids:
            j = self.inact_ids.index(a)
            self.inact[j] = self.inact[j] + row
        else:
            self.inact_ids.append(a)
            self.inact = np.concatenate((self.inact, row[np.newaxis, :]), axis=0)

    def drop_inactive(self, a: int) -> Optional[FieldMatrix]:
        if a not in self.inact_ids:
            return None
        j = self.inact_ids.index(a)
        row = self.inact[j].copy()
        keep = np.ones(len(self.inact_ids), dtype=bool)
        keep[j] = False
        self.inact = self.inact[keep]
        self.inact_ids.pop(j)
        return row


class _Engine:
    """Shared solve/substitute/inactivate machinery."""

    def __init__(self, batches: Sequence[Batch], K: int):
        if K < 0:
            raise ValueError(f"K must be non-negative, got {K!r}")
        self.K = K
        self.pk = batches[0].pk if batches else 0
        self.checks = [_Check(i, b) for i, b in enumerate(batches)]
        self.status = np.full(K, UNKNOWN, dtype=np.int8)
        self.const: Dict[int, FieldMatrix] = {}
        self.affine: Dict[int, Dict[int, int]] = {}
        self.var_checks: List[Set[int]] = [set() for _ in range(K)]
        self.pending: List[int] = []
        self.constraints: List[Constraint] = []
        self.inactivations = 0
        self.constraint_rank = 0
        self.retained = 0
        self.peak_retained = 0
        self.queue: Deque[int] = deque()
        for c in self.checks:
            for v in c.vars:
                if not 0 <= v < K:
                    raise ValueError(
                        f"Batch {c.index} references variable {v!r} outside [0, {K})"
                    )
                self.var_checks[v].add(c.index)

    # -- loading and propagation ---------------------------------------

    def load(self, indices: Sequence[int]) -> None:
        for i in indices:
            c = self.checks[i]
            if c.loaded:
                continue
            c.loaded = True
            self.retained += c.columns
            self.queue.append(i)
        self.peak_retained = max(self.peak_retained, self.retained)

    def propagate(self) -> None:
        while self.queue:
            self._try_solve(self.checks[self.queue.popleft()])

    def _try_solve(self, c: _Check) -> None:
        if c.solved or not c.loaded:
            return
        d = len(c.vars)
        if d > c.columns:
            return
        if d and gf.rank(c.coeff) != d:
            return
        self._solve_check(c)

    def _solve_check(self, c: _Check) -> None:
        d = len(c.vars)
        n_inact = len(c.inact_ids)
        c.solved = True
        self.retained -= c.columns
        for v in c.vars:
            self.var_checks[v].discard(c.index)
        if c.columns == 0:
            return

        system = np.concatenate((c.coeff, c.inact, c.payload), axis=0).T
        reduced = system.row_reduce(ncols=d) if d else system
        rhs = d + n_inact

        definitions = []
        for i, v in enumerate(c.vars):
            affine = {
                c.inact_ids[j]: int(reduced[i, d + j])
                for j in range(n_inact)
                if reduced[i, d + j] != 0
            }
            definitions.append((v, reduced[i, rhs:].copy(), affine))
        for r in range(d, c.columns):
            coefs = {
                c.inact_ids[j]: int(reduced[r, d + j])
                for j in range(n_inact)
                if reduced[r, d + j] != 0
            }
            if coefs:
                self.constraints.append((coefs, reduced[r, rhs:].copy()))

        for v, const, affine in definitions:
            self._define(v, const, affine)

    def _define(self, v: int, const: FieldMatrix, affine: Dict[int, int]) -> None:
        self.status[v] = SOLVED
        self.const[v] = const
        self.affine[v] = affine
        for ci in sorted(self.var_checks[v]):
            other = self.checks[ci]
            row = other.take_row(v)
            other.payload = other.payload + const[:, np.newaxis] * row[np.newaxis, :]
            for a, coef in affine.items():
                other.add_inactive(a, GF256(coef) * row)
            self.queue.append(ci)
        self.var_checks[v].clear()

    def inactivate(self, v: int) -> None:
        self.status[v] = INACTIVE
        self.pending.append(v)
        self.inactivations += 1
        for ci in sorted(self.var_checks[v]):
            c = self.checks[ci]
            c.add_inactive(v, c.take_row(v))
            self.queue.append(ci)
        self.var_checks[v].clear()

    # -- inactive-variable resolution ----------------------------------

    def stalled_variables(self) -> List[int]:
        """Unknown variables that still appear in an unsolved batch."""
        return [
            v
            for v in range(self.K)
            if self.status[v] == UNKNOWN and self.var_checks[v]
        ]

    def pick_inactivation(self) -> Optional[int]:
        """Variable with the most unsolved neighbors, lowest index on ties."""
        stalled = self.stalled_variables()
        if not stalled:
            return None
        return max(stalled, key=lambda v: (len(self.var_checks[v]), -v))

    def _reduce_constraints(self) -> Optional[FieldMatrix]:
        if not self.pending or not self.constraints:
            self.constraint_rank = 0
            return None
        column = {a: j for j, a in enumerate(self.pending)}
        width = len(self.pending)
        system = gf.zeros(len(self.constraints), width + self.pk)
        for r, (coefs, rhs) in enumerate(self.constraints):
            for a, coef in coefs.items():
                system[r, column[a]] = coef
            system[r, width:] = rhs
        reduced = system.row_reduce(ncols=width)
        self.constraint_rank = int(np.count_nonzero(reduced[:, :width].any(axis=1)))
        return reduced

    def resolve(self, partial: bool = False) -> None:
        """Solve inactive variables from the collected constraints.

        Without ``partial`` this only acts when the constraint rank equals
        the number of pending inactive variables. With ``partial`` every
        inactive variable the constraints pin down is resolved, and solved
        variables whose symbolic part is implied by the constraints become
        numeric too.
        """
        reduced = self._reduce_constraints()
        if reduced is None:
            if partial:
                self._settle_symbolic()
            return
        width = len(self.pending)
        if not partial and self.constraint_rank < width:
            return

        determined: Dict[int, FieldMatrix] = {}
        remaining: List[Constraint] = []
        for r in range(reduced.shape[0]):
            nonzero = np.flatnonzero(reduced[r, :width])
            if nonzero.size == 0:
                continue
            if nonzero.size == 1:
                determined[self.pending[int(nonzero[0])]] = reduced[r, width:].copy()
            else:
                coefs = {self.pending[int(j)]: int(reduced[r, j]) for j in nonzero}
                remaining.append((coefs, reduced[r, width:].copy()))

        for a, value in determined.items():
            self.status[a] = SOLVED
            self.const[a] = value
            self.affine[a] = {}
        for v, affine in self.affine.items():
            for a in [a for a in affine if a in determined]:
                self.const[v] = self.const[v] + GF256(affine.pop(a)) * determined[a]
        for c in self.checks:
            if c.solved:
                continue
            for a, value in determined.items():
                row = c.drop_inactive(a)
                if row is not None:
                    c.payload = c.payload + value[:, np.newaxis] * row[np.newaxis, :]
        self.pending = [a for a in self.pending if a not in determined]
        self.constraints = remaining

        if partial:
            self._settle_symbolic()

    def _settle_symbolic(self) -> None:
        """Make solved values numeric when the constraints fix their symbolic part."""
        if not self.constraints:
            return
        width = len(self.pending)
        column = {a: j for j, a in enumerate(self.pending)}
        rows = []
        for coefs, rhs in self.constraints:
            vec = gf.zeros(1, width + self.pk)
            for a, coef in coefs.items():
                vec[0, column[a]] = coef
            vec[0, width:] = rhs
            rows.append(vec)
        basis = np.concatenate(rows, axis=0).row_reduce(ncols=width)
        pivots = []
        for r in range(basis.shape[0]):
            nonzero = np.flatnonzero(basis[r, :width])
            if nonzero.size:
                pivots.append((r, int(nonzero[0])))

        for v, affine in self.affine.items():
            if not affine:
                continue
            vec = gf.zeros(1, width + self.pk)[0]
            for a, coef in affine.items():
                vec[column[a]] = coef
            value = self.const[v].copy()
            for r, p in pivots:
                if vec[p] != 0:
                    factor = vec[p]
                    vec = vec + factor * basis[r]
                    value = value + factor * basis[r, width:]
            if not np.count_nonzero(vec[:width]):
                self.const[v] = value
                affine.clear()

    # -- results -------------------------------------------------------

    def numeric(self) -> np.ndarray:
        mask = np.zeros(self.K, dtype=bool)
        for v in np.flatnonzero(self.status == SOLVED):
            mask[v] = not self.affine[int(v)]
        return mask

    def result(self) -> DecodeResult:
        mask = self.numeric()
        symbols = gf.zeros(self.pk, self.K)
        for v in np.flatnonzero(mask):
            symbols[:, v] = self.const[int(v)]
        cn = np.array([bool(mask[list(c.support)].all()) for c in self.checks], dtype=bool)
        return DecodeResult(
            decoded_mask=mask,
            decoded_symbols=symbols,
            cn_indicator=cn,
            inactivation_count=self.inactivations,
            constraint_rank=self.constraint_rank,
            peak_retained_columns=self.peak_retained,
        )


def bp_decode(
    batches: Sequence[Batch],
    K: int,
    order: Optional[Sequence[int]] = None,
) -> DecodeResult:
    """Peeling decoder: solve every decodable batch and substitute until stuck.

    Args:
        batches: Received batches; they are not modified.
        K: Number of source symbols.
        order: Optional initial scan order of batch indices.

    Returns:
        DecodeResult with ``inactivation_count == 0``.

    Raises:
        ValueError: If a batch references a variable outside ``[0, K)`` or
            ``order`` is not a permutation of the batch indices.
    """
    engine = _Engine(batches, K)
    engine.load(_scan_order(order, len(batches)))
    engine.propagate()
    return engine.result()


def inactivation_decode(
    batches: Sequence[Batch],
    K: int,
    max_pending: Optional[int] = None,
) -> DecodeResult:
    """BP with inactivation when it stalls.

    On a stall the unknown variable with the most unsolved neighboring
    batches (lowest index on ties) is inactivated and BP resumes. Whenever
    the constraints collected so far have full rank over the pending
    inactive variables, those are solved and substituted back.

    Args:
        batches: Received batches; they are not modified.
        K: Number of source symbols.
        max_pending: Stop inactivating once this many inactive variables
            await constraints. ``None`` inactivates until every batch is
            consumed, which recovers exactly what joint Gaussian elimination
            over all batch equations recovers.

    Raises:
        ValueError: If ``max_pending`` is negative or a batch references a
            variable outside ``[0, K)``.
    """
    if max_pending is not None and max_pending < 0:
        raise ValueError(f"max_pending must be non-negative, got {max_pending!r}")
    engine = _Engine(batches, K)
    engine.load(range(len(batches)))
    engine.propagate()
    while True:
        engine.resolve()
        if max_pending is not None and len(engine.pending) >= max_pending:
            break
        v = engine.pick_inactivation()
        if v is None:
            break
        engine.inactivate(v)
        engine.propagate()
    engine.resolve(partial=True)
    return engine.result()


def layered_decode(batches: Sequence[Batch], K: int, m: int) -> DecodeResult:
    """Decode cyclic-shift layers in order, releasing each finished layer.

    For each layer: load its batches and run BP, inactivate every still
    unknown variable the layer touches (re-propagating after each), then
    solve the inactive variables if the constraints have full rank. A layer
    is fully consumed afterwards, so its payload columns are released.

    Args:
        batches: Received batches, each with a ``layer`` index.
        K: Number of source symbols.
        m: Base-graph row count; no layer may hold more than ``m`` batches.

    Raises:
        MissingLayerError: If any batch has no layer index.
        ValueError: If a layer holds more than ``m`` batches.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m!r}")
    layers: Dict[int, List[int]] = {}
    for i, b in enumerate(batches):
        if b.layer is None:
            raise MissingLayerError(f"Batch {b.id} has no layer index")
        layers.setdefault(int(b.layer), []).append(i)
    for layer, members in layers.items():
        if len(members) > m:
            raise ValueError(
                f"Layer {layer} holds {len(members)} batches, more than m={m}"
            )

    engine = _Engine(batches, K)
    for layer in sorted(layers):
        members = layers[layer]
        engine.load(members)
        engine.propagate()
        touched = sorted({v for i in members for v in engine.checks[i].support})
        for v in touched:
            if engine.status[v] == UNKNOWN:
                engine.inactivate(v)
                engine.propagate()
        engine.resolve()
    engine.resolve(partial=True)
    return engine.result()


def _scan_order(order: Optional[Sequence[int]], n: int) -> List[int]:
    if order is None:
        return list(range(n))
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of range({n})")
    return order
