"""Indicator traces: per-trial decodability of every check and variable node."""

import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from csbats.channel.network import ChannelConfig
from csbats.graphs.tanner import TannerGraph
from csbats.simulation import check_decoder, run_trial

PathLike = Union[str, "os.PathLike[str]"]

TRACE_MAGIC = "csbats-trace 1"


@dataclass
class IndicatorTrace:
    """``T`` decoding runs on one Tanner graph.

    Attributes:
        cn: ``T x N`` boolean matrix; ``cn[t, n]`` is ``C_n`` in run ``t``.
        vn: ``T x K`` boolean matrix; ``vn[t, k]`` is ``V_k`` in run ``t``.
        supports: Column indices of each check node, for neighbor lookup.
        metadata: Graph hash, channel, decoder, coefficient mode, seed.
    """

    cn: np.ndarray
    vn: np.ndarray
    supports: List[List[int]]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.cn = np.asarray(self.cn, dtype=bool)
        self.vn = np.asarray(self.vn, dtype=bool)
        if self.cn.ndim != 2 or self.vn.ndim != 2:
            raise ValueError("Indicator matrices must be 2-D")
        if self.cn.shape[0] != self.vn.shape[0]:
            raise ValueError(
                f"cn has {self.cn.shape[0]} trials but vn has {self.vn.shape[0]}"
            )
        if len(self.supports) != self.cn.shape[1]:
            raise ValueError(
                f"{len(self.supports)} supports for {self.cn.shape[1]} check nodes"
            )

    @property
    def trials(self) -> int:
        return int(self.cn.shape[0])

    @property
    def N(self) -> int:
        return int(self.cn.shape[1])

    @property
    def K(self) -> int:
        return int(self.vn.shape[1])

    @property
    def decoder(self) -> Optional[str]:
        return self.metadata.get("decoder")

    def neighbors(self, k: int) -> List[int]:
        """Check nodes whose support contains variable ``k``."""
        return [n for n, support in enumerate(self.supports) if k in support]

    def alpha(self) -> np.ndarray:
        """Estimated ``P(C_n = 1)`` per check node."""
        return self.cn.mean(axis=0)

    def beta(self) -> np.ndarray:
        """Estimated ``P(V_k = 1)`` per variable node."""
        return self.vn.mean(axis=0)


def collect_trace(
    t: TannerGraph,
    cfg: ChannelConfig,
    decoder: str = "bp",
    T: int = 1000,
    seed: int = 0,
    pk: int = 1,
    max_pending: Optional[int] = None,
) -> IndicatorTrace:
    """Decode ``T`` independent transmissions over the same graph.

    Run ``r`` uses stream address ``(instance=0, repeat=r)`` under ``seed``.

    Raises:
        ValueError: If ``T < 1`` or the decoder kind is unknown.
    """
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T!r}")
    check_decoder(decoder)
    cn = np.zeros((T, t.N), dtype=bool)
    vn = np.zeros((T, t.K), dtype=bool)
    for r in range(T):
        result = run_trial(t, cfg, decoder, seed, 0, r, pk, max_pending)
        cn[r] = result.cn_indicator
        vn[r] = result.vn_indicator
    metadata = {
        "graph_hash": t.digest(),
        "channel": cfg.to_dict(),
        "decoder": decoder,
        "coefficient_mode": cfg.coefficient_mode,
        "master_seed": seed,
        "max_pending": max_pending,
    }
    supports = [[int(k) for k in s] for s in t.supports()]
    return IndicatorTrace(cn, vn, supports, metadata)


def indicator_identity_violations(trace: IndicatorTrace) -> int:
    """Runs and variables where ``V_k`` differs from "some neighbor decodable".

    Zero for every belief-propagation trace. Inactivation can recover a
    variable none of whose check nodes is fully recovered.
    """
    violations = 0
    for k in range(trace.K):
        neighbors = trace.neighbors(k)
        if neighbors:
            any_neighbor = trace.cn[:, neighbors].any(axis=1)
        else:
            any_neighbor = np.zeros(trace.trials, dtype=bool)
        violations += int(np.count_nonzero(any_neighbor != trace.vn[:, k]))
    return violations


def save_trace(trace: IndicatorTrace, path: PathLike) -> None:
    """Write a text header and the bit-packed ``cn`` then ``vn`` rows."""
    header = {
        "T": trace.trials,
        "N": trace.N,
        "K": trace.K,
        "supports": trace.supports,
        "metadata": trace.metadata,
    }
    with open(path, "wb") as f:
        f.write((TRACE_MAGIC + "\n").encode("ascii"))
        f.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        f.write(np.packbits(trace.cn, axis=1).tobytes())
        f.write(np.packbits(trace.vn, axis=1).tobytes())


def load_trace(path: PathLike) -> IndicatorTrace:
    """Read a file written by :func:`save_trace`.

    Raises:
        ValueError: If the magic line is missing or the payload is truncated.
    """
    with open(path, "rb") as f:
        magic = f.readline().decode("ascii", errors="replace").strip()
        if magic != TRACE_MAGIC:
            raise ValueError(f"{path}: not a trace file (got {magic!r})")
        header = json.loads(f.readline().decode("utf-8"))
        body = f.read()
    T, N, K = header["T"], header["N"], header["K"]
    cn_bytes = T * ((N + 7) // 8)
    vn_bytes = T * ((K + 7) // 8)
    if len(body) != cn_bytes + vn_bytes:
        raise ValueError(
            f"{path}: expected {cn_bytes + vn_bytes} indicator bytes, got {len(body)}"
        )
    raw = np.frombuffer(body, dtype=np.uint8)
    cn = np.unpackbits(raw[:cn_bytes].reshape(T, -1), axis=1, count=N).astype(bool)
    vn = np.unpackbits(raw[cn_bytes:].reshape(T, -1), axis=1, count=K).astype(bool)
    return IndicatorTrace(cn, vn, header["supports"], header["metadata"])


def _check_index(value: int, bound: int, name: str) -> int:
    if not 0 <= value < bound:
        raise ValueError(f"{name} {value!r} outside [0, {bound})")
    return value


def check_indices(values: Sequence[int], bound: int, name: str) -> List[int]:
    return [_check_index(int(v), bound, name) for v in values]
