"""One encode -> transmit -> decode trial on a fixed Tanner graph."""

from typing import List, Optional

from csbats.channel.network import ChannelConfig, transmit
from csbats.codec.batch import Batch, SourceBlock, encode
from csbats.codec.decoder import (
    DecodeResult,
    bp_decode,
    inactivation_decode,
    layered_decode,
)
from csbats.core.seeding import STAGE_CHANNEL, STAGE_ENCODE, STAGE_SOURCE, derive_rng
from csbats.graphs.tanner import TannerGraph

DECODER_KINDS = ("bp", "inactivation", "layered")


def check_decoder(kind: str) -> str:
    if kind not in DECODER_KINDS:
        raise ValueError(f"decoder must be one of {DECODER_KINDS}, got {kind!r}")
    return kind


def trial_source(
    K: int, pk: int, master_seed: int, instance: int = 0, repeat: int = 0
) -> SourceBlock:
    """The source block :func:`run_trial` uses for this stream address."""
    return SourceBlock.random(K, pk, derive_rng(master_seed, instance, repeat, STAGE_SOURCE))


def received_batches(
    t: TannerGraph,
    channel: ChannelConfig,
    master_seed: int,
    instance: int = 0,
    repeat: int = 0,
    pk: int = 1,
) -> List[Batch]:
    """Encode a fresh source over ``t`` and pass every batch through ``channel``."""
    src = trial_source(t.K, pk, master_seed, instance, repeat)
    batches = encode(
        src,
        t,
        channel.M,
        derive_rng(master_seed, instance, repeat, STAGE_ENCODE),
        channel.coefficient_mode,
    )
    rng = derive_rng(master_seed, instance, repeat, STAGE_CHANNEL)
    return [transmit(b, channel, rng) for b in batches]


def decode(
    batches: List[Batch],
    t: TannerGraph,
    kind: str,
    max_pending: Optional[int] = None,
) -> DecodeResult:
    """Dispatch to the named decoder.

    Raises:
        ValueError: If the kind is unknown, or layered decoding is asked of a
            graph without cyclic-shift layers.
    """
    check_decoder(kind)
    if kind == "bp":
        return bp_decode(batches, t.K)
    if kind == "inactivation":
        return inactivation_decode(batches, t.K, max_pending=max_pending)
    if t.m is None:
        raise ValueError("Layered decoding needs a cyclic-shift Tanner graph")
    return layered_decode(batches, t.K, t.m)


def run_trial(
    t: TannerGraph,
    channel: ChannelConfig,
    decoder: str,
    master_seed: int,
    instance: int = 0,
    repeat: int = 0,
    pk: int = 1,
    max_pending: Optional[int] = None,
) -> DecodeResult:
    """Run one trial; identical arguments give an identical result.

    The source, generator matrices and channel each draw from their own
    stream ``(instance, repeat, stage)`` under ``master_seed``, so two
    decoders run with the same address see the same received batches.
    """
    batches = received_batches(t, channel, master_seed, instance, repeat, pk)
    return decode(batches, t, decoder, max_pending)
