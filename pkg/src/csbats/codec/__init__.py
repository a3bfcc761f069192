from .batch import (
    COEFFICIENT_MODES,
    Batch,
    SourceBlock,
    decodable,
    encode,
    erase,
    recode,
    substitute,
)
from .decoder import (
    DecodeResult,
    MissingLayerError,
    bp_decode,
    inactivation_decode,
    layered_decode,
)

DECODERS = {
    "bp": bp_decode,
    "inactivation": inactivation_decode,
    "layered": layered_decode,
}

__all__ = [
    # Batches
    "COEFFICIENT_MODES",
    "Batch",
    "SourceBlock",
    "decodable",
    "encode",
    "erase",
    "recode",
    "substitute",
    # Decoders
    "DECODERS",
    "DecodeResult",
    "MissingLayerError",
    "bp_decode",
    "inactivation_decode",
    "layered_decode",
]
