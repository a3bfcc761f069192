from .gf import (
    GF256,
    REDUCTION_POLYNOMIAL,
    FieldMatrix,
    Unsolvable,
    as_matrix,
    field_add,
    field_inv,
    field_mul,
    full_rank_probability,
    identity,
    mat_mul,
    random_matrix,
    rank,
    solve,
    zeros,
)
from .seeding import (
    STAGE_CHANNEL,
    STAGE_ENCODE,
    STAGE_GRAPH,
    STAGE_ORDER,
    STAGE_SOURCE,
    SeedLike,
    as_rng,
    derive_rng,
)

__all__ = [
    # Field arithmetic
    "GF256",
    "REDUCTION_POLYNOMIAL",
    "FieldMatrix",
    "Unsolvable",
    "as_matrix",
    "field_add",
    "field_inv",
    "field_mul",
    "full_rank_probability",
    "identity",
    "mat_mul",
    "random_matrix",
    "rank",
    "solve",
    "zeros",
    # Seeding
    "STAGE_CHANNEL",
    "STAGE_ENCODE",
    "STAGE_GRAPH",
    "STAGE_ORDER",
    "STAGE_SOURCE",
    "SeedLike",
    "as_rng",
    "derive_rng",
]
