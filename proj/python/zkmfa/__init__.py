"""Python bindings for the zkmfa core library."""

from ._zkmfa import (
    BiasResult,
    Error,
    FormatError,
    InsufficientStableBits,
    InvalidInput,
    InvalidParameters,
    NotFound,
    ProtocolStateError,
    binomial_test,
    challenge_indices,
    derive_cell_indices,
    loopback,
    quantize_distance,
    select_landmark_indices,
    sha3_256,
    sha3_512,
    shake256,
    sweep_csv,
    table_deserialize,
    table_serialize,
    verify_golden,
)

__all__ = [
    "BiasResult",
    "Error",
    "FormatError",
    "InsufficientStableBits",
    "InvalidInput",
    "InvalidParameters",
    "NotFound",
    "ProtocolStateError",
    "binomial_test",
    "challenge_indices",
    "derive_cell_indices",
    "loopback",
    "quantize_distance",
    "select_landmark_indices",
    "sha3_256",
    "sha3_512",
    "shake256",
    "sweep_csv",
    "table_deserialize",
    "table_serialize",
    "verify_golden",
]
