"""Finite-volume simulator of shock waves in a fluid-filled cylindrical chamber."""

__version__ = "1.0.0"

from .eos import (  # noqa: F401
    ConservedState,
    InvalidStateError,
    MaterialParams,
    PrimitiveState,
    air,
    polystyrene,
    water,
)
