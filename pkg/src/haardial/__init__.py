"""Haar-random unitaries from independently sampled mesh parameters."""
from ._backend import NAME as BACKEND
from .circuit import (
    CircuitSpec,
    ComponentParam,
    Convention,
    Scheme,
    build_block,
    build_unitary,
    clements_layout,
    clements_sequence,
    component_gate,
    embed_two_mode,
)
from .errors import (
    DegenerateInputError,
    DomainError,
    HaarDialError,
    ShapeError,
    ValidationError,
)
from .sampler import (
    RngStream,
    sample_circuit,
    sample_phase,
    sample_reflectivity,
    sample_theta,
    sample_unitaries,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CircuitSpec",
    "ComponentParam",
    "Convention",
    "DegenerateInputError",
    "DomainError",
    "HaarDialError",
    "RngStream",
    "Scheme",
    "ShapeError",
    "ValidationError",
    "build_block",
    "build_unitary",
    "clements_layout",
    "clements_sequence",
    "component_gate",
    "embed_two_mode",
    "sample_circuit",
    "sample_phase",
    "sample_reflectivity",
    "sample_theta",
    "sample_unitaries",
]
