"""Stability certificates for delayed mass-action reaction networks."""

__version__ = "0.1.0"

from .network import (  # noqa: E402
    Complex,
    ConjugacyWitness,
    DelayedNetwork,
    ParseError,
    Reaction,
    parse_network,
    parse_witness,
    serialize_network,
    serialize_witness,
)

__all__ = [
    "Complex",
    "ConjugacyWitness",
    "DelayedNetwork",
    "ParseError",
    "Reaction",
    "parse_network",
    "parse_witness",
    "serialize_network",
    "serialize_witness",
]
