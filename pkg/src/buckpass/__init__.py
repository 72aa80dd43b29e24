"""Buck-passing and buck-holding games on directed graphs."""

from .errors import (
    BuckPassError,
    CapExceededError,
    ConsistencyError,
    ContractViolation,
    InputError,
    NumericError,
    PreconditionError,
)
from .graph import Graph, InitialMeasure, parse_graph, unicycle_decomposition

__version__ = "0.1.0"

__all__ = [
    "BuckPassError",
    "CapExceededError",
    "ConsistencyError",
    "ContractViolation",
    "Graph",
    "InitialMeasure",
    "InputError",
    "NumericError",
    "PreconditionError",
    "parse_graph",
    "unicycle_decomposition",
]
