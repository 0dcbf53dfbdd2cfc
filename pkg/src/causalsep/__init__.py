"""Process matrices, causal-order cones and witnesses of causal nonseparability."""

from .robustness import (
    construct_witness,
    generalized_robustness,
    random_robustness,
    robustness_at_visibility,
    verify_witness,
)
from .spaces import BI, TRI, CausalOrder, ProcessMatrix, Scenario, is_valid_process
from .tensor import Operator, SystemLayout, hs_inner
from .witness import Witness

__version__ = "0.1.0"

__all__ = [
    "BI", "TRI", "CausalOrder", "ProcessMatrix", "Scenario", "is_valid_process", "Operator", "SystemLayout",
    "hs_inner", "Witness", "construct_witness", "generalized_robustness", "random_robustness",
    "robustness_at_visibility", "verify_witness",
]
