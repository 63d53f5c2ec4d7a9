"""Channel/coupling duality for quadratic quantum optimal transport.

Finite-dimensional tools for couplings of quantum states, the channels that
induce them, their quadratic transport cost, and the Petz recovery channel.
"""

from .coupling import (
    Coupling,
    channel_to_coupling,
    coupling_to_channel,
    marginals,
    swap_transpose,
)
from .cost import CostOperator, CostReport, channel_cost, cost_operator, coupling_cost
from .objects import (
    DensityMatrix,
    KrausChannel,
    ObservableSet,
    adjoint_apply,
    apply_channel,
    canonical_purification,
    choi,
    choi_to_kraus,
    make_observables,
    random_channel,
    random_observables,
    random_state,
    validate_channel,
    validate_state,
)
from .recovery import TheoremReport, petz_recovery, verify_cost_equality, verify_petz_swap
from .solver import SolverConfig, SolverResult, candidate_bound, pure_state_cost, solve, symmetry_check

__version__ = "0.1.0"

__all__ = [
    "Coupling", "CostOperator", "CostReport", "DensityMatrix", "KrausChannel",
    "ObservableSet", "SolverConfig", "SolverResult", "TheoremReport",
    "adjoint_apply", "apply_channel", "candidate_bound", "canonical_purification",
    "channel_cost", "channel_to_coupling", "choi", "choi_to_kraus", "cost_operator",
    "coupling_cost", "coupling_to_channel", "make_observables", "marginals",
    "petz_recovery", "pure_state_cost", "random_channel", "random_observables",
    "random_state", "solve", "swap_transpose", "symmetry_check", "validate_channel",
    "validate_state", "verify_cost_equality", "verify_petz_swap",
]
