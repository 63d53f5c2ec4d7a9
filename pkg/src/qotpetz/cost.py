"""Quadratic transport cost of couplings and channels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .coupling import Coupling, channel_to_coupling, swap_matrix
from .errors import DimensionError, NumericConsistencyError
from .objects import DensityMatrix, KrausChannel, ObservableSet, adjoint_apply, apply_channel, channel_on_support

# above this dimension the d^2 x d^2 cost operator is not formed
COUPLING_ROUTE_MAX_DIM = 8


def difference_operator(a: np.ndarray) -> np.ndarray:
    """``A (x) I - I (x) A^T`` on ``H (x) H*``."""
    d = a.shape[0]
    eye = np.eye(d)
    return linalg.kron(a, eye) - linalg.kron(eye, a.T)


@dataclass(frozen=True, eq=False)
class CostOperator:
    d: int
    mat: np.ndarray
    source: ObservableSet
    terms: tuple[np.ndarray, ...]


def cost_operator(obs: ObservableSet) -> CostOperator:
    """``sum_k (A_k (x) I - I (x) A_k^T)^2``."""
    terms = []
    for a in obs.observables:
        if a.shape != (obs.dim, obs.dim):
            raise DimensionError(f"observable of shape {a.shape} in a {obs.dim}-dim set")
        diff = difference_operator(a)
        terms.append(diff @ diff)
    mat = sum(terms)
    return CostOperator(obs.dim, mat, obs, tuple(terms))


def _real_trace(pi_mat: np.ndarray, c: np.ndarray) -> float:
    # tr[pi c] for Hermitian c equals vdot(c, pi)
    z = np.vdot(c, pi_mat)
    if abs(z.imag) > 1e-8:
        raise NumericConsistencyError(f"cost has imaginary residue {z.imag:.3e}")
    return float(z.real)


def coupling_cost(pi: Coupling | np.ndarray, obs: ObservableSet | CostOperator) -> float:
    """``tr[pi C_A]``; may be very slightly negative from rounding."""
    c = obs if isinstance(obs, CostOperator) else cost_operator(obs)
    mat = pi.mat if isinstance(pi, Coupling) else np.asarray(pi)
    if mat.shape != c.mat.shape:
        raise DimensionError(f"coupling of shape {mat.shape} vs cost operator {c.mat.shape}")
    return _real_trace(mat, c.mat)


def channel_cost_terms(phi: KrausChannel, rho: DensityMatrix, obs: ObservableSet) -> list[float]:
    """Per-observable ``tr[Phi(rho) A^2] + tr[rho A^2] - 2 tr[sqrt(rho) A sqrt(rho) Phi^dagger(A)]``."""
    if obs.dim != rho.dim:
        raise DimensionError(f"observables act on dim {obs.dim}, state on dim {rho.dim}")
    phi = channel_on_support(phi, rho)
    out = apply_channel(phi, rho.mat)
    s = rho.sqrt
    terms = []
    for a in obs.observables:
        a2 = a @ a
        cross = np.trace(s @ a @ s @ adjoint_apply(phi, a, ambient=True))
        t = np.trace(out @ a2) + np.trace(rho.mat @ a2) - 2 * cross
        if abs(t.imag) > 1e-8:
            raise NumericConsistencyError(f"channel cost term has imaginary residue {t.imag:.3e}")
        terms.append(float(t.real))
    return terms


@dataclass(frozen=True)
class CostReport:
    coupling_cost: float | None
    channel_cost: float
    per_observable: list[float]
    consistency_residual: float | None

    def to_dict(self) -> dict:
        clamp = lambda x: None if x is None else max(0.0, x)  # noqa: E731
        return {
            "coupling_cost": clamp(self.coupling_cost),
            "channel_cost": clamp(self.channel_cost),
            "per_observable": [clamp(x) for x in self.per_observable],
            "consistency_residual": self.consistency_residual,
        }


def channel_cost(phi: KrausChannel, rho: DensityMatrix, obs: ObservableSet) -> CostReport:
    """Cost of ``phi`` as a transport plan from ``rho`` to ``phi(rho)``.

    Computed from the channel-side formula and, for ``d <= 8``, also through
    the coupling ``Pi_phi`` against the explicit cost operator; the gap between
    the two routes is the consistency residual. Values are raw here; only
    ``to_dict`` clamps rounding negatives to zero.
    """
    phi = channel_on_support(phi, rho)
    terms = channel_cost_terms(phi, rho, obs)
    ch = float(np.sum(terms))
    if rho.dim > COUPLING_ROUTE_MAX_DIM:
        return CostReport(None, ch, terms, None)
    pi = channel_to_coupling(phi, rho)
    c = cost_operator(obs)
    per = [_real_trace(pi.mat, t) for t in c.terms]
    cc = float(np.sum(per))
    return CostReport(cc, ch, per, abs(ch - cc))


def swap_invariance_residual(c: CostOperator) -> float:
    """Max entrywise deviation of ``C_A`` from its swap transpose."""
    return float(np.abs(swap_matrix(c.mat) - c.mat).max())
