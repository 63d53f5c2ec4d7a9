"""The correspondence between channels and couplings, and the swap transpose.

Couplings are operators on ``H (x) H*`` with the Kronecker order ``H`` first
and ``H*`` second, so a row index is the pair (H-index, dual-index).  Tracing
out ``H*`` is ``partial_trace(..., keep="first")``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, NotACouplingOfRhoError, NotPSDError, ReconstructionError
from .objects import (
    DensityMatrix,
    KrausChannel,
    channel_on_support,
    choi_to_kraus,
    validate_state,
)

log = logging.getLogger(__name__)

COUPLING_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Coupling:
    d: int
    mat: np.ndarray
    first_marginal: DensityMatrix
    second_marginal_T: np.ndarray

    @classmethod
    def from_matrix(cls, mat, tol: float = COUPLING_TOL) -> "Coupling":
        """Validate ``mat`` as a state on ``H (x) H*`` and cache its marginals."""
        mat = linalg.as_cmatrix(mat)
        n = mat.shape[0]
        d = int(round(np.sqrt(n)))
        if d * d != n or mat.shape[1] != n:
            raise DimensionError(f"coupling side {mat.shape} is not d^2 x d^2")
        h = linalg.hermitian_part(mat, tol)
        w = np.linalg.eigvalsh(h)
        if w[0] < -tol:
            raise NotPSDError(f"coupling has eigenvalue {w[0]:.3e}")
        first = validate_state(linalg.partial_trace(h, (d, d), "first"), tol=tol)
        second = linalg.partial_trace(h, (d, d), "second")
        return cls(d, h, first, second)

    def marginals(self) -> tuple[DensityMatrix, np.ndarray]:
        return self.first_marginal, self.second_marginal_T


def marginals(pi: Coupling) -> tuple[DensityMatrix, np.ndarray]:
    """``(tr_{H*} pi, tr_H pi)``; for ``pi`` in C(rho, omega) this is ``(omega, rho^T)``."""
    return pi.marginals()


def channel_to_coupling(phi: KrausChannel, rho: DensityMatrix) -> Coupling:
    """``(Phi (x) id)(|sqrt rho>><<sqrt rho|)``.

    Each Kraus term contributes ``|K_m sqrt(rho)>><<K_m sqrt(rho)|`` because
    ``(A (x) I)|X>> = |AX>>``.
    """
    phi = channel_on_support(phi, rho)
    k = phi.ambient_kraus
    vecs = (k @ rho.sqrt).reshape(k.shape[0], -1)
    return Coupling.from_matrix(vecs.T @ vecs.conj())


def swap_matrix(m) -> np.ndarray:
    """Linear extension of ``X (x) Y^T -> Y (x) X^T`` on ``d^2 x d^2`` matrices.

    Entrywise ``out[(a, al), (b, be)] = m[(be, b), (al, a)]``, a full reversal
    of the four tensor indices.
    """
    m = linalg.as_cmatrix(m)
    n = m.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or m.shape[1] != n:
        raise DimensionError(f"swap transpose needs a d^2 x d^2 matrix, got {m.shape}")
    return m.reshape(d, d, d, d).transpose(3, 2, 1, 0).reshape(n, n)


def swap_transpose(pi: Coupling) -> Coupling:
    return Coupling.from_matrix(swap_matrix(pi.mat))


def coupling_to_channel(pi: Coupling, rho: DensityMatrix,
                        tol: float = 1e-8) -> KrausChannel:
    """Recover the channel on ``supp(rho)`` whose coupling with ``rho`` is ``pi``.

    The Choi matrix on the support is
    ``(I (x) B) pi (I (x) B)^dagger`` with ``B = (rho^{-1/2} V)^T`` and ``V`` the
    support isometry, using ``|sqrt rho>> = (I (x) sqrt(rho)^T) |I>>``.
    """
    d = rho.dim
    if pi.d != d:
        raise DimensionError(f"coupling factor dimension {pi.d} differs from state dimension {d}")
    dev = float(np.abs(pi.second_marginal_T - rho.mat.T).max())
    if dev > tol:
        raise NotACouplingOfRhoError(f"second marginal differs from rho^T by {dev:.3e}")
    v = rho.domain_basis
    if v is None:
        v = np.eye(d, dtype=np.complex128)
    else:
        pt = np.kron(np.eye(d), rho.support_projector.T)
        outside = linalg.trace_norm(pi.mat - pt @ pi.mat @ pt)
        if outside > 1e-8:
            log.warning("discarding coupling mass outside supp(rho): trace norm %.3e", outside)
    r = v.shape[1]
    b = (rho.pinv_sqrt @ v).T
    lift = np.kron(np.eye(d), b)
    j = lift @ pi.mat @ lift.conj().T
    j = 0.5 * (j + j.conj().T)
    marg = linalg.partial_trace(j, (d, r), "second")
    tp_dev = float(np.abs(marg - np.eye(r)).max())
    if tp_dev > 1e-7:
        raise ReconstructionError(
            f"reconstructed Choi matrix violates trace preservation by {tp_dev:.3e}"
        )
    return choi_to_kraus(j, r, d, embedding=rho.domain_basis, marginal_tol=1e-7)
