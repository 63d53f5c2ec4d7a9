"""States, observables and Kraus channels.

Operators on the dual space are stored as ordinary matrices in the dual
basis, so the transpose of an operator is plain (non-conjugating) matrix
transposition in the computational basis.

A channel may be defined on a subspace of an ambient space, typically the
support of a state.  Such a channel carries an ``embedding``: an isometry
whose columns span its domain inside the ambient space.  Kraus operators act
on domain coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionError,
    DomainError,
    NotAChannelError,
    NotNormalizedError,
    NotPSDError,
    NotTracePreservingError,
    ParameterError,
)
from .linalg import SpectralDecomposition

STATE_TOL = 1e-10
TP_TOL = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator backed by Philox-4x64, a counter-based bit generator."""
    return np.random.Generator(np.random.Philox(int(seed)))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussians, ``E|z|^2 = 1``."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dim: int
    mat: np.ndarray
    spectrum: SpectralDecomposition
    rank_tol: float

    @cached_property
    def support_basis(self) -> np.ndarray:
        """Eigenvectors with eigenvalue above ``rank_tol * lambda_max``, descending."""
        return linalg.support_basis(self.spectrum, self.rank_tol)

    @property
    def support_rank(self) -> int:
        return self.support_basis.shape[1]

    @property
    def full_rank(self) -> bool:
        return self.support_rank == self.dim

    @cached_property
    def support_projector(self) -> np.ndarray:
        v = self.support_basis
        return v @ v.conj().T

    @cached_property
    def domain_basis(self) -> np.ndarray | None:
        """Embedding used for channels defined on the support; None if full rank."""
        return None if self.full_rank else self.support_basis

    @cached_property
    def sqrt(self) -> np.ndarray:
        w, v = self.spectrum
        return (v * np.sqrt(w)) @ v.conj().T

    @cached_property
    def pinv_sqrt(self) -> np.ndarray:
        v = self.support_basis
        w = self.spectrum.eigenvalues[: v.shape[1]]
        return (v / np.sqrt(w)) @ v.conj().T


def validate_state(m, rank_tol: float | None = None, tol: float = STATE_TOL) -> DensityMatrix:
    m = linalg.as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"state must be square, got {m.shape}")
    h = linalg.hermitian_part(m, tol)
    spec = linalg.herm_eig(h)
    w = spec.eigenvalues
    if w[-1] < -tol:
        raise NotPSDError(f"state has eigenvalue {w[-1]:.3e} < -{tol:g}")
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > tol:
        raise NotNormalizedError(f"state has trace {tr!r}")
    spec = SpectralDecomposition(np.clip(w, 0.0, None), spec.eigenvectors)
    d = m.shape[0]
    if rank_tol is None:
        rank_tol = linalg.default_rank_tol(d)
    return DensityMatrix(d, h, spec, rank_tol)


def random_state(d: int, rank: int, seed: int) -> DensityMatrix:
    """``G G^dagger / tr(G G^dagger)`` with ``G`` a ``d x rank`` complex Gaussian."""
    if not 1 <= rank <= d:
        raise ParameterError(f"rank must lie in [1, {d}], got {rank}")
    g = complex_gaussian(make_rng(seed), (d, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return validate_state(m)


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > 1e-10:
        raise ParameterError(f"state vector has norm {n!r}")
    return validate_state(np.outer(psi, psi.conj()))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus: tuple[np.ndarray, ...]
    embedding: np.ndarray | None = None
    tp_residual: float = field(default=0.0)

    @property
    def din(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dout(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.din if self.embedding is None else self.embedding.shape[0]

    @property
    def n_kraus(self) -> int:
        return len(self.kraus)

    @cached_property
    def ambient_kraus(self) -> np.ndarray:
        """Kraus operators composed with the domain compression, stacked."""
        k = np.stack(self.kraus)
        if self.embedding is None:
            return k
        return k @ self.embedding.conj().T

    def restrict(self, v) -> "KrausChannel":
        """Compose with an isometry ``v`` from a new domain into the current one.

        The result carries ``v`` as its embedding (into this channel's ambient
        space when this channel has no embedding of its own).
        """
        v = linalg.as_cmatrix(v)
        base = self if self.embedding is None else KrausChannel(tuple(self.ambient_kraus))
        if v.shape[0] != base.din:
            raise DimensionError(f"isometry has {v.shape[0]} rows, channel input is {base.din}")
        return validate_channel([k @ v for k in base.kraus], v.shape[1], base.dout, embedding=v)


def validate_channel(kraus: Sequence, din: int, dout: int, embedding=None,
                     tol: float = TP_TOL) -> KrausChannel:
    if len(kraus) == 0:
        raise ParameterError("Kraus list is empty")
    ks = tuple(linalg.as_cmatrix(k) for k in kraus)
    for k in ks:
        if k.shape != (dout, din):
            raise DimensionError(f"Kraus operator has shape {k.shape}, expected {(dout, din)}")
    s = sum(k.conj().T @ k for k in ks)
    res = float(np.linalg.norm(s - np.eye(din)))
    if res > tol:
        raise NotTracePreservingError(f"|sum K^dagger K - I|_F = {res:.3e} exceeds {tol:g}")
    if embedding is not None:
        embedding = linalg.as_cmatrix(embedding)
        if embedding.shape[1] != din:
            raise DimensionError(f"embedding has {embedding.shape[1]} columns, din is {din}")
        gram = embedding.conj().T @ embedding
        if np.abs(gram - np.eye(din)).max() > 1e-10:
            raise ParameterError("embedding columns are not orthonormal")
    return KrausChannel(ks, embedding, res)


def random_channel(din: int, dout: int, kraus_rank: int, seed: int) -> KrausChannel:
    """Channel from the isometry factor of a QR decomposition of a Gaussian matrix."""
    if not 1 <= kraus_rank <= din * dout:
        raise ParameterError(f"kraus_rank must lie in [1, {din * dout}], got {kraus_rank}")
    if dout * kraus_rank < din:
        raise ParameterError(f"dout * kraus_rank = {dout * kraus_rank} < din = {din}")
    g = complex_gaussian(make_rng(seed), (dout * kraus_rank, din))
    q, r = np.linalg.qr(g)
    # fix the phase ambiguity of QR so the output is Haar distributed
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return validate_channel(list(q.reshape(kraus_rank, dout, din)), din, dout)


def identity_channel(d: int) -> KrausChannel:
    return validate_channel([np.eye(d)], d, d)


def unitary_channel(u) -> KrausChannel:
    u = linalg.as_cmatrix(u)
    return validate_channel([u], u.shape[1], u.shape[0])


def replacer_channel(omega: DensityMatrix, din: int) -> KrausChannel:
    """``X -> tr[X] omega`` with Kraus operators ``sqrt(mu_j) |g_j><e_i|``."""
    w, v = omega.spectrum
    ks = []
    for j in range(omega.dim):
        if w[j] <= 0:
            continue
        for i in range(din):
            k = np.zeros((omega.dim, din), dtype=np.complex128)
            k[:, i] = np.sqrt(w[j]) * v[:, j]
            ks.append(k)
    return validate_channel(ks, din, omega.dim)


def _compress(phi: KrausChannel, x: np.ndarray) -> np.ndarray:
    if x.shape == (phi.din, phi.din):
        return x
    if phi.embedding is not None and x.shape == (phi.ambient_dim, phi.ambient_dim):
        v = phi.embedding
        return v.conj().T @ x @ v
    raise DimensionError(f"operator of shape {x.shape} does not fit channel input {phi.din}")


def apply_channel(phi: KrausChannel, x) -> np.ndarray:
    """``sum_m K_m x K_m^dagger``.

    ``x`` may be given in domain coordinates or, for embedded channels, as an
    operator on the ambient space (it is then compressed onto the domain).
    """
    x = _compress(phi, linalg.as_cmatrix(x))
    k = np.stack(phi.kraus)
    return np.einsum("mij,jk,mlk->il", k, x, k.conj(), optimize=True)


def adjoint_apply(phi: KrausChannel, a, ambient: bool = False) -> np.ndarray:
    """Heisenberg-picture action ``sum_m K_m^dagger a K_m``.

    With ``ambient=True`` the result is embedded back into the ambient space.
    """
    a = linalg.as_cmatrix(a)
    if a.shape != (phi.dout, phi.dout):
        raise DimensionError(f"operator of shape {a.shape} does not fit channel output {phi.dout}")
    k = np.stack(phi.ambient_kraus if ambient else phi.kraus)
    return np.einsum("mji,jk,mkl->il", k.conj(), a, k, optimize=True)


def canonical_purification(rho: DensityMatrix) -> np.ndarray:
    """Column vector ``|sqrt(rho)>>`` in ``H (x) H*``."""
    return linalg.vectorize(rho.sqrt)


def choi(phi: KrausChannel) -> np.ndarray:
    """``sum_ij Phi(|i><j|) (x) (|j><i|)^T``, output factor first."""
    vecs = np.stack([k.reshape(-1) for k in phi.kraus], axis=1)
    return vecs @ vecs.conj().T


def choi_to_kraus(j, din: int, dout: int, embedding=None,
                  rank_tol: float | None = None, marginal_tol: float = 1e-8) -> KrausChannel:
    j = linalg.as_cmatrix(j)
    if j.shape != (din * dout, din * dout):
        raise DimensionError(f"Choi matrix has shape {j.shape}, expected side {din * dout}")
    spec = linalg.psd_eig(j)
    marg = linalg.partial_trace(spec.reconstruct(), (dout, din), keep="second")
    dev = float(np.abs(marg - np.eye(din)).max())
    if dev > marginal_tol:
        raise NotAChannelError(f"input marginal deviates from identity by {dev:.3e}")
    basis = linalg.support_basis(spec, rank_tol)
    w = spec.eigenvalues[: basis.shape[1]]
    ks = [np.sqrt(w[i]) * basis[:, i].reshape(dout, din) for i in range(basis.shape[1])]
    return validate_channel(ks, din, dout, embedding=embedding, tol=marginal_tol * din)


def channel_on_support(phi: KrausChannel, rho: DensityMatrix,
                       tol: float = 1e-8) -> KrausChannel:
    """Bring ``phi`` into the form of a channel defined on ``supp(rho)``.

    Accepted inputs: a channel already embedded onto ``supp(rho)``, a channel on
    the whole space (restricted here), or an unembedded channel whose input
    dimension equals the rank of ``rho`` (interpreted in the coordinates of
    ``rho.support_basis``).
    """
    r, d = rho.support_rank, rho.dim
    if phi.dout != d:
        raise DomainError(f"channel output dimension {phi.dout} differs from state dimension {d}")
    if phi.embedding is not None:
        if phi.ambient_dim != d or phi.din != r:
            raise DomainError("channel embedding does not match the state's support")
        p = phi.embedding @ phi.embedding.conj().T
        if np.abs(p - rho.support_projector).max() > tol:
            raise DomainError("channel domain differs from the support of the state")
        return phi
    if phi.din == d:
        return phi if r == d else phi.restrict(rho.support_basis)
    if phi.din == r:
        return KrausChannel(phi.kraus, rho.support_basis, phi.tp_residual)
    raise DomainError(f"channel input dimension {phi.din} fits neither dim {d} nor rank {r}")


@dataclass(frozen=True, eq=False)
class ObservableSet:
    dim: int
    observables: tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)


def make_observables(obs: Sequence, tol: float = STATE_TOL) -> ObservableSet:
    if len(obs) == 0:
        raise ParameterError("observable list is empty")
    mats = tuple(linalg.hermitian_part(a, tol) for a in obs)
    d = mats[0].shape[0]
    for a in mats:
        if a.shape != (d, d):
            raise DimensionError(f"observables have mixed dimensions {a.shape} vs {(d, d)}")
    return ObservableSet(d, mats)


def random_observables(d: int, k: int, seed: int) -> ObservableSet:
    rng = make_rng(seed)
    mats = []
    for _ in range(k):
        g = complex_gaussian(rng, (d, d))
        mats.append((g + g.conj().T) / 2)
    return make_observables(mats)
