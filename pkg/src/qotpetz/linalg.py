"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every routine
that consumes a Hermitian operator symmetrizes it as ``(m + m^dagger) / 2``
first, so that products accumulating asymmetry at machine precision are
accepted.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    DimensionLimitError,
    NotHermitianError,
    NotPSDError,
    NumericError,
)

MAX_DIM = 4096
HERMITIAN_TOL = 1e-10

FactorSelector = Literal["first", "second"]


class SpectralDecomposition(NamedTuple):
    """Eigenvalues sorted descending with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_cmatrix(m) -> np.ndarray:
    """Coerce to a 2-D complex128 array, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    return a


def _square(m: np.ndarray, what: str = "matrix") -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {m.shape}")


def default_rank_tol(d: int) -> float:
    return 1e-12 * d


def kron(a, b) -> np.ndarray:
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise DimensionLimitError(
            f"tensor product of shape ({rows}, {cols}) exceeds MAX_DIM={MAX_DIM}"
        )
    return np.kron(a, b)


def partial_trace(m, dims: tuple[int, int], keep: FactorSelector = "first") -> np.ndarray:
    """Trace out one factor of an operator on a bipartite space.

    With ``keep="first"`` the second factor is traced out and a ``d1 x d1``
    matrix is returned; ``keep="second"`` does the converse.
    """
    m = as_cmatrix(m)
    d1, d2 = dims
    _square(m)
    if m.shape[0] != d1 * d2:
        raise DimensionError(
            f"side {m.shape[0]} does not match factor dimensions {d1} x {d2}"
        )
    t = m.reshape(d1, d2, d1, d2)
    if keep == "first":
        return np.einsum("ijkj->ik", t)
    if keep == "second":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'first' or 'second', not {keep!r}")


def hermitian_part(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(h + h^dagger)/2`` after checking the deviation is small."""
    h = as_cmatrix(h)
    _square(h)
    dev = np.linalg.norm(h - h.conj().T)
    scale = np.linalg.norm(h)
    if dev > tol * max(scale, 1e-300) and dev > 0:
        raise NotHermitianError(
            f"Hermitian deviation {dev:.3e} exceeds {tol:g} * |h|_F = {tol * scale:.3e}"
        )
    return 0.5 * (h + h.conj().T)


def herm_eig(h, tol: float = HERMITIAN_TOL) -> SpectralDecomposition:
    hs = hermitian_part(h, tol)
    try:
        w, v = np.linalg.eigh(hs)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigh failed to converge on a {hs.shape[0]}-dim matrix: {exc}") from exc
    # eigh is ascending; a stable sort on -w keeps ties in original order
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order])


def psd_eig(p) -> SpectralDecomposition:
    """Spectral decomposition of a PSD matrix with tiny negatives clipped to 0."""
    spec = herm_eig(p)
    w = spec.eigenvalues
    eps = 1e-10 * max(1.0, float(w[0]) if w.size else 1.0)
    if w.size and w[-1] < -eps:
        raise NotPSDError(f"smallest eigenvalue {w[-1]:.3e} is below -{eps:.1e}")
    return SpectralDecomposition(np.clip(w, 0.0, None), spec.eigenvectors)


def psd_sqrt(p) -> np.ndarray:
    w, v = psd_eig(p)
    return (v * np.sqrt(w)) @ v.conj().T


def support_basis(spec: SpectralDecomposition, rank_tol: float | None = None) -> np.ndarray:
    """Columns spanning the numerical support of a PSD spectral decomposition."""
    w, v = spec
    if rank_tol is None:
        rank_tol = default_rank_tol(v.shape[0])
    if w.size == 0 or w[0] <= 0:
        return v[:, :0]
    return v[:, w > rank_tol * w[0]]


def pinv_sqrt(p, rank_tol: float | None = None) -> np.ndarray:
    """Pseudo-inverse of the square root of a PSD matrix.

    Eigenvalues at or below ``rank_tol * lambda_max`` are treated as zero; the
    zero matrix maps to the zero matrix.
    """
    w, v = psd_eig(p)
    d = v.shape[0]
    if rank_tol is None:
        rank_tol = default_rank_tol(d)
    if w.size == 0 or w[0] <= 0:
        return np.zeros((d, d), dtype=np.complex128)
    keep = w > rank_tol * w[0]
    vk = v[:, keep]
    return (vk / np.sqrt(w[keep])) @ vk.conj().T


def trace_norm(m) -> float:
    m = as_cmatrix(m)
    _square(m)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt pairing ``tr(a^dagger b)``."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def vectorize(x) -> np.ndarray:
    """Row-major vectorization: ``sum_ij x_ij e_i (x) f_j`` as a column."""
    x = as_cmatrix(x)
    return x.reshape(-1, 1)


def rel_frobenius(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
