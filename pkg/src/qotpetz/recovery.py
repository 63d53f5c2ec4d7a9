"""Petz recovery channel and numerical checks of its coupling-level identity.

For a channel ``Phi`` on ``supp(rho)`` with ``omega = Phi(rho)`` the recovery
channel is ``X -> rho^{1/2} Phi^dagger(omega^{-1/2} X omega^{-1/2}) rho^{1/2}``,
defined on ``supp(omega)``, with pseudo-inverse square roots.  Its coupling
with ``omega`` equals the swap transpose of the coupling of ``Phi`` with
``rho``; ``verify_petz_swap`` measures how closely that holds.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg
from .coupling import channel_to_coupling, swap_matrix
from .cost import channel_cost
from .errors import DegenerateOutputError, TheoremViolation
from .objects import (
    DensityMatrix,
    KrausChannel,
    ObservableSet,
    adjoint_apply,
    apply_channel,
    channel_on_support,
    validate_channel,
    validate_state,
)

TOL_THEOREM = 1e-9
TOL_RECOVERY = 1e-9
TOL_COST = 1e-9
TOL_MATRIX_UNIT = 1e-9


def output_state(phi: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    phi = channel_on_support(phi, rho)
    return validate_state(apply_channel(phi, rho.mat), rank_tol=rho.rank_tol)


def petz_recovery(phi: KrausChannel, rho: DensityMatrix,
                  omega: DensityMatrix | None = None) -> KrausChannel:
    """Kraus form ``R_m = sqrt(rho) K_m^dagger omega^{-1/2}`` restricted to ``supp(omega)``.

    ``omega`` defaults to ``Phi(rho)``; pass it to reuse a cached spectrum.
    """
    phi = channel_on_support(phi, rho)
    if omega is None:
        out = apply_channel(phi, rho.mat)
        if linalg.trace_norm(out) <= rho.rank_tol:
            raise DegenerateOutputError("Phi(rho) is numerically zero")
        omega = validate_state(out, rank_tol=rho.rank_tol)
    k = phi.ambient_kraus
    r = rho.sqrt @ k.conj().transpose(0, 2, 1) @ omega.pinv_sqrt
    w = omega.domain_basis
    if w is not None:
        r = r @ w
    return validate_channel(list(r), r.shape[2], rho.dim, embedding=w)


def recovery_residual(phi: KrausChannel, rho: DensityMatrix,
                      rec: KrausChannel | None = None,
                      omega: DensityMatrix | None = None) -> float:
    """``|| Phi_rec(Phi(rho)) - rho ||_1``."""
    phi = channel_on_support(phi, rho)
    if omega is None:
        omega = output_state(phi, rho)
    if rec is None:
        rec = petz_recovery(phi, rho, omega)
    return linalg.trace_norm(apply_channel(rec, omega.mat) - rho.mat)


def matrix_unit_pairings(pi_mat: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """All pairings ``tr[pi E_{m,n,r,s}]`` with ``E = |e_m><e_n| (x) (|e_s><e_r|)^T``.

    Returned as an array indexed ``[m, n, r, s]``.
    """
    d = basis.shape[0]
    p = pi_mat.reshape(d, d, d, d)
    u, uc = basis, basis.conj()
    # tr[pi E] = sum pi[a,A,b,B] e_m[b] conj(e_n[a]) conj(e_r[B]) e_s[A]
    return np.einsum("aAbB,bm,an,Br,As->mnrs", p, u, uc, uc, u, optimize=True)


def matrix_unit_expected(phi: KrausChannel, rho: DensityMatrix) -> np.ndarray:
    """``sqrt(lam_m lam_n) <e_r| Phi(|e_m><e_n|) |e_s>`` in the eigenbasis of ``rho``.

    Evaluated by applying the channel to each matrix unit, independently of
    any coupling construction.
    """
    phi = channel_on_support(phi, rho)
    lam, e = rho.spectrum
    d = rho.dim
    out = np.zeros((d, d, d, d), dtype=np.complex128)
    for m in range(d):
        for n in range(d):
            if lam[m] == 0 or lam[n] == 0:
                continue
            y = apply_channel(phi, np.outer(e[:, m], e[:, n].conj()))
            out[m, n] = np.sqrt(lam[m] * lam[n]) * (e.conj().T @ y @ e)
    return out


@dataclass
class TheoremReport:
    st_vs_rec_trace_distance: float
    recovery_residual: float
    cost_gap: float
    matrix_unit_max_dev: float
    covariance_identity_residual: float
    dims_and_ranks: dict
    borderline: bool
    tolerances: dict = field(default_factory=dict)
    pass_: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("pass_")
        return d


def _borderline(omega: DensityMatrix) -> bool:
    w = omega.spectrum.eigenvalues
    cut = omega.rank_tol * w[0]
    return bool(np.any((w > cut / 10) & (w < cut * 10)))


def covariance_identity_residual(phi: KrausChannel, rho: DensityMatrix, obs: ObservableSet,
                                 rec: KrausChannel | None = None,
                                 omega: DensityMatrix | None = None) -> float:
    """Max over observables of ``|Phi_rec(w^{1/2} A w^{1/2}) - rho^{1/2} Phi^dagger(A) rho^{1/2}|``."""
    phi = channel_on_support(phi, rho)
    if omega is None:
        omega = output_state(phi, rho)
    if rec is None:
        rec = petz_recovery(phi, rho, omega)
    worst = 0.0
    for a in obs.observables:
        lhs = apply_channel(rec, omega.sqrt @ a @ omega.sqrt)
        rhs = rho.sqrt @ adjoint_apply(phi, a, ambient=True) @ rho.sqrt
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def _cost_gap(phi, rho, obs, rec, omega) -> tuple[float, float]:
    forward = channel_cost(phi, rho, obs).channel_cost
    backward = channel_cost(rec, omega, obs).channel_cost
    return abs(forward - backward), forward


def verify_cost_equality(phi: KrausChannel, rho: DensityMatrix, obs: ObservableSet,
                         tol: float = TOL_COST) -> float:
    """``|<C>_Phi^{rho,omega} - <C>_{Phi_rec}^{omega,rho}|``.

    Raises ``TheoremViolation`` if the intermediate identity
    ``Phi_rec(omega^{1/2} A omega^{1/2}) = rho^{1/2} Phi^dagger(A) rho^{1/2}``
    fails beyond ``tol`` for some observable.
    """
    phi = channel_on_support(phi, rho)
    omega = output_state(phi, rho)
    rec = petz_recovery(phi, rho, omega)
    ident = covariance_identity_residual(phi, rho, obs, rec, omega)
    scale = max(1.0, max(np.abs(a).max() for a in obs.observables))
    if ident > tol * scale:
        raise TheoremViolation(f"covariance identity fails by {ident:.3e}")
    return _cost_gap(phi, rho, obs, rec, omega)[0]


def verify_petz_swap(phi: KrausChannel, rho: DensityMatrix, obs: ObservableSet,
                     tol_thm: float = TOL_THEOREM, tol_rec: float = TOL_RECOVERY,
                     tol_cost: float = TOL_COST) -> TheoremReport:
    """Compare ``(Pi_Phi)^ST`` with ``Pi_rec`` and collect the companion checks.

    ``cost_gap`` is judged against ``tol_cost * max(1, cost)``.
    """
    phi = channel_on_support(phi, rho)
    omega = output_state(phi, rho)
    rec = petz_recovery(phi, rho, omega)
    pi_phi = channel_to_coupling(phi, rho)
    pi_rec = channel_to_coupling(rec, omega)
    st = swap_matrix(pi_phi.mat)
    dist = linalg.trace_norm(st - pi_rec.mat)

    expected = matrix_unit_expected(phi, rho)
    basis = rho.spectrum.eigenvectors
    dev_phi = np.abs(matrix_unit_pairings(st, basis) - expected).max()
    dev_rec = np.abs(matrix_unit_pairings(pi_rec.mat, basis) - expected).max()

    rec_res = recovery_residual(phi, rho, rec, omega)
    gap, cost = _cost_gap(phi, rho, obs, rec, omega)
    ident = covariance_identity_residual(phi, rho, obs, rec, omega)
    tols = {"theorem": tol_thm, "recovery": tol_rec, "cost": tol_cost * max(1.0, cost)}
    ok = dist <= tols["theorem"] and rec_res <= tols["recovery"] and gap <= tols["cost"]
    meta = {
        "d": rho.dim,
        "rank_rho": rho.support_rank,
        "rank_omega": omega.support_rank,
        "n_kraus": phi.n_kraus,
        "cost": cost,
    }
    return TheoremReport(
        st_vs_rec_trace_distance=dist,
        recovery_residual=rec_res,
        cost_gap=gap,
        matrix_unit_max_dev=float(max(dev_phi, dev_rec)),
        covariance_identity_residual=ident,
        dims_and_ranks=meta,
        borderline=_borderline(omega),
        tolerances=tols,
        pass_=bool(ok),
    )
