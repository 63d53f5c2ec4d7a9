"""Upper estimates of the squared quadratic Wasserstein distance.

``solve`` minimizes ``tr[Pi C_A]`` over couplings ``Pi = L L^dagger`` with
prescribed marginals.  Marginal constraints are enforced with an augmented
Lagrangian: a quadratic penalty whose weight walks through
``penalty_schedule`` plus multiplier updates, so the iterates become feasible
at a bounded penalty weight.  Each inner minimization is a capped run of
L-BFGS on the real and imaginary parts of ``L``, followed by a check that
the stationary point is not a factorization saddle.

The returned value is the cost of a concrete, nearly feasible coupling; its
feasibility residual is reported as measured.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import linalg
from .coupling import Coupling, swap_transpose
from .cost import CostOperator, channel_cost, cost_operator, coupling_cost
from .errors import DimensionError, NumericConsistencyError, ParameterError, SolverFailure
from .objects import (
    DensityMatrix,
    ObservableSet,
    channel_on_support,
    identity_channel,
    make_rng,
    replacer_channel,
    unitary_channel,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    factor_rank: int | None = None  # None means d^2
    restarts: int = 8
    max_iters: int = 5000
    penalty_schedule: tuple[float, ...] = (10.0, 100.0, 1000.0, 10000.0)
    step_init: float = 1e-2  # unused by L-BFGS; kept for config compatibility
    grad_tol: float = 1e-8
    feas_tol: float = 1e-6
    seed: int = 0
    max_outer: int = 200
    inner_iters: int = 100  # L-BFGS cap between multiplier updates

    def validated(self, d: int) -> "SolverConfig":
        rank = d * d if self.factor_rank is None else self.factor_rank
        if not 1 <= rank <= d * d:
            raise ParameterError(f"factor_rank must lie in [1, {d * d}], got {rank}")
        nums = [self.restarts, self.max_iters, self.step_init, self.grad_tol,
                self.feas_tol, self.max_outer, self.inner_iters, *self.penalty_schedule]
        if not self.penalty_schedule or any(x <= 0 for x in nums):
            raise ParameterError("solver parameters must all be positive")
        return SolverConfig(rank, self.restarts, self.max_iters, tuple(self.penalty_schedule),
                            self.step_init, self.grad_tol, self.feas_tol, self.seed,
                            self.max_outer, self.inner_iters)


@dataclass
class SolverResult:
    value: float
    coupling: Coupling
    feasibility_residual: float
    per_restart_values: list[float]
    iterations_used: int
    converged: list[bool] = field(default_factory=list)

    def to_dict(self) -> dict:
        from .serialize import coupling_to_json

        return {
            "value": self.value,
            "feasibility_residual": self.feasibility_residual,
            "per_restart_values": list(self.per_restart_values),
            "iterations_used": self.iterations_used,
            "coupling": coupling_to_json(self.coupling),
        }


class _Problem:
    """Augmented Lagrangian of the coupling program for one pair of states.

    Any coupling of ``(rho, omega)`` is supported on
    ``supp(omega) (x) supp(rho^T)``, so the program is posed on that subspace
    through the isometry ``W = V_omega (x) conj(V_rho)``.  The reduced
    marginals are then full rank, which keeps the multipliers bounded.
    """

    def __init__(self, rho: DensityMatrix, omega: DensityMatrix, c: np.ndarray, rank: int):
        vw, vr = omega.support_basis, rho.support_basis
        self.d = rho.dim
        self.r1, self.r2 = vw.shape[1], vr.shape[1]
        self.n = self.r1 * self.r2
        self.rank = min(rank, self.n)
        self.w = np.kron(vw, vr.conj())
        self.c = self.w.conj().T @ c @ self.w
        self.omega = vw.conj().T @ omega.mat @ vw
        self.rho_t = (vr.conj().T @ rho.mat @ vr).T
        self.full_omega = omega.mat
        self.full_rho_t = rho.mat.T
        self.eye1 = np.eye(self.r1)
        self.eye2 = np.eye(self.r2)
        self.eye_n = np.eye(self.n)

    def unpack(self, x: np.ndarray) -> np.ndarray:
        m = self.n * self.rank
        return (x[:m] + 1j * x[m:]).reshape(self.n, self.rank)

    def lift(self, pi_reduced: np.ndarray) -> np.ndarray:
        return self.w @ pi_reduced @ self.w.conj().T

    def residuals(self, pi: np.ndarray):
        dims = (self.r1, self.r2)
        h1 = linalg.partial_trace(pi, dims, "first") - self.omega
        h2 = linalg.partial_trace(pi, dims, "second") - self.rho_t
        h3 = float(np.trace(pi).real) - 1.0
        return h1, h2, h3

    def lagrangian(self, pi, mu, y1, y2, y3):
        """Augmented Lagrangian value and its gradient matrix ``G`` in ``pi``."""
        h1, h2, h3 = self.residuals(pi)
        val = (np.vdot(self.c, pi).real
               + np.vdot(y1, h1).real + np.vdot(y2, h2).real + y3 * h3
               + mu * (np.vdot(h1, h1).real + np.vdot(h2, h2).real + h3 * h3))
        g = (self.c
             + np.kron(y1 + 2 * mu * h1, self.eye2)
             + np.kron(self.eye1, y2 + 2 * mu * h2)
             + (y3 + 2 * mu * h3) * self.eye_n)
        return float(val), g

    def value_and_grad(self, x, mu, y1, y2, y3):
        lmat = self.unpack(x)
        val, g = self.lagrangian(lmat @ lmat.conj().T, mu, y1, y2, y3)
        # d/dL of tr[G L L^dagger] packed as (Re, Im)
        gl = 2.0 * (g @ lmat)
        return val, np.concatenate([gl.real.ravel(), gl.imag.ravel()])

    def pack(self, lmat: np.ndarray) -> np.ndarray:
        return np.concatenate([lmat.real.ravel(), lmat.imag.ravel()])


def _escape_saddle(prob: _Problem, x, mu, y1, y2, y3):
    """Step out of a spurious stationary point of the factorized problem.

    A stationary ``L`` is a true minimizer of the convex problem in ``pi``
    only if ``G`` is PSD.  Otherwise the weakest column of ``L`` is pushed
    along the most negative eigenvector of ``G``, where ``2 G L`` is blind.
    Returns the new point, or ``None`` if ``G`` is PSD.
    """
    lmat = prob.unpack(x)
    val, g = prob.lagrangian(lmat @ lmat.conj().T, mu, y1, y2, y3)
    w, v = np.linalg.eigh(g)
    if w[0] >= -1e-9 * max(1.0, np.abs(w).max()):
        return None
    j = int(np.argmin(np.linalg.norm(lmat, axis=0)))

    def along(t):
        trial = lmat.copy()
        trial[:, j] += t * v[:, 0]
        return trial

    res = minimize_scalar(lambda t: prob.lagrangian(along(t) @ along(t).conj().T,
                                                    mu, y1, y2, y3)[0],
                          bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
    if res.fun >= val:
        return None
    return prob.pack(along(res.x))


def _feasibility(prob: _Problem, pi: np.ndarray) -> float:
    """Max trace-norm marginal error of a full-space coupling."""
    d = prob.d
    h1 = linalg.partial_trace(pi, (d, d), "first") - prob.full_omega
    h2 = linalg.partial_trace(pi, (d, d), "second") - prob.full_rho_t
    return max(linalg.trace_norm(h1), linalg.trace_norm(h2))


def _run_restart(prob: _Problem, cfg: SolverConfig, rng: np.random.Generator):
    n, k = prob.n, prob.rank
    l0 = (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))
    l0 /= np.linalg.norm(l0)
    x = np.concatenate([l0.real.ravel(), l0.imag.ravel()])
    y1 = np.zeros((prob.r1, prob.r1), dtype=np.complex128)
    y2 = np.zeros((prob.r2, prob.r2), dtype=np.complex128)
    y3 = 0.0
    used = 0
    grad_norm = np.inf
    feas = np.inf
    schedule = list(cfg.penalty_schedule)
    stage = 0
    prev_feas = np.inf
    escapes, max_escapes = 0, 2 * prob.n
    for _ in range(cfg.max_outer):
        mu = schedule[stage]
        budget = cfg.max_iters - used
        if budget <= 0:
            break
        res = minimize(prob.value_and_grad, x, args=(mu, y1, y2, y3), jac=True,
                       method="L-BFGS-B",
                       options={"maxiter": min(budget, cfg.inner_iters), "gtol": cfg.grad_tol, "ftol": 1e-16,
                                "maxcor": 20})
        x = res.x
        used += int(res.nit)
        grad_norm = float(np.linalg.norm(res.jac))
        lmat = prob.unpack(x)
        pi = lmat @ lmat.conj().T
        h1, h2, h3 = prob.residuals(pi)
        feas = _feasibility(prob, prob.lift(pi))
        if escapes < max_escapes:
            x_new = _escape_saddle(prob, x, mu, y1, y2, y3)
            if x_new is not None:
                escapes += 1
                x = x_new
                continue
        if feas <= 0.1 * cfg.feas_tol and grad_norm <= 1e3 * cfg.grad_tol:
            break
        y1 = y1 + 2 * mu * h1
        y2 = y2 + 2 * mu * h2
        y3 = y3 + 2 * mu * h3
        # escalate only when the multiplier step stalls
        if feas > 0.25 * prev_feas and stage + 1 < len(schedule):
            stage += 1
        prev_feas = feas
    converged = feas <= 10 * cfg.feas_tol and grad_norm <= 1e3 * cfg.grad_tol
    lmat = prob.unpack(x)
    return prob.lift(lmat @ lmat.conj().T), used, grad_norm, feas, converged


def solve(rho: DensityMatrix, omega: DensityMatrix, obs: ObservableSet,
          cfg: SolverConfig | None = None) -> SolverResult:
    cfg = cfg or SolverConfig()
    if rho.dim != omega.dim or obs.dim != rho.dim:
        raise DimensionError(
            f"dimension mismatch: rho {rho.dim}, omega {omega.dim}, observables {obs.dim}"
        )
    cfg = cfg.validated(rho.dim)
    c = cost_operator(obs)
    prob = _Problem(rho, omega, c.mat, cfg.factor_rank)

    values, couplings, flags, feas_list = [], [], [], []
    diagnostics = []
    total = 0
    for i in range(cfg.restarts):
        rng = make_rng(np.random.SeedSequence([cfg.seed, i]).generate_state(1, np.uint64)[0])
        pi, used, gnorm, feas, ok = _run_restart(prob, cfg, rng)
        total += used
        pi = pi / np.trace(pi).real
        values.append(coupling_cost(pi, c))
        couplings.append(pi)
        flags.append(bool(ok))
        feas_list.append(_feasibility(prob, pi))
        diagnostics.append({"restart": i, "iterations": used, "grad_norm": gnorm,
                            "feasibility": feas})
    if not any(flags):
        raise SolverFailure("no restart converged", {"restarts": diagnostics})
    # lowest value among converged restarts; ties go to the lower index
    best = None
    for i, v in enumerate(values):
        if not flags[i]:
            continue
        if best is None or v < values[best] - 1e-12:
            best = i
    pi = Coupling.from_matrix(couplings[best], tol=10 * cfg.feas_tol)
    return SolverResult(
        value=values[best],
        coupling=pi,
        feasibility_residual=feas_list[best],
        per_restart_values=values,
        iterations_used=total,
        converged=flags,
    )


def pure_state_cost(psi, phi_vec, obs: ObservableSet) -> float:
    """Cost of the unique coupling between two pure states.

    ``sum_k <phi|A_k^2|phi> + <psi|A_k^2|psi> - 2 <phi|A_k|phi><psi|A_k|psi>``.
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    phi_vec = np.asarray(phi_vec, dtype=np.complex128).reshape(-1)
    for v in (psi, phi_vec):
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ParameterError(f"vector of norm {np.linalg.norm(v)!r} is not a unit vector")
    if psi.size != phi_vec.size or psi.size != obs.dim:
        raise DimensionError("vectors and observables have mismatched dimensions")
    total = 0.0
    for a in obs.observables:
        ev = lambda v, m: np.vdot(v, m @ v).real  # noqa: E731
        a2 = a @ a
        total += ev(phi_vec, a2) + ev(psi, a2) - 2 * ev(phi_vec, a) * ev(psi, a)
    return float(total)


def candidate_channels(rho: DensityMatrix, omega: DensityMatrix, tol: float = 1e-9):
    """Channels in CPTP(rho, omega) from a fixed menu, with labels.

    Always contains the replacer ``X -> tr[X] omega``.  When ``rho`` and
    ``omega`` are isospectral the unitary matching their sorted eigenbases is
    added, and the identity is added when ``omega == rho``.
    """
    d = rho.dim
    menu = [("replacer", replacer_channel(omega, d))]
    if np.abs(rho.mat - omega.mat).max() <= tol:
        menu.append(("identity", identity_channel(d)))
    if np.abs(rho.spectrum.eigenvalues - omega.spectrum.eigenvalues).max() <= tol:
        u = omega.spectrum.eigenvectors @ rho.spectrum.eigenvectors.conj().T
        if np.abs(u @ rho.mat @ u.conj().T - omega.mat).max() <= tol:
            menu.append(("eigenbasis_unitary", unitary_channel(u)))
    return [(name, channel_on_support(phi, rho)) for name, phi in menu]


def candidate_bound(rho: DensityMatrix, omega: DensityMatrix, obs: ObservableSet) -> float:
    """Minimum channel cost over ``candidate_channels``; an upper bound on the distance."""
    costs = [channel_cost(phi, rho, obs).channel_cost for _, phi in candidate_channels(rho, omega)]
    return float(min(costs))


@dataclass(frozen=True)
class SymmetryReport:
    gap: float
    swap_residual: float
    forward: float
    backward: float


def symmetry_check(rho: DensityMatrix, omega: DensityMatrix, obs: ObservableSet,
                   cfg: SolverConfig | None = None,
                   forward: SolverResult | None = None) -> SymmetryReport:
    """Solve both directions and compare; also check swap invariance of the best coupling.

    The coupling-level identity ``C(Pi^ST) == C(Pi)`` is exact, so a residual
    above ``1e-8`` raises ``NumericConsistencyError``.
    """
    if forward is None:
        forward = solve(rho, omega, obs, cfg)
    backward = solve(omega, rho, obs, cfg)
    c: CostOperator = cost_operator(obs)
    swapped = swap_transpose(forward.coupling)
    swap_res = abs(coupling_cost(swapped, c) - forward.value)
    if swap_res > 1e-8:
        raise NumericConsistencyError(f"swap transpose changed the cost by {swap_res:.3e}")
    return SymmetryReport(abs(forward.value - backward.value), swap_res,
                          forward.value, backward.value)
