"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` to see the lines
inline; they are also printed through ``capsys.disabled`` under plain ``-v``.
"""

import time
from functools import lru_cache

import numpy as np

from qotpetz import linalg
from qotpetz.cli import instance_seed, main
from qotpetz.coupling import channel_to_coupling, coupling_to_channel, swap_transpose
from qotpetz.cost import channel_cost, cost_operator, coupling_cost, swap_invariance_residual
from qotpetz.objects import (
    apply_channel,
    channel_on_support,
    pure_state,
    random_channel,
    random_observables,
    random_state,
)
from qotpetz.recovery import verify_cost_equality, verify_petz_swap
from qotpetz.solver import SolverConfig, candidate_bound, pure_state_cost, solve, symmetry_check

from .conftest import rand_unit_vector

DIMS = (2, 3, 4, 5)
TRIALS = 50


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


@lru_cache(maxsize=None)
def theorem_suite():
    """Every (d, rank, trial) instance with its report; Kraus ranks cycle through 1..d^2."""
    start = time.perf_counter()
    rows = []
    for d in DIMS:
        for r in range(1, d + 1):
            for t in range(TRIALS):
                base = (2024, d, r, t)
                rho = random_state(d, r, instance_seed(*base, 0))
                phi = channel_on_support(random_channel(d, d, 1 + t % (d * d), instance_seed(*base, 1)), rho)
                obs = random_observables(d, 1 + t % 3, instance_seed(*base, 2))
                rows.append((rho, phi, verify_petz_swap(phi, rho, obs)))
    return rows, time.perf_counter() - start


def test_criterion_01_theorem_suite(capsys):
    rows, elapsed = theorem_suite()
    worst = max(rep.st_vs_rec_trace_distance for _, _, rep in rows)
    n_ok = sum(rep.st_vs_rec_trace_distance <= 1e-9 for _, _, rep in rows)
    ranks_seen = {(rho.dim, rho.support_rank) for rho, _, _ in rows}
    ok = n_ok == len(rows) and len(ranks_seen) == sum(DIMS) and elapsed <= 120
    report(capsys, 1, ok, f"{n_ok}/{len(rows)} instances with ||Pi^ST - Pi_rec||_1 <= 1e-9, "
                          f"worst {worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_matrix_unit_oracle(capsys):
    rows, _ = theorem_suite()
    worst = max(rep.matrix_unit_max_dev for _, _, rep in rows)
    ok = worst <= 1e-9
    report(capsys, 2, ok, f"max matrix-unit pairing deviation {worst:.2e} over {len(rows)} instances")
    assert ok


def test_criterion_03_recovery(capsys):
    rows, _ = theorem_suite()
    worst = max(rep.recovery_residual for _, _, rep in rows)
    deficient = sum(rep.dims_and_ranks["rank_omega"] < rep.dims_and_ranks["d"] for _, _, rep in rows)
    ok = worst <= 1e-9 and deficient > 0
    report(capsys, 3, ok, f"max ||Phi_rec(Phi(rho)) - rho||_1 {worst:.2e}; "
                          f"{deficient} instances with rank-deficient Phi(rho)")
    assert ok


@lru_cache(maxsize=None)
def cost_suite():
    rows = []
    for d in DIMS:
        for t in range(200):
            base = (77, d, t)
            rho = random_state(d, 1 + t % d, instance_seed(*base, 0))
            phi = channel_on_support(random_channel(d, d, 1 + t % (d * d), instance_seed(*base, 1)), rho)
            obs = random_observables(d, 1 + t % 3, instance_seed(*base, 2))
            rows.append((phi, rho, obs, channel_cost(phi, rho, obs)))
    return rows


def test_criterion_04_cost_equality(capsys):
    worst, n_ok = 0.0, 0
    rows = cost_suite()
    for phi, rho, obs, rep in rows:
        gap = verify_cost_equality(phi, rho, obs)
        rel = gap / max(1.0, rep.channel_cost)
        worst = max(worst, rel)
        n_ok += rel <= 1e-9
    ok = n_ok == len(rows)
    report(capsys, 4, ok, f"{n_ok}/{len(rows)} with |cost_Phi - cost_rec| <= 1e-9 max(1, cost), "
                          f"worst relative gap {worst:.2e}")
    assert ok


def test_criterion_05_cost_consistency(capsys):
    rows = cost_suite()
    rel = [rep.consistency_residual / max(1.0, rep.channel_cost) for *_, rep in rows]
    ok = max(rel) <= 1e-9
    report(capsys, 5, ok, f"coupling route vs channel route, worst relative residual {max(rel):.2e} "
                          f"over {len(rows)} instances")
    assert ok


def test_criterion_06_swap_invariances(capsys):
    op_worst, cost_worst, count = 0.0, 0.0, 0
    for d in DIMS:
        for t in range(100):
            base = (606, d, t)
            obs = random_observables(d, 1 + t % 3, instance_seed(*base, 2))
            c = cost_operator(obs)
            op_worst = max(op_worst, swap_invariance_residual(c))
            rho = random_state(d, 1 + t % d, instance_seed(*base, 0))
            pi = channel_to_coupling(random_channel(d, d, 1 + t % (d * d), instance_seed(*base, 1)), rho)
            cost_worst = max(cost_worst, abs(coupling_cost(pi, c) - coupling_cost(swap_transpose(pi), c)))
            count += 1
    ok = op_worst <= 1e-12 and cost_worst <= 1e-10
    report(capsys, 6, ok, f"C^ST vs C entrywise {op_worst:.2e}; |C(Pi^ST) - C(Pi)| {cost_worst:.2e} "
                          f"on {count} couplings")
    assert ok


def test_criterion_07_round_trip(capsys):
    rows, _ = theorem_suite()
    worst, deficient = 0.0, 0
    for rho, phi, _ in rows:
        back = coupling_to_channel(channel_to_coupling(phi, rho), rho)
        v = rho.support_basis
        deficient += v.shape[1] < rho.dim
        for i in range(v.shape[1]):
            for j in range(v.shape[1]):
                e = np.outer(v[:, i], v[:, j].conj())
                worst = max(worst, linalg.trace_norm(apply_channel(back, e) - apply_channel(phi, e)))
    ok = worst <= 1e-8 and deficient > 0
    report(capsys, 7, ok, f"max trace-norm error on supp(rho) matrix units {worst:.2e} "
                          f"({deficient} rank-deficient rho)")
    assert ok


def test_criterion_08_marginals(capsys):
    rows, _ = theorem_suite()
    worst = 0.0
    for rho, phi, _ in rows:
        pi = channel_to_coupling(phi, rho)
        first = linalg.partial_trace(pi.mat, (rho.dim, rho.dim), "first")
        second = linalg.partial_trace(pi.mat, (rho.dim, rho.dim), "second")
        worst = max(worst, np.abs(first - apply_channel(phi, rho.mat)).max(),
                    np.abs(second - rho.mat.T).max())
    ok = worst <= 1e-10
    report(capsys, 8, ok, f"max marginal deviation {worst:.2e} over {len(rows)} instances")
    assert ok


def test_criterion_09_solver_anchors(capsys):
    start = time.perf_counter()
    cfg = SolverConfig()
    anchor, bound, feas, sym = 0.0, -np.inf, 0.0, 0.0
    instances = []
    for t in range(50):
        d = 2 + t % 3
        psi, phi = rand_unit_vector(d, 9000 + t), rand_unit_vector(d, 9500 + t)
        obs = random_observables(d, 1 + t % 3, 9900 + t)
        instances.append((pure_state(psi), pure_state(phi), obs, pure_state_cost(psi, phi, obs)))
    # a few mixed pairs so the dominance, feasibility and symmetry checks see more than anchors
    for t in range(6):
        d = 2 + t % 2
        instances.append((random_state(d, d, 300 + t), random_state(d, 1 + t % d, 400 + t),
                          random_observables(d, 2, 500 + t), None))
    for rho, omega, obs, exact in instances:
        res = solve(rho, omega, obs, cfg)
        if exact is not None:
            anchor = max(anchor, abs(res.value - exact))
        bound = max(bound, res.value - candidate_bound(rho, omega, obs))
        feas = max(feas, res.feasibility_residual)
        sym = max(sym, symmetry_check(rho, omega, obs, cfg, forward=res).gap)
    elapsed = time.perf_counter() - start
    ok = anchor <= 1e-5 and bound <= 1e-6 and feas <= 1e-5 and sym <= 2e-5 and elapsed <= 180
    report(capsys, 9, ok, f"pure anchor err {anchor:.2e}, value - bound max {bound:.2e}, "
                          f"feasibility {feas:.2e}, symmetry gap {sym:.2e}, {elapsed:.1f}s "
                          f"({len(instances)} pairs)")
    assert ok


def test_criterion_10_cli_determinism(tmp_path, capsys):
    # the same manifest includes the same output paths, so both runs write to one directory
    d = tmp_path

    def run():
        codes = [
            main(["gen", "state", "--dim", "3", "--rank", "2", "--seed", "5", "--out", str(d / "rho.json")]),
            main(["gen", "state", "--dim", "3", "--rank", "3", "--seed", "6", "--out", str(d / "omega.json")]),
            main(["gen", "channel", "--din", "3", "--dout", "3", "--kraus-rank", "4", "--seed", "7",
                  "--out", str(d / "phi.json")]),
            main(["gen", "observables", "--dim", "3", "--count", "2", "--seed", "8",
                  "--out", str(d / "obs.json")]),
            main(["verify-theorem", "--dims", "2,3", "--trials", "5", "--seed", "11",
                  "--out", str(d / "thm.json"), "--csv", str(d / "thm.csv")]),
            main(["cost", "--state", str(d / "rho.json"), "--channel", str(d / "phi.json"),
                  "--observables", str(d / "obs.json"), "--out", str(d / "cost.json")]),
            main(["couple", "--state", str(d / "rho.json"), "--channel", str(d / "phi.json"),
                  "--out", str(d / "pi.json")]),
            main(["petz", "--state", str(d / "rho.json"), "--channel", str(d / "phi.json"),
                  "--out", str(d / "rec.json")]),
            main(["wasserstein", "--rho", str(d / "rho.json"), "--omega", str(d / "omega.json"),
                  "--observables", str(d / "obs.json"), "--restarts", "2", "--seed", "3",
                  "--out", str(d / "w2.json")]),
        ]
        return codes, {p.name: p.read_bytes() for p in sorted(d.iterdir())}

    codes_a, files_a = run()
    codes_b, files_b = run()
    identical = files_a == files_b
    ok = identical and all(c == 0 for c in codes_a + codes_b)
    report(capsys, 10, ok, f"{len(files_a)} report files byte-identical across reruns: {identical}; "
                           f"exit codes {codes_a}")
    assert ok
