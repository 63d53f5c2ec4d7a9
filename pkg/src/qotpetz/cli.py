"""Command-line entry point.

Exit codes: 0 success, 1 input or validation error, 2 a verified identity
failed, 3 the Wasserstein solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import serialize as ser
from .coupling import channel_to_coupling, coupling_to_channel
from .cost import channel_cost
from .errors import QOTError, SolverFailure, TheoremViolation
from .linalg import MAX_DIM
from .objects import (
    channel_on_support,
    random_channel,
    random_observables,
    random_state,
)
from .recovery import (
    TOL_COST,
    TOL_MATRIX_UNIT,
    TOL_RECOVERY,
    TOL_THEOREM,
    petz_recovery,
    verify_cost_equality,
    verify_petz_swap,
)
from .solver import SolverConfig, candidate_bound, solve, symmetry_check

log = logging.getLogger("qotpetz")

EXIT_OK, EXIT_INPUT, EXIT_THEOREM, EXIT_SOLVER = 0, 1, 2, 3


@dataclass
class RunManifest:
    command: str
    seed: int
    dims: list[int] = field(default_factory=list)
    ranks: list[int] | str = "all"
    trials: int = 1
    tolerances: dict[str, float] = field(default_factory=dict)
    output_path: str = "-"

    def __post_init__(self):
        if self.trials < 1:
            raise QOTError(f"trials must be >= 1, got {self.trials}")
        for d in self.dims:
            if not 1 <= d or d * d > MAX_DIM:
                raise QOTError(f"dimension {d} outside the supported range")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _ranks(text: str):
    return "all" if text == "all" else _int_list(text)


def instance_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


def _emit(path: str, obj) -> None:
    text = ser.dumps(obj)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str, loader):
    try:
        obj = ser.read_json(path)
    except json.JSONDecodeError as exc:
        raise QOTError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return loader(obj)
    except QOTError as exc:
        raise QOTError(f"{path}: {exc}") from exc


def cmd_verify_theorem(args) -> int:
    tols = {
        "theorem": args.tol_theorem,
        "recovery": args.tol_recovery,
        "cost": args.tol_cost,
        "matrix_unit": args.tol_matrix_unit,
    }
    manifest = RunManifest("verify-theorem", args.seed, args.dims, args.ranks, args.trials,
                           tols, args.out)
    fixture = _load(args.channel, ser.channel_from_json) if args.channel else None
    reports, rows = [], []
    for d in manifest.dims:
        ranks = range(1, d + 1) if manifest.ranks == "all" else [r for r in manifest.ranks if r <= d]
        for r in ranks:
            for t in range(manifest.trials):
                base = (manifest.seed, d, r, t)
                rho = random_state(d, r, instance_seed(*base, 0))
                if fixture is not None:
                    phi = fixture
                else:
                    phi = random_channel(d, d, 1 + t % (d * d), instance_seed(*base, 1))
                phi = channel_on_support(phi, rho)
                obs = random_observables(d, 1 + t % 3, instance_seed(*base, 2))
                rep = verify_petz_swap(phi, rho, obs, tols["theorem"], tols["recovery"], tols["cost"])
                try:
                    verify_cost_equality(phi, rho, obs, tols["cost"])
                    identity_ok = True
                except TheoremViolation:
                    identity_ok = False
                ok = rep.pass_ and identity_ok and rep.matrix_unit_max_dev <= tols["matrix_unit"]
                entry = rep.to_dict()
                entry.update({"trial": t, "pass": bool(ok)})
                reports.append(entry)
                rows.append(entry)
    summary = {
        "instances": len(reports),
        "pass_rate": sum(e["pass"] for e in reports) / max(1, len(reports)),
        "max_st_vs_rec": max((e["st_vs_rec_trace_distance"] for e in reports), default=0.0),
        "max_recovery_residual": max((e["recovery_residual"] for e in reports), default=0.0),
        "max_cost_gap": max((e["cost_gap"] for e in reports), default=0.0),
        "max_matrix_unit_dev": max((e["matrix_unit_max_dev"] for e in reports), default=0.0),
        "borderline": sum(e["borderline"] for e in reports),
    }
    _emit(args.out, {"manifest": asdict(manifest), "reports": reports, "summary": summary})
    if args.csv:
        _write_csv(args.csv, rows)
    all_pass = summary["pass_rate"] == 1.0
    log.info("verify-theorem: %d instances, pass rate %.4f", summary["instances"], summary["pass_rate"])
    return EXIT_OK if all_pass else EXIT_THEOREM


def _write_csv(path: str, rows) -> None:
    cols = ["d", "rank_rho", "rank_omega", "n_kraus", "trial", "st_vs_rec_trace_distance",
            "recovery_residual", "cost_gap", "matrix_unit_max_dev", "borderline", "pass"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for e in rows:
        flat = {**e["dims_and_ranks"], **e}
        w.writerow([repr(flat[c]) if isinstance(flat[c], float) else flat[c] for c in cols])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def cmd_cost(args) -> int:
    rho = _load(args.state, ser.state_from_json)
    phi = _load(args.channel, ser.channel_from_json)
    obs = _load(args.observables, ser.observables_from_json)
    report = channel_cost(phi, rho, obs)
    _emit(args.out, report.to_dict())
    return EXIT_OK


def cmd_wasserstein(args) -> int:
    rho = _load(args.rho, ser.state_from_json)
    omega = _load(args.omega, ser.state_from_json)
    obs = _load(args.observables, ser.observables_from_json)
    cfg = SolverConfig(factor_rank=args.factor_rank, restarts=args.restarts,
                       max_iters=args.max_iters, seed=args.seed)
    result = solve(rho, omega, obs, cfg)
    sym = symmetry_check(rho, omega, obs, cfg, forward=result)
    out = result.to_dict()
    out["candidate_bound"] = candidate_bound(rho, omega, obs)
    out["symmetry"] = asdict(sym)
    _emit(args.out, out)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "state":
        obj = ser.state_to_json(random_state(args.dim, args.rank or args.dim, args.seed))
    elif args.kind == "channel":
        obj = ser.channel_to_json(random_channel(args.din, args.dout, args.kraus_rank, args.seed))
    else:
        obj = ser.observables_to_json(random_observables(args.dim, args.count, args.seed))
    _emit(args.out, obj)
    return EXIT_OK


def cmd_extract_channel(args) -> int:
    pi = _load(args.coupling, ser.coupling_from_json)
    rho = _load(args.state, ser.state_from_json)
    _emit(args.out, ser.channel_to_json(coupling_to_channel(pi, rho)))
    return EXIT_OK


def cmd_petz(args) -> int:
    phi = _load(args.channel, ser.channel_from_json)
    rho = _load(args.state, ser.state_from_json)
    _emit(args.out, ser.channel_to_json(petz_recovery(phi, rho)))
    return EXIT_OK


def cmd_couple(args) -> int:
    phi = _load(args.channel, ser.channel_from_json)
    rho = _load(args.state, ser.state_from_json)
    _emit(args.out, ser.coupling_to_json(channel_to_coupling(phi, rho)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qotpetz", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def out_flag(sp):
        sp.add_argument("--out", default="-", help="output path, '-' for stdout")

    v = sub.add_parser("verify-theorem", help="check the Petz/swap-transpose identity on random instances")
    v.add_argument("--dims", type=_int_list, default=[2, 3, 4, 5])
    v.add_argument("--ranks", type=_ranks, default="all")
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--channel", help="use this channel JSON for every instance")
    v.add_argument("--csv", help="also write a per-instance CSV summary")
    v.add_argument("--tol-theorem", type=float, default=TOL_THEOREM)
    v.add_argument("--tol-recovery", type=float, default=TOL_RECOVERY)
    v.add_argument("--tol-cost", type=float, default=TOL_COST)
    v.add_argument("--tol-matrix-unit", type=float, default=TOL_MATRIX_UNIT)
    out_flag(v)
    v.set_defaults(func=cmd_verify_theorem)

    c = sub.add_parser("cost", help="coupling-route and channel-route transport cost")
    c.add_argument("--state", required=True)
    c.add_argument("--channel", required=True)
    c.add_argument("--observables", required=True)
    out_flag(c)
    c.set_defaults(func=cmd_cost)

    w = sub.add_parser("wasserstein", help="estimate the squared Wasserstein distance")
    w.add_argument("--rho", required=True)
    w.add_argument("--omega", required=True)
    w.add_argument("--observables", required=True)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--restarts", type=int, default=8)
    w.add_argument("--max-iters", type=int, default=5000)
    w.add_argument("--factor-rank", type=int, default=None)
    out_flag(w)
    w.set_defaults(func=cmd_wasserstein)

    g = sub.add_parser("gen", help="write seeded random instances")
    g.add_argument("kind", choices=["state", "channel", "observables"])
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--rank", type=int, default=None)
    g.add_argument("--din", type=int, default=2)
    g.add_argument("--dout", type=int, default=2)
    g.add_argument("--kraus-rank", type=int, default=1)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    out_flag(g)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("extract-channel", help="recover the channel of a coupling")
    e.add_argument("--coupling", required=True)
    e.add_argument("--state", required=True)
    out_flag(e)
    e.set_defaults(func=cmd_extract_channel)

    pz = sub.add_parser("petz", help="emit the Petz recovery channel")
    pz.add_argument("--channel", required=True)
    pz.add_argument("--state", required=True)
    out_flag(pz)
    pz.set_defaults(func=cmd_petz)

    cp = sub.add_parser("couple", help="emit the coupling of a channel and a state")
    cp.add_argument("--channel", required=True)
    cp.add_argument("--state", required=True)
    out_flag(cp)
    cp.set_defaults(func=cmd_couple)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TheoremViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THEOREM
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(ser.dumps(exc.diagnostics), file=sys.stderr)
        return EXIT_SOLVER
    except (QOTError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
