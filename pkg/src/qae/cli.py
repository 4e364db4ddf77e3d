"""Command-line entry point: ``qae <subcommand> [options]``.

Exit status is 0 on success, 2 when some sweep cells failed (their rows carry
a non-``ok`` status) and 1 on hard errors.
"""

import argparse
import json
import sys

import numpy as np

from . import experiments as ex
from .driver import spectrum
from .errors import QaeError
from .hamiltonian import build_product_hamiltonian, problem_from_config
from .hardware_model import NoiseSpec
from .linalg import jacobi_eigen, load_matrix
from .qubo_map import Encoding, Qubo, build_qubo
from .solvers import SOLVERS

SOLVE_COLUMNS = ["state_index", "energy_qae", "energy_oracle", "abs_error", "best_lambda",
                 "raw_norm", "K", "B", "d", "solver", "seed"]

EXPERIMENT_KINDS = {
    "k-sweep": ("k_sweep",),
    "scaling": ("scaling_d", "scaling_k"),
    "convergence": ("nlambda_sweep", "nrep_sweep", "reads_sweep"),
    "noise": ("noise",),
    "chain-scan": ("chain_scan",),
}


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _problem_config(args):
    path = args.problem or args.config
    if path is None:
        raise ValueError("a problem config is required (--problem or --config)")
    return _load_json(path)


def _matrix(args):
    if getattr(args, "matrix", None):
        return load_matrix(args.matrix), None
    cfg = _problem_config(args)
    return build_product_hamiltonian(problem_from_config(cfg)), cfg


def cmd_solve(args):
    cfg = _problem_config(args)
    h = build_product_hamiltonian(problem_from_config(cfg))
    oracle = jacobi_eigen(h).eigenvalues
    B, d = ex.basis_shape(cfg)
    spec = ex.ExperimentSpec("k_sweep", problem=cfg, scan=cfg.get("scan"), solver=cfg.get("solver", {}))
    scans = ex.scans_for(spec, args.states)
    solver = ex.solver_from(replace_name(cfg.get("solver", {}), args.solver))
    noise = NoiseSpec(args.noise_scale) if args.noise_scale else None
    result = spectrum(h, args.states, args.K, scans, solver, noise=noise, seed=args.seed,
                      threads=args.threads)
    rows = []
    for i, state in enumerate(result.states):
        if state.overlap_warning:
            print(f"warning: state {i} overlaps the ground state; increase s0", file=sys.stderr)
        rows.append({"state_index": i, "energy_qae": state.energy, "energy_oracle": oracle[i],
                     "abs_error": abs(state.energy - oracle[i]), "best_lambda": state.best_lambda,
                     "raw_norm": state.raw_norm, "K": args.K, "B": B, "d": d,
                     "solver": solver.name, "seed": args.seed})
    _emit(args, "solve", SOLVE_COLUMNS, rows)
    return 0


def replace_name(cfg, name):
    cfg = dict(cfg)
    if name:
        cfg["name"] = name
    return cfg


def cmd_oracle(args):
    h, _ = _matrix(args)
    eig = jacobi_eigen(h)
    n = min(args.states or h.n, h.n)
    rows = [{"state_index": i, "energy": eig.eigenvalues[i]} for i in range(n)]
    _emit(args, "oracle", ["state_index", "energy"], rows)
    return 0


def cmd_export_qubo(args):
    h, _ = _matrix(args)
    q = build_qubo(h, Encoding(args.K, h.n), args.lam)
    if args.out:
        q.write(args.out)
    else:
        sys.stdout.write(f"n {q.n}\n")
        for i, j in zip(*np.nonzero(q.matrix)):
            sys.stdout.write(f"{i} {j} {float(q.matrix[i, j])!r}\n")
    return 0


def cmd_solve_qubo(args):
    q = Qubo.read(args.qubo)
    cfg = _load_json(args.config) if args.config else {}
    solver = ex.solver_from(replace_name(cfg.get("solver", {}), args.solver)).with_seed(args.seed)
    res = solver.solve(q)
    row = {"n": q.n, "energy": res.best_energy, "bits": "".join(map(str, res.best_bits.tolist())),
           "solver": solver.name, "seed": args.seed, "evaluations": res.evaluations}
    _emit(args, "solve_qubo", ["n", "energy", "bits", "solver", "seed", "evaluations"], [row])
    return 0


def _emit(args, kind, columns, rows):
    if args.out:
        ex.write_rows(args.out, kind, columns, rows)
    else:
        print(",".join(columns))
        for r in rows:
            print(",".join(ex._fmt(r.get(c)) for c in columns))


def cmd_experiment(args):
    allowed = EXPERIMENT_KINDS[args.command]
    cfg = _load_json(args.config) if args.config else {}
    cfg.setdefault("kind", allowed[0])
    if cfg["kind"] not in allowed:
        raise ValueError(f"{args.command} runs {', '.join(allowed)}, not {cfg['kind']!r}")
    spec = ex.ExperimentSpec.from_dict(cfg)
    if args.seed is not None:
        spec.seeds = [args.seed]
    if args.out:
        spec.out = args.out
    spec.threads = args.threads
    rows = ex.run(spec)
    if not spec.out:
        columns = list(rows[0]) if rows else []
        _emit(args, spec.kind, columns, rows)
    failed = ex.failed(rows)
    if failed:
        print(f"{failed} of {len(rows)} cells failed", file=sys.stderr)
        return 2
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON configuration file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default: stdout)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="qae", parents=[common],
                                     description="Eigenvalues by QUBO minimisation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="QAE states of a problem vs the oracle")
    p.add_argument("--problem", help="problem JSON")
    p.add_argument("--K", type=int, default=8, help="qubits per coefficient")
    p.add_argument("--states", type=int, default=1)
    p.add_argument("--solver", choices=sorted(SOLVERS), default=None)
    p.add_argument("--noise-scale", type=float, default=0.0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", parents=[common], help="dense eigenvalues of a problem")
    p.add_argument("--problem")
    p.add_argument("--matrix", help="matrix JSON {n, upper}")
    p.add_argument("--states", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("export-qubo", parents=[common], help="write the QUBO for one lambda")
    p.add_argument("--problem")
    p.add_argument("--matrix")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_export_qubo)

    p = sub.add_parser("solve-qubo", parents=[common], help="minimise a QUBO triplet file")
    p.add_argument("qubo")
    p.add_argument("--solver", choices=sorted(SOLVERS), default="partitioned")
    p.set_defaults(func=cmd_solve_qubo)

    for name, kinds in EXPERIMENT_KINDS.items():
        p = sub.add_parser(name, parents=[common], help=f"experiment: {' | '.join(kinds)}")
        p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    for name, default in (("config", None), ("seed", None), ("out", None), ("threads", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.command in ("solve", "solve-qubo") and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (QaeError, ValueError, OSError, KeyError) as exc:
        print(f"qae: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
