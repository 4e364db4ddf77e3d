"""Experiment harness: parameter sweeps written as deterministic CSV files.

Every file starts with a ``# qae-csv v1 <kind>`` line followed by the header
row. Failed cells are kept as rows whose ``status`` is not ``ok`` and whose
numeric fields are empty. Rows are sorted before writing, so reruns with the
same spec and seeds are byte-identical apart from timing columns.
"""

import csv
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .driver import TABLE1, ScanSpec, ground_state, spectrum
from .errors import QaeError
from .hamiltonian import build_product_hamiltonian, problem_from_config
from .hardware_model import NoiseSpec, ChainSpec, scan_lambda_chain
from .linalg import jacobi_eigen
from .qubo_map import Encoding, build_qubo
from .solvers import SaParams, SolverConfig, TabuParams

SCHEMA = "qae-csv v1"
KINDS = ("k_sweep", "nrep_sweep", "reads_sweep", "nlambda_sweep", "scaling_k", "scaling_d",
         "noise", "chain_scan")
TIMING_COLUMNS = {"time", "time_per_K", "log10_time_per_K"}


@dataclass
class ExperimentSpec:
    """One sweep: a problem, a parameter grid and a list of seeds.

    ``scan`` is a :data:`qae.driver.TABLE1` key, a ScanSpec-like dict, or a
    list of those (one per state). ``options`` holds kind-specific knobs.
    """

    kind: str
    problem: dict = field(default_factory=lambda: {"preset": "harmonic_benchmark", "d": 1})
    grid: dict = field(default_factory=dict)
    seeds: list = field(default_factory=lambda: [0])
    out: str = None
    scan: object = None
    noise_scan: object = None
    solver: dict = field(default_factory=dict)
    states: int = 1
    threads: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        for key, values in self.grid.items():
            if not values:
                raise ValueError(f"grid entry {key!r} is empty")

    @classmethod
    def from_dict(cls, cfg):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(**cfg)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------- helpers

def scan_from(value):
    if isinstance(value, ScanSpec):
        return value
    if isinstance(value, str):
        try:
            return TABLE1[value]
        except KeyError:
            raise ValueError(f"unknown scan preset {value!r}; choose from {sorted(TABLE1)}") from None
    if isinstance(value, dict):
        return ScanSpec(float(value["lambda_min"]), int(value.get("n_lambda", 10)),
                        float(value.get("d_lambda", 10.0)), value.get("small_k_d_lambda", {}))
    raise ValueError(f"cannot interpret scan {value!r}")


def default_scan(problem, state=0, noisy=False):
    """Tabulated scan for the built-in problems."""
    preset = problem.get("preset")
    suffix = "_noise" if noisy else ""
    if preset == "harmonic_benchmark":
        d = int(problem.get("d", 1))
        if noisy:
            if d != 1:
                raise ValueError("no tabulated noise scan for d > 1; give 'noise_scan'")
            return TABLE1["harmonic_1d_noise"]
        if state == 0:
            return TABLE1[f"harmonic_{d}d"]
    if preset == "morse":
        if noisy:
            return TABLE1["o2_noise"]
        if state < 2:
            return TABLE1["o2" if state == 0 else "o2_excited"]
    raise ValueError(f"no default scan for state {state} of {problem}; give 'scan' explicitly")


def scans_for(spec, n_states, noisy=False):
    value = spec.noise_scan if noisy else spec.scan
    if value is None:
        return [default_scan(spec.problem, i, noisy) for i in range(n_states)]
    if isinstance(value, list):
        if len(value) < n_states:
            raise ValueError("need one scan per state")
        return [scan_from(v) for v in value[:n_states]]
    return [scan_from(value)] * n_states


def solver_from(cfg, default_name="partitioned"):
    cfg = dict(cfg or {})
    return SolverConfig(cfg.get("name", default_name), TabuParams(**cfg.get("tabu", {})),
                        SaParams(**cfg.get("sa", {})))


def build_problem(problem):
    h = build_product_hamiltonian(problem_from_config(problem))
    return h, jacobi_eigen(h).eigenvalues


def basis_shape(problem):
    spec = problem_from_config(problem)
    return spec.dims[0].basis.size, spec.d


def _map(fn, jobs, threads):
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "" if math.isnan(value) else repr(value)
    return str(value)


def write_rows(path, kind, columns, rows):
    """Write ``rows`` (dicts) under ``columns`` with the schema line first."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {SCHEMA} {kind}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])
    return path


def read_rows(path):
    """Read a CSV written by :func:`write_rows` into a list of string dicts."""
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


def _finish(spec, kind, columns, rows, key):
    rows = sorted(rows, key=key)
    if spec.out:
        write_rows(spec.out, kind, columns, rows)
    return rows


def _error_row(base, exc):
    return dict(base, status=f"error: {type(exc).__name__}: {exc}".replace("\n", " "))


# ---------------------------------------------------------------- k sweep

K_SWEEP_COLUMNS = ["K", "seed", "state_index", "energy_qae", "energy_oracle", "abs_error",
                   "best_lambda", "raw_norm", "B", "d", "status"]


def _k_cell(args):
    h, oracle, K, seed, scans, n_states, solver, B, d, noise = args
    base = {"K": K, "seed": seed, "B": B, "d": d}
    try:
        if n_states == 1:
            states = [ground_state(h, K, scans[0], solver, noise, seed)]
        else:
            states = spectrum(h, n_states, K, scans, solver, noise=noise, seed=seed).states
    except (QaeError, ValueError) as exc:
        return [_error_row(dict(base, state_index=i), exc) for i in range(n_states)]
    return [dict(base, state_index=i, energy_qae=r.energy, energy_oracle=oracle[i],
                 abs_error=abs(r.energy - oracle[i]), best_lambda=r.best_lambda,
                 raw_norm=r.raw_norm, status="ok")
            for i, r in enumerate(states)]


def run_k_sweep(spec):
    """Ground (and optionally excited) state error against the oracle for each K."""
    h, oracle = build_problem(spec.problem)
    B, d = basis_shape(spec.problem)
    scans = scans_for(spec, spec.states)
    solver = solver_from(spec.solver)
    jobs = [(h, oracle, int(K), int(seed), scans, spec.states, solver, B, d, None)
            for K in spec.grid.get("K", range(1, 11)) for seed in spec.seeds]
    rows = [r for cell in _map(_k_cell, jobs, spec.threads) for r in cell]
    return _finish(spec, "k_sweep", K_SWEEP_COLUMNS, rows,
                   lambda r: (r["K"], r["seed"], r["state_index"]))


# ---------------------------------------------------------------- noise

NOISE_COLUMNS = ["scale", "K", "seed", "energy_qae", "energy_oracle", "abs_error", "best_lambda",
                 "raw_norm", "status"]
NOISE_SUMMARY_COLUMNS = ["scale", "K", "n_ok", "mean_error", "std_error", "min_error", "max_error"]


def run_noise(spec):
    """Error versus K for each noise scale.

    Scale 0 is the noiseless baseline and uses the ordinary scan, so its rows
    equal those of :func:`run_k_sweep` with the same seeds. Positive scales
    use the widened noise scan. A ``<out>_summary.csv`` with mean and spread
    per (scale, K) is written next to ``out``.
    """
    h, oracle = build_problem(spec.problem)
    B, d = basis_shape(spec.problem)
    solver = solver_from(spec.solver)
    quiet = scans_for(spec, 1)
    noisy = scans_for(spec, 1, noisy=True)
    mean_frac = float(spec.options.get("mean_frac", 0.007))
    std_frac = float(spec.options.get("std_frac", 0.008))
    jobs, labels = [], []
    for scale in spec.grid.get("scale", [0, 1, 3, 5]):
        noise = NoiseSpec(float(scale), mean_frac, std_frac) if scale else None
        for K in spec.grid.get("K", range(2, 9)):
            for seed in spec.seeds:
                jobs.append((h, oracle, int(K), int(seed), noisy if noise else quiet, 1, solver, B, d,
                             noise))
                labels.append(float(scale))
    cells = _map(_k_cell, jobs, spec.threads)
    rows = []
    for scale, cell in zip(labels, cells):
        row = cell[0]
        rows.append({c: row.get(c) for c in NOISE_COLUMNS if c != "scale"} | {"scale": scale})
    rows = _finish(spec, "noise", NOISE_COLUMNS, rows, lambda r: (r["scale"], r["K"], r["seed"]))
    if spec.out:
        out = Path(spec.out)
        write_rows(out.with_name(out.stem + "_summary.csv"), "noise_summary", NOISE_SUMMARY_COLUMNS,
                   summarize_errors(rows, ("scale", "K")))
    return rows


def summarize_errors(rows, keys):
    """Mean, population standard deviation and range of ``abs_error`` per group."""
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for key in sorted(groups):
        errs = [float(r["abs_error"]) for r in groups[key] if r["status"] == "ok"]
        row = dict(zip(keys, key))
        row["n_ok"] = len(errs)
        if errs:
            row.update(mean_error=statistics.fmean(errs), std_error=statistics.pstdev(errs),
                       min_error=min(errs), max_error=max(errs))
        out.append(row)
    return out


# ---------------------------------------------------------------- scaling

SCALING_COLUMNS = ["d", "K", "B", "n_qubits", "n_lambda", "seed", "time", "time_per_K",
                   "log10_time_per_K", "status"]


def _scaling_solver(cfg):
    # Problems up to the sub-QUBO size go straight to Tabu, as in qbsolv.
    cfg = dict(cfg or {})
    cfg["tabu"] = {"exact_threshold": 0, **cfg.get("tabu", {})}
    return solver_from(cfg)


def _scaling_cell(args):
    h, d, K, B, scan, solver, seed, repeats, timeout = args
    base = {"d": d, "K": K, "B": B, "n_qubits": K * h.n, "n_lambda": scan.n_lambda, "seed": seed}
    times = []
    try:
        for _ in range(repeats):
            times.append(ground_state(h, K, scan, solver, seed=seed).solve_time)
            if timeout and times[-1] > timeout:
                return dict(base, time=times[-1], status="timeout")
    except (QaeError, ValueError) as exc:
        return _error_row(base, exc)
    t = statistics.median(times)
    return dict(base, time=t, time_per_K=t / K, log10_time_per_K=math.log10(t / K), status="ok")


def run_scaling(spec):
    """Solver wall time of a ground-state scan over K and/or d.

    The problem is the d-dimensional oscillator benchmark; ``grid`` holds
    ``d`` and ``K`` lists. Time is the median of ``options['repeats']``
    (default 3) ground-state runs and counts the QUBO solves only.
    """
    repeats = int(spec.options.get("repeats", 3))
    timeout = spec.options.get("timeout")
    m_max = int(spec.problem.get("m_max", 2))
    default_d = [1, 2, 3] if spec.kind == "scaling_d" else [int(spec.problem.get("d", 1))]
    solver = _scaling_solver(spec.solver)
    jobs = []
    for d in spec.grid.get("d", default_d):
        problem = {"preset": "harmonic_benchmark", "d": int(d), "m_max": m_max}
        h = build_product_hamiltonian(problem_from_config(problem))
        B = basis_shape(problem)[0]
        scan = scan_from(spec.scan) if spec.scan is not None else default_scan(problem)
        if "n_lambda" in spec.options:
            scan = replace(scan, n_lambda=int(spec.options["n_lambda"]))
        for K in spec.grid.get("K", [4, 8]):
            for seed in spec.seeds:
                jobs.append((h, int(d), int(K), B, scan, solver, int(seed), repeats,
                             timeout))
    # timings are only meaningful when cells do not compete for cores
    rows = [_scaling_cell(j) for j in jobs]
    return _finish(spec, spec.kind, SCALING_COLUMNS, rows, lambda r: (r["d"], r["K"], r["seed"]))


def fit_line(x, y):
    """Least-squares ``y = slope * x + intercept``; returns ``(slope, intercept, r2)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def partition_threshold_K(B, d, subqubo_size=47):
    """First K whose QUBO (K * B**d variables) exceeds the sub-QUBO size."""
    return subqubo_size // (B ** d) + 1


def step_ratio(rows, d, subqubo_size=47):
    """time/K just past the partition threshold over the largest time/K below it."""
    rows = [r for r in rows if r["d"] == d and r["status"] == "ok"]
    if not rows:
        return None
    K_star = partition_threshold_K(rows[0]["B"], d, subqubo_size)
    below = [r["time_per_K"] for r in rows if r["K"] < K_star]
    at = [r["time_per_K"] for r in rows if r["K"] == K_star]
    if not below or not at:
        return None
    return at[0] / max(below)


# ---------------------------------------------------------------- convergence

CONVERGENCE_COLUMNS = ["parameter", "value", "K", "seed", "energy_qae", "energy_oracle",
                       "abs_error", "best_lambda", "status"]
_SWEPT = {"nrep_sweep": "n_rep", "reads_sweep": "reads", "nlambda_sweep": "n_lambda"}


def _convergence_cell(args):
    h, oracle, K, seed, scan, solver, parameter, value = args
    base = {"parameter": parameter, "value": value, "K": K, "seed": seed}
    try:
        r = ground_state(h, K, scan, solver, seed=seed)
    except (QaeError, ValueError) as exc:
        return _error_row(base, exc)
    return dict(base, energy_qae=r.energy, energy_oracle=oracle[0],
                abs_error=abs(r.energy - oracle[0]), best_lambda=r.best_lambda, status="ok")


def run_convergence(spec):
    """Error against the swept N_rep (Tabu), reads (annealing) or N_lambda.

    ``nlambda_sweep`` keeps the scanned range fixed at
    ``options['lambda_range']`` (default 2000) and sets the step to
    ``range / N_lambda``.
    """
    parameter = _SWEPT.get(spec.kind)
    if parameter is None:
        raise ValueError(f"{spec.kind} is not a convergence sweep")
    h, oracle = build_problem(spec.problem)
    K = int(spec.options.get("K", 8))
    base_scan = scans_for(spec, 1)[0]
    default_name = "sa" if parameter == "reads" else "partitioned"
    solver = solver_from(spec.solver, default_name)
    jobs = []
    for value in spec.grid[parameter]:
        scan, cfg = base_scan, solver
        if parameter == "n_rep":
            cfg = replace(solver, tabu=replace(solver.tabu, n_rep=int(value)))
        elif parameter == "reads":
            cfg = replace(solver, sa=replace(solver.sa, reads=int(value)))
        else:
            span = float(spec.options.get("lambda_range", 2000.0))
            scan = ScanSpec(base_scan.lambda_min, int(value), span / int(value))
        for seed in spec.seeds:
            jobs.append((h, oracle, K, int(seed), scan, cfg, parameter, int(value)))
    rows = _map(_convergence_cell, jobs, spec.threads)
    return _finish(spec, spec.kind, CONVERGENCE_COLUMNS, rows, lambda r: (r["value"], r["seed"]))


# ---------------------------------------------------------------- chain scan

CHAIN_COLUMNS = ["lambda", "c", "min_energy", "break_rate", "trivial_flag", "seed", "status"]


def chain_grids(h, K, n_lambda=9, n_c=6, c_factor=20.0):
    """Lambda from 0 to twice the oracle ground energy; c from 0 to ``c_factor * max|Q|``."""
    e0 = jacobi_eigen(h).eigenvalues[0]
    lams = np.linspace(0.0, 2.0 * e0, n_lambda)
    m = build_qubo(h, Encoding(K, h.n), float(lams[-1])).max_abs()
    return [float(v) for v in lams], [float(v) for v in np.linspace(0.0, c_factor * m, n_c)]


def run_chain_scan(spec):
    """(lambda, c) phase map of a chained QUBO solved by annealing."""
    h, _ = build_problem(spec.problem)
    opts = spec.options
    K = int(opts.get("K", 2))
    chain = ChainSpec(int(opts.get("chain_length", 3)), 0.0, opts.get("tie_rule", "zero"))
    lams, cs = chain_grids(h, K, int(opts.get("n_lambda", 9)), int(opts.get("n_c", 6)),
                           float(opts.get("c_factor", 20.0)))
    lams = [float(v) for v in spec.grid.get("lambda", lams)]
    cs = [float(v) for v in spec.grid.get("c", cs)]
    sa = solver_from(spec.solver, "sa").sa
    rows = []
    for seed in spec.seeds:
        cells = scan_lambda_chain(h, Encoding(K, h.n), lams, cs, chain, sa, int(seed), spec.threads)
        for cell in cells:
            ok = cell.status == "ok"
            rows.append({"lambda": cell.lam, "c": cell.c,
                         "min_energy": cell.min_energy if ok and not cell.trivial else None,
                         "break_rate": cell.break_rate if ok else None,
                         "trivial_flag": cell.trivial, "seed": int(seed), "status": cell.status})
    return _finish(spec, "chain_scan", CHAIN_COLUMNS, rows,
                   lambda r: (r["seed"], r["lambda"], r["c"]))


RUNNERS = {
    "k_sweep": run_k_sweep,
    "nrep_sweep": run_convergence,
    "reads_sweep": run_convergence,
    "nlambda_sweep": run_convergence,
    "scaling_k": run_scaling,
    "scaling_d": run_scaling,
    "noise": run_noise,
    "chain_scan": run_chain_scan,
}


def run(spec):
    return RUNNERS[spec.kind](spec)


def failed(rows):
    return sum(1 for r in rows if r.get("status") != "ok")
