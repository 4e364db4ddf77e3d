"""QUBO minimisers: enumeration, Tabu search, sub-QUBO partitioning, annealing.

Every solver returns a :class:`SolverResult` whose ``best_energy`` is the
objective re-evaluated with :func:`qae.qubo_map.qubo_energy` on the returned
bits. Ties are broken towards the lexicographically smallest bitstring.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .errors import ProblemTooLargeError
from .qubo_map import Qubo, qubo_energy

EXACT_LIMIT = 30


@dataclass(frozen=True)
class TabuParams:
    tenure: int = 20
    n_rep: int = 10_000
    subqubo_size: int = 47
    exact_threshold: int = 20
    seed: int = 0
    # non-improving partition passes before the outer loop stops
    outer_rep: int = 2
    # restart after this many non-improving moves (None: 2n); kick = flip probability
    restart_period: int = None
    kick: float = 0.5
    selection: str = "gain"  # or "random"

    def __post_init__(self):
        if self.tenure < 1 or self.n_rep < 1:
            raise ValueError("tenure and n_rep must be positive")
        if not 0 <= self.exact_threshold <= EXACT_LIMIT:
            raise ValueError(f"exact_threshold must lie in 0..{EXACT_LIMIT}")
        if self.subqubo_size < max(self.exact_threshold, 1):
            raise ValueError("subqubo_size must be >= exact_threshold")
        if self.selection not in ("gain", "random"):
            raise ValueError("selection must be 'gain' or 'random'")


@dataclass(frozen=True)
class SaParams:
    reads: int = 10_000
    sweeps: int = 100
    t_hot: float = None
    t_cold: float = None
    seed: int = 0

    def __post_init__(self):
        if self.reads < 1 or self.sweeps < 1:
            raise ValueError("reads and sweeps must be positive")
        if self.t_hot is not None and self.t_cold is not None:
            if not self.t_hot > self.t_cold > 0:
                raise ValueError("need t_hot > t_cold > 0")


@dataclass
class SolverResult:
    best_bits: np.ndarray
    best_energy: float
    evaluations: int = 0
    wall_time: float = 0.0
    trace: list = field(default_factory=list)


def _tol(q):
    return 1e-12 * max(1.0, q.max_abs() * q.n)


def _finish(q, bits, evaluations, start, trace=None):
    bits = np.asarray(bits, dtype=np.int8)
    return SolverResult(bits, qubo_energy(q, bits), int(evaluations),
                        time.perf_counter() - start, trace or [])


def flip_gains(q, x):
    """Objective change from flipping each variable of ``x``."""
    return kernels.flip_gains(q.symmetric(), np.asarray(x, dtype=np.float64))


def effective_tenure(tenure, n):
    return max(1, min(tenure, n // 4))


def exact_solve(q, limit=EXACT_LIMIT):
    """Global minimum by Gray-code enumeration (``n <= limit``)."""
    if q.n > min(limit, EXACT_LIMIT):
        raise ProblemTooLargeError(f"exact_solve limited to {min(limit, EXACT_LIMIT)} variables, got {q.n}")
    start = time.perf_counter()
    bits = kernels.exact_search(q.symmetric(), _tol(q))
    return _finish(q, bits, 1 << q.n, start)


def _random_bits(n, seed):
    return np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF).integers(0, 2, n).astype(np.int8)


def _tabu_from(q, x0, params, stream):
    W = q.symmetric()
    e0 = kernels.sequential_energy(W, x0)
    period = params.restart_period if params.restart_period is not None else 2 * q.n
    return kernels.tabu_search(W, x0, e0, effective_tenure(params.tenure, q.n), params.n_rep,
                               _tol(q), period, params.kick, kernels.mix_seed(params.seed, stream))


def tabu_solve(q, params=TabuParams(), x0=None, stream=1):
    """Single-flip Tabu search from a seeded random start (or ``x0``).

    Stops after ``params.n_rep`` consecutive moves without improving the best
    energy. Every ``restart_period`` stale moves the walk restarts from the
    incumbent with each bit flipped with probability ``kick``; the default
    ``kick = 0.5`` is a fresh random restart. ``trace`` lists
    ``(iteration, best_energy)`` at each improvement.
    """
    start = time.perf_counter()
    if q.n == 0 or not np.any(q.matrix):
        return _finish(q, np.zeros(q.n, dtype=np.int8), 0, start, [(0, 0.0)])
    if x0 is None:
        x0 = _random_bits(q.n, kernels.mix_seed(params.seed, 0))
    bits, _, iterations, t_it, t_e = _tabu_from(q, np.asarray(x0, dtype=np.int8), params, stream)
    return _finish(q, bits, iterations, start, list(zip(t_it, t_e)))


def clamp_subqubo(q, x, active):
    """Sub-QUBO over sorted ``active`` with every other variable fixed to ``x``.

    Returns ``(sub, constant)`` such that
    ``qubo_energy(sub, y) + constant == qubo_energy(q, x with x[active] = y)``.
    """
    active = np.asarray(active, dtype=np.intp)
    x = np.asarray(x, dtype=np.float64)
    fixed = x.copy()
    fixed[active] = 0.0
    W = q.symmetric()
    sub = q.matrix[np.ix_(active, active)].copy()
    sub[np.diag_indices_from(sub)] += W[active] @ fixed
    return Qubo(sub), qubo_energy(q, fixed)


def _direct(q, params):
    if q.n <= params.exact_threshold:
        return exact_solve(q)
    return tabu_solve(q, params)


def partitioned_solve(q, params=TabuParams()):
    """Tabu search with clamp-and-solve sub-QUBO passes for large problems.

    Problems up to ``subqubo_size`` go straight to enumeration or Tabu. Larger
    ones start from a full Tabu run; each pass then ranks the variables of the
    incumbent (least-determined first: smallest ``|flip gain|``, or a seeded
    random order), cuts the ranking into consecutive blocks of
    ``subqubo_size`` so that every variable is freed once, and re-solves each
    block with the rest clamped. The loop ends after ``outer_rep`` passes in
    a row fail to improve the incumbent.
    """
    if q.n <= params.subqubo_size:
        return _direct(q, params)
    start = time.perf_counter()
    tol = _tol(q)
    first = tabu_solve(q, params)
    evaluations = first.evaluations
    best = first.best_bits.copy()
    best_e = first.best_energy
    trace = [(evaluations, best_e)]
    stale = 0
    pass_index = 0
    ranked = True
    while stale < params.outer_rep:
        pass_index += 1
        x = best.copy()
        if params.selection == "gain" and ranked:
            order = np.argsort(np.abs(flip_gains(q, x)), kind="stable")
        else:
            order = np.random.default_rng(kernels.mix_seed(params.seed, pass_index)).permutation(q.n)
        for block_index, lo in enumerate(range(0, q.n, params.subqubo_size)):
            active = np.sort(order[lo:lo + params.subqubo_size])
            sub, _ = clamp_subqubo(q, x, active)
            if sub.n <= params.exact_threshold:
                res = exact_solve(sub)
            else:
                res = tabu_solve(sub, params, x0=x[active],
                                 stream=(pass_index << 20) + block_index + 2)
            evaluations += res.evaluations
            x[active] = res.best_bits
        e = qubo_energy(q, x)
        if e < best_e - tol:
            best, best_e = x, e
            stale = 0
            ranked = True
            trace.append((evaluations, best_e))
        else:
            stale += 1
            ranked = False
    return _finish(q, best, evaluations, start, trace)


def anneal_schedule(q, params):
    """Geometric inverse-temperature schedule, one entry per sweep."""
    mags = np.abs(q.matrix[q.matrix != 0])
    if mags.size == 0:
        return np.zeros(params.sweeps)
    t_hot = params.t_hot if params.t_hot is not None else float(mags.max()) * q.n
    if params.t_cold is not None:
        t_cold = params.t_cold
    else:
        t_cold = 1e-3 * float(mags[mags > 1e-12 * mags.max()].min())
    t_cold = min(t_cold, t_hot)
    return 1.0 / np.geomspace(t_hot, t_cold, params.sweeps)


def sa_solve(q, params=SaParams()):
    """Best final state over ``params.reads`` independent Metropolis anneals."""
    start = time.perf_counter()
    if q.n == 0:
        return _finish(q, np.zeros(0, dtype=np.int8), 0, start)
    betas = anneal_schedule(q, params)
    bits = kernels.anneal(q.symmetric(), betas, params.reads, params.seed, _tol(q))
    return _finish(q, bits, params.reads * params.sweeps * q.n, start)


SOLVERS = {
    "exact": lambda q, tabu, sa: exact_solve(q),
    "tabu": lambda q, tabu, sa: tabu_solve(q, tabu),
    "partitioned": lambda q, tabu, sa: partitioned_solve(q, tabu),
    "sa": lambda q, tabu, sa: sa_solve(q, sa),
}


@dataclass(frozen=True)
class SolverConfig:
    """Solver choice plus parameters; ``seed`` overrides both parameter seeds."""

    name: str = "partitioned"
    tabu: TabuParams = TabuParams()
    sa: SaParams = SaParams()

    def __post_init__(self):
        if self.name not in SOLVERS:
            raise ValueError(f"unknown solver {self.name!r}; choose from {sorted(SOLVERS)}")

    def with_seed(self, seed):
        return replace(self, tabu=replace(self.tabu, seed=seed), sa=replace(self.sa, seed=seed))

    def solve(self, q):
        return SOLVERS[self.name](q, self.tabu, self.sa)
