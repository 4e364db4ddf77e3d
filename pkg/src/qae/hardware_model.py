"""Annealer imperfections: control-error noise on the QUBO and qubit chains.

Chains are modelled abstractly: each logical variable becomes a linear chain
of ``L`` physical variables held together by a ferromagnetic penalty ``c``.
No particular hardware graph is assumed.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._backend import kernels
from .linalg import rayleigh_quotient
from .qubo_map import Encoding, Qubo, build_qubo, decode
from .solvers import SaParams, sa_solve

TRIVIAL_NORM = 1e-6


@dataclass(frozen=True)
class NoiseSpec:
    """Integrated control error: ``delta = s * M * (u * mean_frac + g * std_frac)``."""

    scale: float = 1.0
    mean_frac: float = 0.007
    std_frac: float = 0.008
    seed: int = 0

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("noise scale must be non-negative")
        for name in ("mean_frac", "std_frac"):
            if not 0 <= getattr(self, name) <= 0.2:
                raise ValueError(f"{name} must lie in [0, 0.2]")


@dataclass(frozen=True)
class ChainSpec:
    chain_length: int = 1
    chain_penalty: float = 0.0
    tie_rule: str = "zero"

    def __post_init__(self):
        if self.chain_length < 1:
            raise ValueError("chain_length must be >= 1")
        if self.chain_penalty < 0:
            raise ValueError("chain_penalty must be non-negative")
        if self.tie_rule not in ("zero", "one"):
            raise ValueError("tie_rule must be 'zero' or 'one'")


def apply_noise(q, spec):
    """Perturb every upper-triangular element of ``q``.

    ``M`` is the largest magnitude in ``q``, ``u`` a random sign and ``g`` a
    standard normal, all drawn from ``spec.seed``. A zero scale returns ``q``.
    """
    if spec.scale == 0 or q.n == 0:
        return q
    rng = np.random.default_rng(spec.seed & 0xFFFFFFFFFFFFFFFF)
    iu = np.triu_indices(q.n)
    m = len(iu[0])
    u = rng.choice((-1.0, 1.0), size=m)
    g = rng.standard_normal(m)
    upper = q.matrix.copy()
    upper[iu] += spec.scale * q.max_abs() * (u * spec.mean_frac + g * spec.std_frac)
    return Qubo(upper)


def embed_chains(q, spec):
    """Replace each logical variable ``i`` by physical variables ``i*L .. i*L+L-1``.

    The linear term is split evenly over the chain; the coupling of logical
    ``i < j`` joins member ``j mod L`` of chain ``i`` to member ``i mod L`` of
    chain ``j``; neighbouring members pay ``c`` whenever they disagree.
    """
    L = spec.chain_length
    if L == 1:
        return q
    n = q.n
    c = spec.chain_penalty
    u = q.matrix
    out = np.zeros((n * L, n * L))
    for i in range(n):
        base = i * L
        for m in range(L):
            out[base + m, base + m] += u[i, i] / L
        for m in range(L - 1):
            a, b = base + m, base + m + 1
            out[a, a] += c
            out[b, b] += c
            out[a, b] -= 2.0 * c
        for j in range(i + 1, n):
            if u[i, j] != 0.0:
                out[base + j % L, j * L + i % L] += u[i, j]
    return Qubo(out)


def unembed(bits, spec):
    """Majority vote per chain; returns ``(logical_bits, break_rate)``."""
    bits = np.asarray(bits, dtype=np.int8)
    L = spec.chain_length
    if bits.ndim != 1 or bits.size % L:
        raise ValueError(f"bitstring length {bits.size} is not a multiple of chain length {L}")
    chains = bits.reshape(-1, L).astype(np.int64)
    ones = chains.sum(axis=1)
    logical = (2 * ones > L).astype(np.int8)
    if spec.tie_rule == "one":
        logical[2 * ones == L] = 1
    broken = (ones != 0) & (ones != L)
    rate = float(broken.mean()) if len(broken) else 0.0
    return logical, rate


@dataclass
class ChainCell:
    lam: float
    c: float
    min_energy: float  # Rayleigh quotient of the unembedded state; nan if trivial
    break_rate: float
    trivial: bool
    status: str = "ok"


def _chain_cell(h, encoding, lam, c, chain, sa, seed, li, ci):
    try:
        q = embed_chains(build_qubo(h, encoding, lam), replace(chain, chain_penalty=c))
        res = sa_solve(q, replace(sa, seed=kernels.mix_seed(kernels.mix_seed(seed, li), ci)))
        logical, rate = unembed(res.best_bits, chain)
        a = decode(logical, encoding)
        if np.linalg.norm(a) < TRIVIAL_NORM:
            return ChainCell(lam, c, float("nan"), rate, True)
        return ChainCell(lam, c, rayleigh_quotient(h, a), rate, False)
    except Exception as exc:  # a failed cell must not stop the scan
        return ChainCell(lam, c, float("nan"), float("nan"), False, f"error: {exc}")


def scan_lambda_chain(h, encoding, lambda_grid, c_grid, chain, sa=SaParams(), seed=0, threads=1):
    """Two-dimensional (lambda, c) scan with chained QUBOs solved by annealing.

    Returns a list of :class:`ChainCell` ordered by lambda, then c. Each cell
    seeds its solver from ``(seed, lambda index, c index)``.
    """
    if isinstance(encoding, int):
        encoding = Encoding(encoding, h.n)
    lambda_grid, c_grid = list(lambda_grid), list(c_grid)
    if not lambda_grid or not c_grid:
        raise ValueError("lambda and c grids must be non-empty")
    jobs = [(h, encoding, lam, c, chain, sa, seed, li, ci)
            for li, lam in enumerate(lambda_grid) for ci, c in enumerate(c_grid)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda j: _chain_cell(*j), jobs))
    return [_chain_cell(*j) for j in jobs]


CHAIN_COLUMNS = ["lambda", "c", "min_energy", "break_rate", "trivial_flag", "status"]


def write_chain_scan(cells, path):
    """Write the phase map; trivial or failed cells leave ``min_energy`` empty."""
    cells = sorted(cells, key=lambda cell: (cell.lam, cell.c))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CHAIN_COLUMNS)
        for cell in cells:
            energy = "" if cell.trivial or cell.status != "ok" else repr(float(cell.min_energy))
            rate = "" if cell.status != "ok" else repr(float(cell.break_rate))
            w.writerow([repr(float(cell.lam)), repr(float(cell.c)), energy, rate, int(cell.trivial), cell.status])
