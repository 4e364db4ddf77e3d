"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation so that, for the same
inputs, Tabu search and annealing return identical bitstrings under either
backend. The floating point accumulation order is kept sequential on purpose.

All QUBO kernels take the symmetric coupling form ``W`` of a QUBO: ``W[i, i]``
holds the linear term and ``W[i, j] == W[j, i]`` the pair coupling for
``i != j``.
"""

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM = 0xD1B54A32D192ED03


def _splitmix_out(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(seed, index):
    """Derive an independent 64-bit seed for stream ``index`` of ``seed``."""
    state = ((seed & MASK64) ^ ((index * _STREAM) & MASK64)) & MASK64
    return _splitmix_out((state + _GOLDEN) & MASK64)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = seed & MASK64

    def next(self):
        self.state = (self.state + _GOLDEN) & MASK64
        return _splitmix_out(self.state)

    def uniform(self):
        return (self.next() >> 11) * (1.0 / 9007199254740992.0)


def sequential_energy(W, x):
    """Objective of ``x`` summed in row-major upper-triangular order."""
    xf = np.asarray(x, dtype=np.float64)
    terms = np.triu(W) * xf[:, None] * xf[None, :]
    if terms.size == 0:
        return 0.0
    return float(np.add.accumulate(terms.ravel())[-1])


def flip_gains(W, x):
    """Energy change of flipping each variable, accumulated sequentially."""
    n = W.shape[0]
    xf = np.asarray(x, dtype=np.float64)
    off = W * xf[None, :]
    off[np.arange(n), np.arange(n)] = 0.0
    acc = np.add.accumulate(np.column_stack([np.diag(W), off]), axis=1)[:, -1]
    return (1.0 - 2.0 * xf) * acc


def _flip(W, x, g, i):
    gi = g[i]
    d = 1.0 - 2.0 * x[i]
    s = 1.0 - 2.0 * x
    g += W[i] * s * d
    g[i] = -gi
    x[i] = 1 - x[i]
    return gi


def tabu_search(W, x0, energy0, tenure, n_rep, tol, restart_period=0, kick=0.5, seed=0):
    """Single-flip Tabu search with aspiration and perturbation restarts.

    After ``restart_period`` consecutive non-improving moves the walk resumes
    from the incumbent with each bit flipped with probability ``kick`` (draws
    from ``SplitMix64(seed)``). The search ends after ``n_rep`` consecutive
    moves without a new best.

    Returns ``(best_x, best_energy, iterations, trace_iter, trace_energy)``
    where the trace records each improvement of the best energy.
    """
    n = W.shape[0]
    x = np.array(x0, dtype=np.int8)
    xf = x.astype(np.float64)
    g = flip_gains(W, xf)
    E = float(energy0)
    best_x = x.copy()
    best_E = E
    trace_it = [0]
    trace_E = [E]
    tabu_until = np.zeros(n, dtype=np.int64)
    it = 0
    stale = 0
    since = 0
    rng = SplitMix64(seed)
    if n == 0:
        return best_x, best_E, 0, trace_it, trace_E
    while stale < n_rep:
        it += 1
        allowed = (tabu_until < it) | (E + g < best_E - tol)
        if allowed.any():
            masked = np.where(allowed, g, np.inf)
            i = int(np.argmin(masked))
        else:
            i = int(np.argmin(g))
        E += _flip(W, xf, g, i)
        x[i] = 1 - x[i]
        tabu_until[i] = it + tenure
        if E < best_E - tol:
            best_E = E
            best_x[:] = x
            stale = 0
            trace_it.append(it)
            trace_E.append(E)
        else:
            stale += 1
            since += 1
            if restart_period > 0 and since >= restart_period and stale < n_rep:
                since = 0
                for j in range(n):
                    xf[j] = best_x[j]
                    if rng.uniform() < kick:
                        xf[j] = 1.0 - xf[j]
                x[:] = xf.astype(np.int8)
                tabu_until[:] = 0
                E = sequential_energy(W, xf)
                g = flip_gains(W, xf)
        if stale == 0:
            since = 0
    return best_x, best_E, it, trace_it, trace_E


def exact_search(W, tol):
    """Full enumeration; returns the lexicographically smallest minimiser."""
    n = W.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int8)
    U = np.triu(W)
    chunk = 1 << min(n, 16)
    total = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)

    def blocks():
        for start in range(0, total, chunk):
            codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
            # x_0 is the most significant bit, so code order is lexicographic
            X = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.float64)
            yield X, np.einsum("ri,ij,rj->r", X, U, X)

    e_min = min(float(E.min()) for _, E in blocks())
    for X, E in blocks():
        hits = np.flatnonzero(E <= e_min + tol)
        if hits.size:
            return X[hits[0]].astype(np.int8)
    raise AssertionError("enumeration lost its minimum")


def anneal(W, betas, reads, seed, tol):
    """Metropolis annealing over ``reads`` independent runs.

    Each read starts from a random state drawn from its own stream
    ``mix_seed(seed, read)`` and follows the inverse-temperature schedule
    ``betas`` with one sequential sweep per entry. The final state of every
    read competes; ties go to the lexicographically smaller bitstring.
    """
    n = W.shape[0]
    best_x = np.zeros(n, dtype=np.int8)
    best_E = math.inf
    for r in range(reads):
        rng = SplitMix64(mix_seed(seed, r))
        x = np.array([rng.next() >> 63 for _ in range(n)], dtype=np.int8)
        xf = x.astype(np.float64)
        g = flip_gains(W, xf)
        E = sequential_energy(W, xf)
        for beta in betas:
            for i in range(n):
                d = g[i]
                if d <= 0.0 or rng.uniform() < math.exp(-beta * d):
                    E += _flip(W, xf, g, i)
        x = xf.astype(np.int8)
        if E < best_E - tol or (
            E <= best_E + tol and tuple(x) < tuple(best_x)
        ):
            best_E = E
            best_x = x
    return best_x


def jacobi(A, tol, max_sweeps):
    """Cyclic Jacobi on a copy of symmetric ``A``.

    Returns ``(diag, V, sweeps, off)``; ``off`` is the final off-diagonal
    Frobenius norm. ``sweeps == max_sweeps`` with ``off`` above threshold
    signals non-convergence to the caller.
    """
    a = np.array(A, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    norm = math.sqrt(float(np.sum(a * a)))
    threshold = tol * norm
    iu = np.triu_indices(n, 1)
    off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
    sweeps = 0
    while off > threshold and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        sweeps += 1
        off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
    return np.diag(a).copy(), v, sweeps, off
