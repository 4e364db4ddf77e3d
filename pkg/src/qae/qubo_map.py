"""Fixed-point qubit encoding of expansion coefficients and QUBO assembly.

Coefficient ``alpha`` is carried by ``K`` binary variables::

    a_alpha = sum_{k=1}^{K-1} 2^(k-K) q_k - q_K

so ``a_alpha`` lies in ``[-1, 1 - 2^(1-K)]``. Internally variables are
0-based, ``i = K * alpha + k``; :func:`variable_index` accepts the 1-based
indices used in the literature.
"""

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Encoding:
    K: int
    C: int

    def __post_init__(self):
        if self.K < 1 or self.C < 1:
            raise ValueError("K and C must be positive")

    @property
    def n_qubits(self):
        return self.K * self.C

    @property
    def weights(self):
        w = np.array([2.0 ** (k - self.K) for k in range(1, self.K)] + [-1.0])
        w.setflags(write=False)
        return w

    def grid(self):
        """All representable coefficient values, ascending."""
        bits = np.array(list(itertools.product((0, 1), repeat=self.K)), dtype=np.float64)
        return np.unique(bits @ self.weights)


class Qubo:
    """Upper-triangular QUBO coefficient table.

    Objective: ``sum_i Q[i,i] x_i + sum_{i<j} Q[i,j] x_i x_j``.
    """

    __slots__ = ("_u",)

    def __init__(self, upper):
        u = np.triu(np.array(upper, dtype=np.float64))
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("QUBO table must be square")
        u.setflags(write=False)
        self._u = u

    @property
    def n(self):
        return self._u.shape[0]

    @property
    def matrix(self):
        return self._u

    def symmetric(self):
        """Coupling form: linear terms on the diagonal, each pair split across (i,j) and (j,i)."""
        u = self._u
        return u + np.triu(u, 1).T

    def max_abs(self):
        return float(np.max(np.abs(self._u))) if self.n else 0.0

    def __eq__(self, other):
        return isinstance(other, Qubo) and np.array_equal(self._u, other._u)

    def __repr__(self):
        return f"Qubo(n={self.n})"

    def write(self, path):
        """Plain-text triplets: header ``n <n>`` then ``i j value`` (0-based, i <= j)."""
        rows, cols = np.nonzero(self._u)
        with open(path, "w") as fh:
            fh.write(f"n {self.n}\n")
            for i, j in zip(rows, cols):
                fh.write(f"{i} {j} {float(self._u[i, j])!r}\n")

    @classmethod
    def read(cls, path):
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) != 2 or header[0] != "n":
                raise ValueError("QUBO file must start with 'n <count>'")
            n = int(header[1])
            u = np.zeros((n, n))
            for line in fh:
                parts = line.split()
                if not parts or parts[0].startswith("#"):
                    continue
                i, j, value = int(parts[0]), int(parts[1]), float(parts[2])
                if i > j:
                    i, j = j, i
                u[i, j] += value
        return cls(u)


def coeff_value(bits, K):
    bits = np.asarray(bits)
    if bits.shape != (K,):
        raise ValueError(f"expected {K} bits, got {bits.shape}")
    return float(bits.astype(np.float64) @ Encoding(K, 1).weights)


def variable_index(alpha_multi, k, K, B, d=None):
    """1-based QUBO variable index of qubit ``k`` of coefficient ``alpha_multi``.

    ``alpha_multi`` holds one 1-based basis index per dimension, slowest first:
    ``i = K*B^(d-1)*(alpha_1 - 1) + ... + K*(alpha_d - 1) + k``.
    """
    alphas = [int(a) for a in (alpha_multi if np.iterable(alpha_multi) else [alpha_multi])]
    d = len(alphas) if d is None else d
    if len(alphas) != d:
        raise ValueError("alpha_multi must have one entry per dimension")
    if not 1 <= k <= K:
        raise ValueError(f"qubit index {k} outside 1..{K}")
    composite = 0
    for a in alphas:
        if not 1 <= a <= B:
            raise ValueError(f"basis index {a} outside 1..{B}")
        composite = composite * B + (a - 1)
    return K * composite + k


def build_qubo(h, encoding, lam):
    """QUBO of ``a^T (H - lam I) a`` with ``a`` the decoded coefficient vector."""
    if h.n != encoding.C:
        raise ValueError(f"matrix dimension {h.n} != coefficient count {encoding.C}")
    m = h.array - lam * np.eye(h.n)
    w = encoding.weights
    p = np.kron(m, np.outer(w, w))
    return Qubo(2.0 * np.triu(p, 1) + np.diag(np.diag(p)))


def decode(bits, encoding):
    bits = np.asarray(bits)
    if bits.shape != (encoding.n_qubits,):
        raise ValueError(f"expected {encoding.n_qubits} bits, got {bits.shape}")
    return bits.reshape(encoding.C, encoding.K).astype(np.float64) @ encoding.weights


def encode_nearest(a, encoding):
    """Bits whose decoded coefficients are nearest to ``a`` (ties to the lower value)."""
    a = np.asarray(a, dtype=np.float64)
    table = np.array(list(itertools.product((0, 1), repeat=encoding.K)), dtype=np.int8)
    values = table.astype(np.float64) @ encoding.weights
    order = np.argsort(values, kind="stable")
    values, table = values[order], table[order]
    picks = [table[int(np.argmin(np.abs(values - v)))] for v in a]
    return np.concatenate(picks) if picks else np.zeros(0, dtype=np.int8)


def qubo_energy(q, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (q.n,):
        raise ValueError(f"expected {q.n} bits, got {x.shape}")
    return float(x @ (q.matrix @ x))


def functional_value(h, a, lam):
    """Direct evaluation of ``a^T (H - lam I) a``."""
    a = np.asarray(a, dtype=np.float64)
    return float(a @ h.array @ a - lam * (a @ a))
