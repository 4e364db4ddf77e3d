"""Dense symmetric matrices and the Jacobi eigensolver used as the oracle."""

import json
import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ConvergenceError, TrivialSolutionError


class SymMatrix:
    """Immutable real symmetric matrix (entries in cm^-1)."""

    __slots__ = ("_a",)

    def __init__(self, array):
        a = np.array(array, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        if not np.array_equal(a, a.T):
            scale = max(1.0, float(np.max(np.abs(a))))
            if np.max(np.abs(a - a.T)) > 1e-12 * scale:
                raise ValueError("matrix is not symmetric")
            a = np.triu(a) + np.triu(a, 1).T
        a.setflags(write=False)
        self._a = a

    @classmethod
    def from_upper(cls, n, upper):
        """Build from row-major upper-triangular entries (diagonal included)."""
        upper = np.asarray(upper, dtype=np.float64)
        if upper.shape != (n * (n + 1) // 2,):
            raise ValueError(f"expected {n * (n + 1) // 2} upper entries, got {upper.size}")
        a = np.zeros((n, n))
        a[np.triu_indices(n)] = upper
        return cls(np.triu(a) + np.triu(a, 1).T)

    @property
    def n(self):
        return self._a.shape[0]

    @property
    def array(self):
        return self._a

    def upper(self):
        return self._a[np.triu_indices(self.n)].copy()

    def frobenius(self):
        return float(np.linalg.norm(self._a))

    def __eq__(self, other):
        return isinstance(other, SymMatrix) and np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash(self._a.tobytes())

    def __repr__(self):
        return f"SymMatrix(n={self.n})"


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns
    sweeps: int = 0

    def residuals(self, h):
        a = h.array
        return np.linalg.norm(a @ self.eigenvectors - self.eigenvectors * self.eigenvalues, axis=0)


def jacobi_eigen(h, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi diagonalisation with row-major sweeps.

    Converges when the off-diagonal Frobenius norm drops below
    ``tol * ||h||_F``; raises :class:`ConvergenceError` otherwise.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    diag, vecs, sweeps, off = kernels.jacobi(h.array, tol, max_sweeps)
    norm = h.frobenius()
    if off > tol * norm:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off / max(norm, 1e-300))
    order = np.argsort(diag, kind="stable")
    w = diag[order]
    v = vecs[:, order]
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(w, v, sweeps)


def rayleigh_quotient(h, v):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (h.n,):
        raise ValueError(f"vector length {v.shape} does not match matrix dimension {h.n}")
    vv = float(v @ v)
    if vv == 0.0:
        raise TrivialSolutionError("trivial solution: zero vector has no Rayleigh quotient")
    return float(v @ h.array @ v) / vv


def deflate(h, psi0, s0):
    """Return ``h + s0 * psi0 psi0^T``; ``psi0`` is normalised if needed."""
    if s0 < 0:
        raise ValueError("shift s0 must be non-negative")
    psi = np.asarray(psi0, dtype=np.float64)
    if psi.shape != (h.n,):
        raise ValueError("psi0 length does not match matrix dimension")
    norm = math.sqrt(float(psi @ psi))
    if norm == 0.0:
        raise TrivialSolutionError("cannot deflate with a zero vector")
    if abs(norm - 1.0) > 1e-9:
        psi = psi / norm
    return SymMatrix(h.array + s0 * np.outer(psi, psi))


def load_matrix(path):
    with open(path) as fh:
        data = json.load(fh)
    return SymMatrix.from_upper(int(data["n"]), data["upper"])


def save_matrix(h, path):
    with open(path, "w") as fh:
        json.dump({"n": h.n, "upper": h.upper().tolist()}, fh)
