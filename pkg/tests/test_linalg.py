import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_symmetric
from qae.errors import ConvergenceError, TrivialSolutionError
from qae.linalg import SymMatrix, deflate, jacobi_eigen, load_matrix, rayleigh_quotient, save_matrix


def test_diagonal_matrix_is_its_own_spectrum():
    eig = jacobi_eigen(SymMatrix(np.diag([2.0, 3.0])))
    assert list(eig.eigenvalues) == [2.0, 3.0]


def test_swap_matrix_eigenvalues():
    eig = jacobi_eigen(SymMatrix([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(eig.eigenvalues, [-1.0, 1.0], atol=1e-14)


def test_random_8x8_residuals_and_orthonormality():
    rng = np.random.default_rng(8)
    h = SymMatrix(random_symmetric(8, rng))
    eig = jacobi_eigen(h)
    assert np.all(eig.residuals(h) <= 1e-8 * h.frobenius())
    v = eig.eigenvectors
    np.testing.assert_allclose(v.T @ v, np.eye(8), atol=1e-8)
    assert np.all(np.diff(eig.eigenvalues) >= 0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_jacobi_matches_reference_and_preserves_invariants(n, seed):
    rng = np.random.default_rng(seed)
    h = SymMatrix(random_symmetric(n, rng, scale=100.0))
    eig = jacobi_eigen(h)
    ref = np.linalg.eigvalsh(h.array)
    scale = max(1.0, h.frobenius())
    np.testing.assert_allclose(eig.eigenvalues, ref, atol=1e-9 * scale)
    assert abs(eig.eigenvalues.sum() - np.trace(h.array)) <= 1e-8 * scale
    assert abs(np.linalg.norm(eig.eigenvalues) - h.frobenius()) <= 1e-8 * scale


def test_degenerate_cluster_compared_by_projector():
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    h = SymMatrix(q @ np.diag([1.0, 2.0, 2.0, 2.0, 5.0]) @ q.T)
    eig = jacobi_eigen(h)
    p = eig.eigenvectors[:, 1:4] @ eig.eigenvectors[:, 1:4].T
    np.testing.assert_allclose(p, q[:, 1:4] @ q[:, 1:4].T, atol=1e-9)


def test_non_convergence_reports_residual():
    rng = np.random.default_rng(2)
    h = SymMatrix(random_symmetric(10, rng))
    with pytest.raises(ConvergenceError) as info:
        jacobi_eigen(h, max_sweeps=1)
    assert info.value.residual > 0


def test_rayleigh_quotient_examples():
    h = SymMatrix(np.diag([2.0, 3.0]))
    assert rayleigh_quotient(h, [1.0, 0.0]) == 2.0
    assert rayleigh_quotient(h, [1.0, 1.0]) == 2.5
    with pytest.raises(TrivialSolutionError, match="trivial solution"):
        rayleigh_quotient(h, [0.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_rayleigh_quotient_bounded_by_spectrum(seed, n):
    rng = np.random.default_rng(seed)
    h = SymMatrix(random_symmetric(n, rng))
    v = rng.normal(size=n)
    ev = np.linalg.eigvalsh(h.array)
    tol = 1e-12 * max(1.0, h.frobenius())
    assert ev[0] - tol <= rayleigh_quotient(h, v) <= ev[-1] + tol


def test_deflate_examples():
    h = SymMatrix(np.diag([1.0, 2.0]))
    assert deflate(h, [1.0, 0.0], 9000.0) == SymMatrix(np.diag([9001.0, 2.0]))
    assert deflate(h, [0.3, 0.4], 0.0) == h
    # psi is normalised internally
    np.testing.assert_allclose(deflate(h, [2.0, 0.0], 10.0).array, np.diag([11.0, 2.0]))
    with pytest.raises(TrivialSolutionError):
        deflate(h, [0.0, 0.0], 1.0)


def test_deflation_spectrum_with_exact_ground_state():
    rng = np.random.default_rng(5)
    h = SymMatrix(random_symmetric(6, rng, scale=50.0))
    eig = jacobi_eigen(h)
    shifted = np.linalg.eigvalsh(deflate(h, eig.eigenvectors[:, 0], 9000.0).array)
    expected = np.sort(np.r_[eig.eigenvalues[0] + 9000.0, eig.eigenvalues[1:]])
    np.testing.assert_allclose(shifted, expected, rtol=1e-8)
    # the deflated ground state is the original first excited state
    v1 = jacobi_eigen(deflate(h, eig.eigenvectors[:, 0], 9000.0)).eigenvectors[:, 0]
    assert abs(v1 @ eig.eigenvectors[:, 1]) == pytest.approx(1.0, abs=1e-8)


def test_symmetric_matrix_validation():
    with pytest.raises(ValueError):
        SymMatrix([[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        SymMatrix([[np.inf]])
    h = SymMatrix([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ValueError):
        h.array[0, 0] = 5.0


def test_matrix_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    h = SymMatrix(random_symmetric(5, rng))
    path = tmp_path / "h.json"
    save_matrix(h, path)
    assert load_matrix(path) == h
    assert SymMatrix.from_upper(2, [1.0, 2.0, 3.0]) == SymMatrix([[1.0, 2.0], [2.0, 3.0]])
