import math

import numpy as np
import pytest

from qae.errors import ProblemTooLargeError
from qae.hamiltonian import (
    BasisSpec, DimensionSpec, Harmonic, Morse, ProblemSpec, Tabulated, build_1d_hamiltonian,
    build_product_hamiltonian, harmonic_benchmark, harmonic_frequencies, harmonic_problem,
    morse_problem, morse_surrogate_default, problem_from_config,
)
from qae.linalg import jacobi_eigen
from qae.qubo_map import Encoding


def ground(h):
    return jacobi_eigen(h).eigenvalues[0]


def test_basis_sizes_and_validation():
    assert BasisSpec("cosine", 2, (-1, 1)).size == 3
    assert BasisSpec("fourier", 4, (0, 1)).size == 9
    assert BasisSpec("cosine", 2, (-1, 1)).quadrature_points == 48
    with pytest.raises(ValueError):
        BasisSpec("cosine", 2, (-1, 1), quadrature_points=11)
    with pytest.raises(ValueError):
        BasisSpec("cosine", 2, (1, -1))
    with pytest.raises(ValueError):
        BasisSpec("legendre", 2, (-1, 1))


@pytest.mark.parametrize("kind", ["cosine", "fourier"])
def test_basis_is_orthonormal(kind):
    basis = BasisSpec(kind, 3, (-0.7, 1.3), quadrature_points=4001)
    x = np.linspace(*basis.domain, basis.quadrature_points)
    phi = basis.functions(x)
    w = np.full(x.size, x[1] - x[0])
    w[[0, -1]] *= 0.5
    np.testing.assert_allclose((phi * w) @ phi.T, np.eye(basis.size), atol=1e-6)


def test_continuum_limit_of_the_oscillator():
    problem = harmonic_problem(1, m_max=24)
    assert abs(ground(build_product_hamiltonian(problem)) - 400.0) < 0.5


def test_small_cosine_basis_is_variational():
    e0 = ground(build_product_hamiltonian(harmonic_problem(1, m_max=2)))
    assert e0 >= 400.0


def test_free_particle_fourier_kinetic_terms():
    L = 2.0
    basis = BasisSpec("fourier", 2, (0.0, L))
    h = build_1d_hamiltonian(basis, Tabulated((0.0, L), (0.0, 0.0)), mass=1.0)
    k1, k2 = (2 * math.pi / L) ** 2 / 2, (4 * math.pi / L) ** 2 / 2
    np.testing.assert_allclose(h.array, np.diag([0.0, k1, k1, k2, k2]), atol=1e-12)


def test_two_dimensional_continuum_limit():
    problem = harmonic_problem(2, m_max=20, omegas=[800.0, 1000.0])
    assert abs(ground(build_product_hamiltonian(problem)) - 900.0) < 1.0


def test_one_dimension_reduces_to_the_1d_builder():
    dim = harmonic_problem(1).dims[0]
    assert build_product_hamiltonian(ProblemSpec((dim,))) == build_1d_hamiltonian(
        dim.basis, dim.potential, dim.mass)


def test_three_dimensional_layout_and_separability():
    problem = harmonic_benchmark(3)
    h = build_product_hamiltonian(problem)
    assert h.n == 27
    one_d = sum(ground(build_1d_hamiltonian(d.basis, d.potential, d.mass)) for d in problem.dims)
    assert ground(h) == pytest.approx(one_d, rel=1e-8)
    np.testing.assert_array_equal(h.array, h.array.T)


def test_product_index_order_has_first_dimension_slowest():
    problem = harmonic_benchmark(2)
    a, b = (build_1d_hamiltonian(d.basis, d.potential, d.mass).array for d in problem.dims)
    h = build_product_hamiltonian(problem).array
    # element (alpha, beta),(alpha', beta) of the kron sum carries H_1[alpha, alpha']
    assert h[0 * 3 + 1, 2 * 3 + 1] == pytest.approx(a[0, 2])
    assert h[1 * 3 + 0, 1 * 3 + 2] == pytest.approx(b[0, 2])


def test_variable_cap():
    with pytest.raises(ProblemTooLargeError):
        build_product_hamiltonian(harmonic_benchmark(3), qubits_per_coeff=200)


def test_variational_monotonicity_in_basis_size():
    energies = [ground(build_product_hamiltonian(harmonic_problem(1, m_max=m))) for m in range(0, 8)]
    assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))
    fourier = [ground(build_product_hamiltonian(morse_problem(m))) for m in range(1, 6)]
    assert all(b <= a + 1e-9 for a, b in zip(fourier, fourier[1:]))


def test_harmonic_frequencies():
    assert harmonic_frequencies(3) == [800.0, 1000.0, 1200.0]


def test_benchmark_ground_energies_fall_in_the_tabulated_scan_windows(oracle_values):
    windows = {1: (380, 470), 2: (880, 970), 3: (1580 - 30, 1670)}
    for d, (lo, hi) in windows.items():
        e0 = ground(build_product_hamiltonian(harmonic_benchmark(d)))
        assert e0 == pytest.approx(oracle_values["harmonic_benchmark_ground"][str(d)], rel=1e-10)
        assert lo < e0 < hi


def test_morse_surrogate_regression(oracle_values):
    basis, pot, mass = morse_surrogate_default()
    assert basis.size == 9 and Encoding(7, basis.size).n_qubits == 63
    assert pot.depth == pytest.approx(oracle_values["depth"])
    assert pot.alpha == pytest.approx(oracle_values["alpha"])
    eig = jacobi_eigen(build_1d_hamiltonian(basis, pot, mass)).eigenvalues
    np.testing.assert_allclose(eig, oracle_values["eigenvalues"], rtol=1e-9)
    assert 700.0 < eig[0] < 900.0
    assert 2350.0 < eig[1] < 2440.0


def test_morse_levels_and_scaling_direction():
    m = Morse.from_spectroscopic(1600.0, 12.0, 1.0)
    assert m.levels(2) == pytest.approx([797.0, 2373.0])
    deep = Morse(4 * m.depth, m.alpha, m.r_e)
    ratio = lambda p: p.levels(1)[0] / p.depth
    assert ratio(deep) < ratio(m)


def test_tabulated_potential(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("x,V\n-1,2\n0,0\n1,2\n")
    pot = Tabulated.from_csv(path)
    assert pot(np.array([0.5]))[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        pot(np.array([1.5]))
    with pytest.raises(ValueError):
        Tabulated((0.0, 0.0), (1.0, 2.0))
    basis = BasisSpec("cosine", 1, (-2, 2))
    with pytest.raises(ValueError):
        build_1d_hamiltonian(basis, pot)


def test_non_finite_potential_rejected():
    basis = BasisSpec("cosine", 1, (-1, 1))
    with pytest.raises(ValueError):
        build_1d_hamiltonian(basis, lambda x, mass: np.full_like(x, np.nan))


def test_problem_from_config():
    assert build_product_hamiltonian(problem_from_config({"preset": "harmonic_benchmark", "d": 2})) == \
        build_product_hamiltonian(harmonic_benchmark(2))
    cfg = {"dims": [{"basis": {"kind": "cosine", "m_max": 2, "domain": [-0.2, 0.2]},
                     "potential": {"kind": "harmonic", "omega": 800}}]}
    spec = problem_from_config(cfg)
    assert spec.d == 1 and spec.dims[0].potential == Harmonic(800.0)
    with pytest.raises(ValueError):
        problem_from_config({"preset": "ozone"})
    with pytest.raises(ValueError):
        ProblemSpec(tuple(DimensionSpec(BasisSpec("cosine", 1, (0, 1)), Harmonic(1.0)) for _ in range(6)))
