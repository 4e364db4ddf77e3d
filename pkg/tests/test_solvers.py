import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qae import solvers
from qae._backend import python_kernels
from qae.errors import ProblemTooLargeError
from qae.hamiltonian import build_product_hamiltonian, harmonic_benchmark, morse_problem
from qae.qubo_map import Encoding, Qubo, build_qubo, qubo_energy
from qae.solvers import (
    SaParams, SolverConfig, TabuParams, clamp_subqubo, exact_solve, flip_gains,
    partitioned_solve, sa_solve, tabu_solve,
)

from conftest import random_qubo


@pytest.fixture(scope="module")
def morse_63():
    h = build_product_hamiltonian(morse_problem())
    return build_qubo(h, Encoding(7, h.n), 2350.0)


# --- exact enumeration -------------------------------------------------------

def test_exact_diagonal():
    res = exact_solve(Qubo(np.diag([-1.0, 2.0])))
    assert res.best_bits.tolist() == [1, 0]
    assert res.best_energy == -1.0


def test_exact_zero_matrix_prefers_all_zero():
    res = exact_solve(Qubo(np.zeros((5, 5))))
    assert res.best_bits.tolist() == [0] * 5
    assert res.best_energy == 0.0


def test_exact_pair_coupling():
    res = exact_solve(Qubo(np.array([[1.0, -5.0], [0.0, 1.0]])))
    assert res.best_bits.tolist() == [1, 1]
    assert res.best_energy == -3.0


def test_exact_refuses_large_problems():
    with pytest.raises(ProblemTooLargeError):
        exact_solve(Qubo(np.zeros((31, 31))))


def test_exact_matches_brute_force_listing():
    rng = np.random.default_rng(3)
    for n in range(1, 9):
        q = random_qubo(n, rng)
        energies = [qubo_energy(q, [(c >> (n - 1 - i)) & 1 for i in range(n)]) for c in range(1 << n)]
        assert exact_solve(q).best_energy == pytest.approx(min(energies), abs=1e-12)


# --- Tabu search ---------------------------------------------------------------

def test_tabu_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(2024)
    hits = 0
    for seed in range(100):
        n = int(rng.integers(8, 21))
        q = random_qubo(n, rng)
        exact = exact_solve(q).best_energy
        res = tabu_solve(q, TabuParams(seed=seed))
        hits += res.best_energy <= exact + 1e-9
    assert hits >= 95


def test_tabu_zero_matrix_returns_zero_immediately():
    res = tabu_solve(Qubo(np.zeros((6, 6))))
    assert res.best_energy == 0.0
    assert res.evaluations == 0


def test_tabu_trace_never_increases(morse_63):
    res = tabu_solve(morse_63, TabuParams(seed=4))
    energies = [e for _, e in res.trace]
    assert all(b <= a for a, b in zip(energies, energies[1:]))
    assert energies[-1] == pytest.approx(res.best_energy, rel=1e-12, abs=1e-9)


def test_incremental_gains_track_fresh_gains_along_random_walk():
    rng = np.random.default_rng(11)
    q = random_qubo(25, rng)
    W = q.symmetric()
    x = rng.integers(0, 2, 25).astype(np.float64)
    g = python_kernels.flip_gains(W, x)
    energy = qubo_energy(q, x)
    for i in rng.integers(0, 25, 300):
        energy += python_kernels._flip(W, x, g, int(i))
        np.testing.assert_allclose(g, python_kernels.flip_gains(W, x), atol=1e-10)
    assert energy == pytest.approx(qubo_energy(q, x), abs=1e-9)


def test_flip_gains_are_energy_differences():
    rng = np.random.default_rng(5)
    q = random_qubo(12, rng)
    x = rng.integers(0, 2, 12)
    base = qubo_energy(q, x)
    for i, gain in enumerate(flip_gains(q, x)):
        y = x.copy()
        y[i] ^= 1
        assert gain == pytest.approx(qubo_energy(q, y) - base, abs=1e-12)


def test_effective_tenure_bounds():
    assert solvers.effective_tenure(20, 100) == 20
    assert solvers.effective_tenure(20, 12) == 3
    assert solvers.effective_tenure(20, 2) == 1


# --- partitioning --------------------------------------------------------------

@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.data())
@settings(max_examples=60, deadline=None)
def test_clamped_subqubo_reproduces_full_objective(seed, n, data):
    rng = np.random.default_rng(seed)
    q = random_qubo(n, rng, -3.0, 3.0)
    x = rng.integers(0, 2, n)
    active = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
    sub, constant = clamp_subqubo(q, x, active)
    y = rng.integers(0, 2, len(active))
    full = x.copy()
    full[active] = y
    assert qubo_energy(sub, y) + constant == pytest.approx(qubo_energy(q, full), abs=1e-9)


def test_small_problem_bypasses_partitioning():
    rng = np.random.default_rng(8)
    q = random_qubo(40, rng)
    params = TabuParams(seed=6)
    direct, part = tabu_solve(q, params), partitioned_solve(q, params)
    assert part.best_bits.tolist() == direct.best_bits.tolist()
    assert part.best_energy == direct.best_energy


def test_tiny_problem_is_enumerated():
    rng = np.random.default_rng(9)
    q = random_qubo(15, rng)
    assert partitioned_solve(q).best_bits.tolist() == exact_solve(q).best_bits.tolist()


def test_partitioning_starts_above_the_subqubo_size(monkeypatch):
    h = build_product_hamiltonian(harmonic_benchmark(3))
    calls = []
    real = solvers.clamp_subqubo
    monkeypatch.setattr(solvers, "clamp_subqubo", lambda *a: calls.append(1) or real(*a))
    partitioned_solve(build_qubo(h, Encoding(1, h.n), 1600.0))
    assert not calls
    res = partitioned_solve(build_qubo(h, Encoding(2, h.n), 1600.0))
    assert calls
    energies = [e for _, e in res.trace]
    assert all(b < a for a, b in zip(energies, energies[1:]))


def test_random_selection_is_supported():
    rng = np.random.default_rng(1)
    q = random_qubo(60, rng)
    a = partitioned_solve(q, TabuParams(seed=2, selection="random", n_rep=500))
    b = partitioned_solve(q, TabuParams(seed=2, selection="random", n_rep=500))
    assert a.best_bits.tolist() == b.best_bits.tolist()


# --- simulated annealing -----------------------------------------------------

def test_sa_diagonal():
    assert sa_solve(Qubo(np.diag([-1.0, 2.0])), SaParams(reads=5)).best_energy == -1.0


def test_more_reads_never_worse():
    rng = np.random.default_rng(12)
    q = random_qubo(30, rng)
    energies = [sa_solve(q, SaParams(reads=r, sweeps=30, seed=3)).best_energy for r in (10, 100, 1000)]
    assert energies[0] >= energies[1] >= energies[2]


def test_sa_agrees_with_partitioned_on_63_variable_instance(morse_63):
    close = 0
    for seed in range(10):
        part = partitioned_solve(morse_63, TabuParams(seed=seed)).best_energy
        sa = sa_solve(morse_63, SaParams(reads=1000, seed=seed)).best_energy
        close += abs(sa - part) <= 0.01 * abs(part)
    assert close >= 8


def test_schedule_is_geometric_and_cooling():
    q = Qubo(np.array([[1.0, -2.0], [0.0, 0.5]]))
    betas = solvers.anneal_schedule(q, SaParams(sweeps=10))
    assert np.all(np.diff(betas) > 0)
    ratios = betas[1:] / betas[:-1]
    np.testing.assert_allclose(ratios, ratios[0])
    assert 1 / betas[0] == pytest.approx(2.0 * 2)
    assert 1 / betas[-1] == pytest.approx(1e-3 * 0.5)


# --- shared contracts ----------------------------------------------------------

ALL = ["exact", "tabu", "partitioned", "sa"]


@pytest.mark.parametrize("name", ALL)
def test_reported_energy_is_reevaluated(name):
    rng = np.random.default_rng(21)
    q = random_qubo(14, rng)
    res = SolverConfig(name, sa=SaParams(reads=50)).with_seed(4).solve(q)
    assert res.best_energy == qubo_energy(q, res.best_bits)


@pytest.mark.parametrize("name", ALL)
def test_solvers_are_deterministic(name):
    rng = np.random.default_rng(22)
    q = random_qubo(16, rng)
    cfg = SolverConfig(name, sa=SaParams(reads=50)).with_seed(9)
    assert cfg.solve(q).best_bits.tolist() == cfg.solve(q).best_bits.tolist()


@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
@settings(max_examples=40, deadline=None)
def test_no_solver_beats_enumeration(seed, n):
    q = random_qubo(n, np.random.default_rng(seed))
    floor = exact_solve(q).best_energy
    for name in ("tabu", "partitioned", "sa"):
        res = SolverConfig(name, TabuParams(n_rep=200), SaParams(reads=5, sweeps=20)).with_seed(seed).solve(q)
        assert res.best_energy >= floor - 1e-12


def test_parameter_validation():
    with pytest.raises(ValueError):
        TabuParams(exact_threshold=31)
    with pytest.raises(ValueError):
        TabuParams(subqubo_size=10, exact_threshold=20)
    with pytest.raises(ValueError):
        SaParams(reads=0)
    with pytest.raises(ValueError):
        SaParams(t_hot=1.0, t_cold=2.0)
    with pytest.raises(ValueError):
        SolverConfig("quantum")
