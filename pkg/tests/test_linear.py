import numpy as np
import pytest
import scipy.sparse as sp

from diploid_vortex.config.settings import SolverSettings
from diploid_vortex.core.model import neutral_fixation
from diploid_vortex.exceptions import SingularSystemError
from diploid_vortex.solvers import linear
from diploid_vortex.solvers.exact import solve_fixation
from diploid_vortex.solvers.linear import SparseSolver


def tridiagonal(size):
    main = np.full(size, 4.0)
    off = np.full(size - 1, -1.0)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


@pytest.fixture
def iterative():
    return SolverSettings(direct_max_states=1)


def test_small_systems_use_lu():
    solver = SparseSolver(tridiagonal(50))
    x, error = solver.solve(np.ones(50))

    assert solver.method == "splu"
    assert error <= 1e-12
    assert np.allclose(tridiagonal(50) @ x, 1.0)


def test_iterative_path_matches_direct(iterative):
    rhs = np.linspace(1.0, 2.0, 200)
    direct, _ = SparseSolver(tridiagonal(200)).solve(rhs)
    solver = SparseSolver(tridiagonal(200), iterative)
    x, error = solver.solve(rhs)

    assert error <= iterative.residual_tol
    assert np.allclose(x, direct, rtol=0.0, atol=1e-10)


def test_breakdown_falls_back_to_lu(iterative, monkeypatch):
    monkeypatch.setattr(linear, "bicgstab", lambda *args, **kwargs: (args[1] * 0.0, -10))
    solver = SparseSolver(tridiagonal(30), iterative)

    x, error = solver.solve(np.ones(30))

    assert solver.method == "splu"
    assert error <= 1e-12
    assert np.allclose(tridiagonal(30) @ x, 1.0)


def test_stalled_krylov_falls_back_to_lu(iterative, monkeypatch):
    monkeypatch.setattr(linear, "bicgstab", lambda *args, **kwargs: (args[1] * 0.0, 0))
    solver = SparseSolver(tridiagonal(30), iterative)

    x, _ = solver.solve(np.ones(30))

    assert solver.method == "splu"
    assert np.allclose(tridiagonal(30) @ x, 1.0)


def test_singular_operator_is_rejected():
    singular = sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))

    with pytest.raises(SingularSystemError):
        SparseSolver(singular).solve(np.array([1.0, 0.0]))


def test_fixation_on_the_iterative_path(settings_env, neutral_params):
    settings_env(DIPLOID_VORTEX_SOLVER_DIRECT_MAX_STATES=10)
    table = solve_fixation(neutral_params, 25)
    lattice = table.lattice
    cut = lattice.offset(14)
    expected = np.array([neutral_fixation(lattice.state(i)) for i in range(cut)])

    assert np.max(np.abs(table.u[:cut] - expected)) <= 1e-8
