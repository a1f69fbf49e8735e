import numpy as np
import pytest

from diploid_vortex.exceptions import SingularSystemError, TailNotConvergedError
from diploid_vortex.solvers.perturbation import solve_tables, solve_z
from diploid_vortex.solvers.recurrence import (
    Blocks,
    condition2,
    first_layer,
    first_layer_start,
    forward_first_layer,
    inv2,
    row_norm,
    second_layer,
    second_layer_start,
    tail_sweep,
)
from diploid_vortex.types.enums import TablesSource
from diploid_vortex.types.models import DemographicParams

PARAMS = DemographicParams(b=1.6, d=0.7, c=0.3)


def test_first_layer_reference_blocks():
    b = PARAMS.b
    blocks3 = first_layer(3, PARAMS)
    blocks4 = first_layer(4, PARAMS)
    blocks5 = first_layer(5, PARAMS)
    mu4 = PARAMS.d + 3 * PARAMS.c

    assert np.allclose(blocks3.B, (b / 16.0) * np.array([[1.0, 27.0 / 4.0], [15.0, -0.75]]))
    assert np.allclose(blocks4.C, (b + mu4) * np.array([[0.0, 0.25], [1.0, 0.0]]))
    assert np.allclose(blocks5.f, [0.0, -1.0 / 40.0])


def test_first_layer_needs_size_three():
    with pytest.raises(ValueError):
        first_layer(2, PARAMS)
    with pytest.raises(ValueError):
        second_layer(2, PARAMS, 0.0, 0.0, 0.0)


def test_bottom_closures():
    c_tilde, f_tilde = first_layer_start(PARAMS)
    correction = c_tilde - first_layer(3, PARAMS).C

    assert row_norm(correction) == pytest.approx(5.0 / 3.0 * (PARAMS.d + 2 * PARAMS.c))
    assert np.allclose(f_tilde, first_layer(3, PARAMS).f)

    b_tilde, c2, f2 = second_layer_start(0.3, 0.1, 0.2, 0.05)
    assert np.linalg.det(c2) == pytest.approx(-4.0)
    assert np.allclose(b_tilde, [[1.0, 3.0], [3.0, 13.0 / 3.0]])
    # x2 - y2 - x3 + 1.5 y3
    assert f2[0] == pytest.approx(0.3 - 0.1 - 0.2 + 0.075)


def test_second_layer_source_uses_neighbouring_y():
    zero = second_layer(4, PARAMS, 0.0, 0.0, 0.0)
    shifted = second_layer(4, PARAMS, 0.0, 0.0, 1.0)

    assert np.allclose(zero.f, 0.0)
    assert not np.allclose(shifted.f, 0.0)
    assert np.array_equal(zero.B, shifted.B)


def test_inverse_and_condition():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])

    assert np.allclose(inv2(a) @ a, np.eye(2))
    assert condition2(np.eye(2)) == pytest.approx(1.0)
    with pytest.raises(SingularSystemError):
        inv2(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_tail_sweep_solves_a_contracting_recurrence():
    # B z_{N+1} = C z_N + D z_{N-1} + f with C dominant: the bounded solution is unique
    def blocks(size):
        return Blocks(
            B=np.eye(2),
            C=4.0 * np.eye(2),
            D=np.zeros((2, 2)),
            f=np.array([0.5**size, 0.0]),
        )

    sweep = tail_sweep(blocks, np.zeros((2, 2)), np.array([0.125, 0.0]), 10, 1e-12, 500, "test")

    for size in range(3, 10):
        lhs = sweep.at(size + 1)
        rhs = 4.0 * sweep.at(size) + np.array([0.5**size, 0.0])
        assert np.max(np.abs(lhs - rhs)) * 2.0**size <= 1e-10
    assert sweep.at(5)[1] == 0.0
    assert sweep.last_level >= 11
    assert sweep.tail_estimate < 1e-12


def test_tail_sweep_reports_growth():
    def blocks(size):
        return Blocks(B=4.0 * np.eye(2), C=np.eye(2), D=np.zeros((2, 2)), f=np.ones(2))

    with pytest.raises(TailNotConvergedError):
        tail_sweep(blocks, np.zeros((2, 2)), np.ones(2), 5, 1e-10, 40, "test")


def test_forward_norms_in_small_birth_regime():
    params = DemographicParams(b=0.02, d=1.0, c=1.0)
    k_mats, norm_m, conds, gs = forward_first_layer(params, 30)

    assert k_mats.shape == (28, 2, 2)
    assert len(norm_m) == len(conds) == len(gs) == 28
    assert all(row_norm(k) < params.c / 2 for k in k_mats[1:])
    assert np.all(norm_m < 1.0)


def test_small_birth_tail_stops_early_at_default_tolerance():
    params = DemographicParams(b=0.02, d=1.0, c=1.0)
    solution = solve_z(params, 40)

    assert 41 <= solution.sweep.last_level < 100
    assert solution.sweep.tail_estimate < 1e-13


def test_small_birth_tables_come_from_the_recurrence():
    params = DemographicParams(b=0.02, d=1.0, c=1.0)
    tables = solve_tables(params, 40, allow_fallback=False)

    assert tables.source == TablesSource.RECURRENCE
