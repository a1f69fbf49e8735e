import io

import numpy as np
import pytest

from diploid_vortex.core.model import neutral_fixation
from diploid_vortex.exceptions import InvalidParametersError
from diploid_vortex.solvers.exact import (
    fd_gradient,
    fd_gradient_table,
    solve_derivatives,
    solve_fixation,
    solve_fixation_general,
    solve_mean_steps,
    write_fixation_csv,
)
from diploid_vortex.types.models import DemographicParams, GeneralRates, PopulationState


@pytest.mark.parametrize(
    "b,d,c", [(2.0, 1.0, 0.5), (1.0, 1.0, 1.0), (0.5, 0.2, 2.0)]
)
def test_neutral_fixation_is_exact(b, d, c):
    table = solve_fixation(DemographicParams(b=b, d=d, c=c), 30)
    lattice = table.lattice
    cut = lattice.offset(16)
    expected = np.array([neutral_fixation(lattice.state(i)) for i in range(cut)])

    assert np.max(np.abs(table.u[:cut] - expected)) <= 1e-8


def test_reference_state(neutral_params):
    table = solve_fixation(neutral_params, 80)
    assert table.value(PopulationState(k=3, m=2, n=1)) == pytest.approx(1.0 / 3.0, abs=1e-8)


def test_boundary_values_and_range():
    params = DemographicParams(b=2.0, d=1.0, c=0.5, delta=0.1, delta_prime=0.3)
    table = solve_fixation(params, 25)
    lattice = table.lattice

    assert np.all(table.u[lattice.gamma_fixed] == 1.0)
    assert np.all(table.u[lattice.gamma_lost] == 0.0)
    assert table.u.min() >= -1e-12
    assert table.u.max() <= 1.0 + 1e-12
    assert table.residual <= 1e-10


def test_deleterious_mutant_fixes_less_often():
    params = DemographicParams(b=2.0, d=1.0, c=0.5, delta=0.1, delta_prime=0.3)
    table = solve_fixation(params, 25)

    for k in range(1, 8):
        state = PopulationState(k=k, m=1, n=0)
        assert table.value(state) < neutral_fixation(state)


def test_refined_truncation_estimate_is_small(neutral_params):
    params = neutral_params.with_perturbation(0.05, 0.1)
    table = solve_fixation(params, 30, refine=True)

    assert table.truncation_error_estimate <= 1e-10


def test_general_solver_matches_specialisation():
    params = DemographicParams(b=1.5, d=0.5, c=0.5, delta=0.05, delta_prime=0.2)
    direct = solve_fixation(params, 16)
    general = solve_fixation_general(GeneralRates.from_params(params), 16)

    assert np.allclose(direct.u, general.u, atol=1e-12)
    assert general.params is None


def test_mean_steps_positive_inside(neutral_params):
    table = solve_mean_steps(neutral_params, 12)
    lattice = table.lattice

    assert np.all(table.t[lattice.interior] >= 1.0)
    assert np.all(table.t[~lattice.interior] == 0.0)


def test_mean_steps_grow_at_most_linearly(neutral_params):
    def worst_ratio(n_max):
        table = solve_mean_steps(neutral_params, n_max)
        lattice = table.lattice
        inside = lattice.interior & (lattice.N <= n_max // 2)
        return float(np.max(table.t[inside] / lattice.N[inside]))

    small, large = worst_ratio(20), worst_ratio(40)

    assert np.isfinite(large)
    assert large <= 1.05 * small


def test_derivatives_agree_with_finite_differences():
    params = DemographicParams(b=1.0, d=1.0, c=1.0)
    exact = solve_derivatives(params, 20)
    fd = fd_gradient_table(params, 20, h=1e-4)
    inside = exact.lattice.interior & (exact.lattice.N <= 12)

    assert np.max(np.abs(exact.v[inside] - fd.v[inside])) <= 1e-6
    assert np.max(np.abs(exact.vprime[inside] - fd.vprime[inside])) <= 1e-6
    assert fd_gradient(params, PopulationState(k=2, m=1, n=1), h=1e-4, n_max=20) == (
        pytest.approx(exact.value(PopulationState(k=2, m=1, n=1)), abs=1e-6)
    )


def test_derivative_signs_in_small_birth_regime(small_b):
    exact = solve_derivatives(small_b, 30)
    fd = fd_gradient_table(small_b, 30, h=1e-4)
    lattice = exact.lattice
    inside = lattice.interior & (lattice.N <= 15)
    drift = (lattice.k - lattice.n)[inside]
    hetero = lattice.m[inside] > 0
    v, vprime = exact.v[inside], exact.vprime[inside]

    assert np.all(v * np.sign(drift) >= -1e-12)
    assert np.all(v[(drift > 0) & hetero] > 0.0)
    assert np.all(v[(drift < 0) & hetero] < 0.0)
    assert np.max(np.abs(v[drift == 0]), initial=0.0) <= 1e-10
    assert np.all(vprime >= -1e-12)

    clear = np.abs(v) > 1e-4
    assert np.all(np.sign(fd.v[inside][clear]) == np.sign(v[clear]))
    assert np.all(fd.vprime[inside] >= -1e-6)


def test_derivatives_vanish_on_boundaries():
    table = solve_derivatives(DemographicParams(b=1.0, d=1.0, c=1.0), 10)
    boundary = ~table.lattice.interior

    assert np.all(table.v[boundary] == 0.0)
    assert np.all(table.vprime[boundary] == 0.0)
    # v is antisymmetric under swapping AA and aa
    lattice = table.lattice
    assert table.value(PopulationState(k=2, m=1, n=0))[0] == pytest.approx(
        -table.v[lattice.index(0, 1, 2)], abs=1e-12
    )


def test_fd_step_must_keep_death_rates_valid():
    with pytest.raises(InvalidParametersError):
        fd_gradient_table(DemographicParams(b=1.0, d=0.0, c=1.0), 10)
    with pytest.raises(InvalidParametersError):
        fd_gradient_table(DemographicParams(b=1.0, d=1.0, c=1.0), 10, h=-1e-3)


def test_fixation_csv(neutral_params):
    table = solve_fixation(neutral_params, 6)
    buffer = io.StringIO()
    count = write_fixation_csv(table, buffer, ["# command=fixation"])
    lines = buffer.getvalue().splitlines()

    assert lines[0] == "# command=fixation"
    assert lines[1] == "k,m,n,u"
    assert count == len(table.lattice)
