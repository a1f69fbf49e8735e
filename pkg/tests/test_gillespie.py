import io

import numpy as np
import pytest

from diploid_vortex.exceptions import CensoringLimitExceeded, InvalidParametersError
from diploid_vortex.simulate import (
    RngStream,
    draw_event_counts,
    mc_fixation,
    run_to_absorption,
    trajectory,
    write_trajectory_csv,
)
from diploid_vortex.types.enums import Absorption
from diploid_vortex.types.models import PopulationState


def test_streams_are_reproducible():
    first = RngStream(7, 3)
    second = RngStream(7, 3)
    other = RngStream(7, 4)

    a = [first.uniform() for _ in range(10)]
    assert a == [second.uniform() for _ in range(10)]
    assert a != [other.uniform() for _ in range(10)]


def test_stream_buffer_does_not_change_draws():
    small = RngStream(1, 0, buffer=3)
    large = RngStream(1, 0, buffer=4096)

    assert [small.uniform() for _ in range(10)] == [large.uniform() for _ in range(10)]


def test_negative_seed_rejected():
    with pytest.raises(InvalidParametersError):
        RngStream(-1)
    with pytest.raises(InvalidParametersError):
        RngStream(1, -2)


def test_categorical_skips_zero_weights():
    rng = RngStream(5)
    picks = {rng.categorical([0.0, 1.0, 0.0, 2.0]) for _ in range(2000)}

    assert picks == {1, 3}


def test_exponential_mean():
    rng = RngStream(11)
    draws = np.array([rng.exponential(2.0) for _ in range(20_000)])

    assert draws.min() >= 0.0
    assert draws.mean() == pytest.approx(0.5, abs=0.015)


def test_integer_range():
    rng = RngStream(2)
    values = {rng.integer(4) for _ in range(500)}

    assert values == {0, 1, 2, 3}


@pytest.mark.parametrize(
    "coords, absorbed",
    [((6, 0, 0), Absorption.LOST), ((0, 0, 4), Absorption.FIXED)],
)
def test_boundary_start_has_no_events(neutral_params, coords, absorbed):
    outcome = run_to_absorption(PopulationState.of(*coords), neutral_params, RngStream(1))

    assert outcome.absorbed_in == absorbed
    assert outcome.events == 0
    assert outcome.time == 0.0


def test_trajectory_log(neutral_params):
    state = PopulationState.of(3, 2, 1)
    outcome, log = trajectory(state, neutral_params, RngStream(4))

    assert log[0] == (0.0, "start", 3, 2, 1)
    assert len(log) == outcome.events + 1
    assert log[-1][2:] == outcome.final_state.as_tuple()
    assert outcome.absorbed_in in (Absorption.FIXED, Absorption.LOST)
    times = [row[0] for row in log]
    assert times == sorted(times)

    out = io.StringIO()
    rows = write_trajectory_csv(log, out)
    assert rows == len(log)
    assert out.getvalue().splitlines()[0] == "time,event,k,m,n"


def test_trajectory_matches_absorption_run(neutral_params):
    state = PopulationState.of(3, 2, 1)
    outcome, _ = trajectory(state, neutral_params, RngStream(9, 2))

    assert run_to_absorption(state, neutral_params, RngStream(9, 2)) == outcome


def test_neutral_monte_carlo(neutral_params):
    estimate = mc_fixation(PopulationState.of(3, 2, 1), neutral_params, 20_000, seed=2024)

    assert estimate.fixed + estimate.lost == 20_000
    assert estimate.censored == 0
    assert abs(estimate.estimate - 1.0 / 3.0) <= 1.6 * estimate.ci_halfwidth_99


def test_monte_carlo_is_seeded(neutral_params):
    state = PopulationState.of(3, 2, 1)

    first = mc_fixation(state, neutral_params, 500, seed=3)
    second = mc_fixation(state, neutral_params, 500, seed=3)

    assert first == second


def test_censoring_limit(neutral_params):
    with pytest.raises(CensoringLimitExceeded) as info:
        mc_fixation(PopulationState.of(5, 3, 2), neutral_params, 50, seed=1, event_cap=1)

    assert info.value.censored == 50
    assert info.value.exit_code == 2


def test_reps_must_be_positive(neutral_params):
    with pytest.raises(InvalidParametersError):
        mc_fixation(PopulationState.of(3, 2, 1), neutral_params, 0, seed=1)


def test_event_frequencies_follow_rates(neutral_params):
    # births (5, 6, 1) and deaths (10.5, 7, 3.5) at (3, 2, 1), total 33
    draws = 33_000
    counts = draw_event_counts(PopulationState.of(3, 2, 1), neutral_params, draws, RngStream(8))
    expected = np.array([5.0, 6.0, 1.0, 10.5, 7.0, 3.5]) * 1000

    assert counts.sum() == draws
    assert np.all(np.abs(counts - expected) <= 0.02 * draws)


def test_no_deaths_drawn_at_size_two(neutral_params):
    counts = draw_event_counts(PopulationState.of(1, 1, 0), neutral_params, 1000, RngStream(8))

    assert counts[3:].sum() == 0


@pytest.mark.slow
def test_monte_carlo_independent_of_workers(neutral_params):
    state = PopulationState.of(3, 2, 1)

    serial = mc_fixation(state, neutral_params, 4_000, seed=17, workers=1)
    parallel = mc_fixation(state, neutral_params, 4_000, seed=17, workers=2)

    assert serial == parallel
