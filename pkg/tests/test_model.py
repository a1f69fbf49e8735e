import pytest
from pydantic import ValidationError

from diploid_vortex.core.model import (
    apply_generator,
    as_general,
    birth_rates,
    classify,
    death_rates,
    event_rates,
    neutral_fixation,
    transitions,
)
from diploid_vortex.types.enums import EventType, Region
from diploid_vortex.types.models import DemographicParams, GeneralRates, PopulationState


def states_up_to(top):
    return [
        PopulationState(k=k, m=m, n=size - k - m)
        for size in range(2, top + 1)
        for k in range(size + 1)
        for m in range(size - k + 1)
    ]


def test_rates_at_reference_state(neutral_params):
    state = PopulationState(k=3, m=2, n=1)
    births = birth_rates(state, neutral_params)
    deaths = death_rates(state, neutral_params)

    assert births == pytest.approx((5.0, 6.0, 1.0))
    assert deaths == pytest.approx((10.5, 7.0, 3.5))
    # total birth rate bN, total death rate N(d + c(N - 1))
    assert sum(births) == pytest.approx(2.0 * 6)
    assert sum(deaths) == pytest.approx(6 * (1.0 + 0.5 * 5))


def test_no_death_at_size_two(neutral_params):
    for state in states_up_to(2):
        out = transitions(state, neutral_params)
        assert all(t.rate == 0.0 for t in out.entries[3:])


def test_transition_set_always_has_six_entries(neutral_params):
    out = transitions(PopulationState(k=1, m=1, n=0), neutral_params)

    assert len(out.entries) == 6
    assert [t.event for t in out.entries] == list(EventType)
    # death of the AA individual would leave N = 1; no aa to remove
    assert out.entries[3].target is None
    assert out.entries[5].target is None
    assert out.rate_of(EventType.BIRTH_WILD) == pytest.approx(2.0)
    assert out.rate_of(EventType.BIRTH_HETERO) == pytest.approx(2.0)
    assert out.birth_total == pytest.approx(4.0)


def test_perturbation_only_changes_deaths():
    base = DemographicParams(b=2.0, d=1.0, c=0.5)
    perturbed = base.with_perturbation(0.1, 0.3)
    state = PopulationState(k=2, m=2, n=2)

    assert birth_rates(state, base) == birth_rates(state, perturbed)
    d_base = death_rates(state, base)
    d_pert = death_rates(state, perturbed)
    assert d_pert[0] == pytest.approx(d_base[0])
    assert d_pert[1] - d_base[1] == pytest.approx(0.1 * 2)
    assert d_pert[2] - d_base[2] == pytest.approx(0.3 * 2)


def test_allele_frequency_is_harmonic_without_selection(neutral_params):
    for state in states_up_to(7):
        assert apply_generator(neutral_fixation, state, neutral_params) == pytest.approx(
            0.0, abs=1e-12
        )


def test_general_rates_match_demographic_params(neutral_params):
    general = as_general(neutral_params)
    uniform = GeneralRates.from_fitness(
        neutral_params.b, [[1.0] * 3] * 3, [[neutral_params.c] * 3] * 3, [1.0, 1.0, 1.0]
    )

    assert general == uniform
    for state in states_up_to(5):
        assert event_rates(state.k, state.m, state.n, general) == pytest.approx(
            (*birth_rates(state, neutral_params), *death_rates(state, neutral_params))
        )


def test_from_fitness_scales_selective_values():
    rates = GeneralRates.from_fitness(
        2.0,
        [[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]],
        [[1.0] * 3] * 3,
        [1.0, 1.0, 1.0],
    )
    assert rates.b[0][1] == pytest.approx(1.0)
    assert rates.max_birth == pytest.approx(2.0)

    asymmetric = [[1.0, 0.2, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]]
    with pytest.raises(ValueError):
        GeneralRates.from_fitness(2.0, asymmetric, [[1.0] * 3] * 3, [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        GeneralRates.from_fitness(0.0, [[1.0] * 3] * 3, [[1.0] * 3] * 3, [1.0, 1.0, 1.0])


def test_classify():
    assert classify(PopulationState(k=3, m=0, n=0)) == Region.LOST
    assert classify(PopulationState(k=0, m=0, n=4)) == Region.FIXED
    assert classify(PopulationState(k=0, m=1, n=1)) == Region.INTERIOR


def test_neutral_fixation_is_mutant_frequency():
    assert neutral_fixation(PopulationState(k=3, m=2, n=1)) == pytest.approx(1.0 / 3.0)
    assert neutral_fixation(PopulationState(k=4, m=1, n=0)) == pytest.approx(0.1)


def test_invalid_models_rejected():
    with pytest.raises(ValidationError):
        PopulationState(k=1, m=0, n=0)
    with pytest.raises(ValidationError):
        PopulationState(k=-1, m=2, n=1)
    with pytest.raises(ValidationError):
        DemographicParams(b=0.0, d=1.0, c=1.0)
    with pytest.raises(ValidationError):
        DemographicParams(b=1.0, d=0.1, c=1.0, delta=-0.2, delta_prime=0.1)
    with pytest.raises(ValidationError):
        GeneralRates(b=[[1.0] * 3] * 3, c=[[0.0] * 3] * 3, d=[1.0, 1.0, 1.0])


def test_params_helpers():
    params = DemographicParams(b=1.0, d=1.0, c=1.0, delta=0.1, delta_prime=0.2)

    assert not params.is_neutral
    assert params.neutral().is_neutral
    assert params.with_death(2.0).d == 2.0
    assert params.with_death(2.0).delta_prime == 0.2
    assert params.per_capita_death(2) == 0.0
    assert params.per_capita_death(4) == pytest.approx(4.0)
