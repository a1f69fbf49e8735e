import io
import math

import numpy as np
import pytest

from diploid_vortex.demography.stationary import (
    crossing_index,
    first_mutation_rate,
    log_weights,
    size_biased_law,
    stationary_law,
    write_law_csv,
)
from diploid_vortex.exceptions import InvalidParametersError


def test_closed_form_at_unit_rates():
    # l(N) = 1 / (N! (e - 2)) when b = c = 1 and d = 0
    law = stationary_law(1.0, 0.0, 1.0)

    assert law.prob(2) == pytest.approx(1.0 / (2.0 * (math.e - 2.0)), abs=1e-10)
    assert law.prob(4) == pytest.approx(1.0 / (24.0 * (math.e - 2.0)), abs=1e-10)


def test_normalisation_and_balance():
    law = stationary_law(4.0, 1.0, 1.0)

    assert law.probs.sum() + law.tail_mass == pytest.approx(1.0, abs=1e-12)
    assert law.tail_mass <= 1e-12
    assert law.balance_residuals().max() <= 1e-10
    assert law.prob(1) == 0.0
    assert law.prob(law.n_max + 1) == 0.0


def test_support_grows_with_carrying_capacity():
    small = stationary_law(2.0, 1.0, 1.0)
    large = stationary_law(10.0, 0.5, 0.1)

    assert large.n_max > small.n_max
    assert large.mean > small.mean
    # the mode of the large law sits near (b - d) / c
    assert abs(int(np.argmax(large.probs)) + 2 - 95) <= 10


def test_single_crossing():
    crossing = crossing_index(stationary_law(4.0, 1.0, 1.0), stationary_law(4.0, 2.0, 1.0))

    assert crossing.sign_changes == 1
    assert crossing.strictly_decreasing
    assert crossing.ratios[crossing.n0 - 2] >= 1.0
    assert crossing.ratios[crossing.n0 - 1] < 1.0


def test_crossing_preconditions():
    law = stationary_law(4.0, 1.0, 1.0)

    with pytest.raises(InvalidParametersError):
        crossing_index(law, stationary_law(4.0, 1.0, 1.0))
    with pytest.raises(InvalidParametersError):
        crossing_index(law, stationary_law(3.0, 2.0, 1.0))


def test_invalid_parameters():
    with pytest.raises(InvalidParametersError):
        stationary_law(0.0, 1.0, 1.0)
    with pytest.raises(InvalidParametersError):
        stationary_law(1.0, -0.1, 1.0)
    with pytest.raises(InvalidParametersError):
        stationary_law(1.0, 1.0, 0.0)
    with pytest.raises(InvalidParametersError):
        stationary_law(1.0, 1.0, 1.0, tol=0.0)


def test_log_weights_start_at_size_two():
    weights = log_weights(2.0, 1.0, 1.0, 5)

    assert len(weights) == 4
    assert weights[0] == pytest.approx(-math.log(2.0))
    # l(3) / l(2) = (2/3) * b / (d + 2c)
    assert weights[1] - weights[0] == pytest.approx(math.log(2.0 / 3.0 * 2.0 / 3.0))


def test_size_biased_law_and_first_mutation_rate():
    law = stationary_law(4.0, 1.0, 1.0)
    biased = size_biased_law(law)

    assert biased.sum() == pytest.approx(1.0)
    assert np.dot(law.support, biased) > law.mean
    assert first_mutation_rate(law, 0.5) == pytest.approx(law.mean)
    with pytest.raises(InvalidParametersError):
        first_mutation_rate(law, 0.0)


def test_laws_are_cached():
    assert stationary_law(4.0, 1.0, 1.0) is stationary_law(4.0, 1.0, 1.0)


def test_law_csv():
    law = stationary_law(1.0, 0.0, 1.0)
    out = io.StringIO()
    rows = write_law_csv(law, out)
    lines = out.getvalue().splitlines()

    assert lines[0] == "N,prob"
    assert lines[1].startswith("2,0.6961")
    assert rows == law.n_max - 1
