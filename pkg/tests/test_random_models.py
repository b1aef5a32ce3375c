"""Tests for the random samplers and the golfing partition."""

import numpy as np
import pytest

from trpcalab.algebra.tsvd import fourier_singular_values, tubal_rank
from trpcalab.services.projections import SupportSet
from trpcalab.services.random_models import (
    GolfingConfig,
    GolfingConfigError,
    default_j0,
    partition_complement,
    rng_for,
    sample_bernoulli_support,
    sample_low_tubal_rank,
    sample_sign_tensor,
    sample_signs,
)


def test_rng_for_streams():
    first = rng_for(7, "support", 3, 1).random(5)
    again = rng_for(7, "support", 3, 1).random(5)
    other_trial = rng_for(7, "support", 3, 2).random(5)
    other_seed = rng_for(8, "support", 3, 1).random(5)
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other_trial)
    assert not np.array_equal(first, other_seed)
    with pytest.raises(ValueError):
        rng_for(-1)


def test_integer_seed_is_reproducible():
    shape = (5, 5, 3)
    assert sample_bernoulli_support(shape, 0.3, 11) == sample_bernoulli_support(shape, 0.3, 11)
    np.testing.assert_array_equal(sample_sign_tensor(shape, 0.5, 11), sample_sign_tensor(shape, 0.5, 11))


def test_bernoulli_support_density():
    densities = [sample_bernoulli_support((20, 20, 10), 0.3, seed).density for seed in range(500)]
    assert abs(np.mean(densities) - 0.3) < 0.01


def test_bernoulli_support_extremes(rng):
    assert len(sample_bernoulli_support((3, 3, 2), 0.0, rng)) == 0
    assert len(sample_bernoulli_support((3, 3, 2), 1.0, rng)) == 18
    with pytest.raises(ValueError):
        sample_bernoulli_support((3, 3, 2), 1.2, rng)


def test_sign_tensor_full_density():
    m = sample_sign_tensor((50, 50, 8), 1.0, 3)
    assert np.all(np.abs(m) == 1.0)
    sigma = np.sqrt(1.0 / m.size)
    assert abs(m.mean()) < 5 * sigma


def test_sign_tensor_probabilities():
    m = sample_sign_tensor((100, 100, 100), 0.2, 5)
    plus = np.count_nonzero(m == 1.0) / m.size
    sigma = np.sqrt(0.1 * 0.9 / m.size)
    assert abs(plus - 0.1) < 5 * sigma
    assert set(np.unique(m)) <= {-1.0, 0.0, 1.0}


def test_sample_signs_stay_on_support(rng):
    omega = sample_bernoulli_support((6, 6, 3), 0.3, rng)
    signs = sample_signs(omega, rng)
    np.testing.assert_array_equal(signs[~omega.mask], 0.0)
    np.testing.assert_array_equal(np.abs(signs[omega.mask]), 1.0)


def test_low_tubal_rank_sample():
    l, t = sample_low_tubal_rank((20, 20, 5), 3, 4)
    assert tubal_rank(l) == 3
    assert t.rank == 3
    sigma = fourier_singular_values(l)
    assert sigma[:, 3].max() / sigma.max() < 1e-10


def test_low_tubal_rank_edge_cases():
    l, t = sample_low_tubal_rank((4, 3, 2), 0, 1)
    np.testing.assert_array_equal(l, 0.0)
    assert t.rank == 0
    with pytest.raises(ValueError):
        sample_low_tubal_rank((4, 3, 2), 4, 1)
    with pytest.raises(ValueError):
        sample_low_tubal_rank((4, 3, 2), -1, 1)


def test_golfing_config_from_rho():
    config = GolfingConfig.from_rho(0.1, 5)
    assert (1.0 - config.q) ** 5 == pytest.approx(0.1, abs=1e-12)
    assert config.q * config.j0 >= 1.0 - config.rho
    assert GolfingConfig.from_rho(0.0, 3).q == 1.0


@pytest.mark.parametrize("kwargs", [
    {"j0": 0, "q": 0.5, "rho": 0.0},
    {"j0": 2, "q": 0.0, "rho": 1.0},
    {"j0": 2, "q": 0.5, "rho": 0.3},
    {"j0": 1, "q": 1.5, "rho": 0.0},
])
def test_golfing_config_rejects_inconsistent_parameters(kwargs):
    with pytest.raises(GolfingConfigError):
        GolfingConfig(**kwargs)


def test_golfing_config_rejects_full_corruption():
    with pytest.raises(GolfingConfigError):
        GolfingConfig.from_rho(1.0, 4)


def test_default_j0():
    assert default_j0((20, 20, 4)) == 10
    assert default_j0((30, 10, 2)) == 2 * int(np.ceil(np.log(60)))
    assert default_j0((1, 1, 1)) == 1


def test_partition_covers_complement(rng):
    omega = sample_bernoulli_support((8, 8, 4), 0.2, rng)
    rounds = partition_complement(omega, 6, rng, rho=0.2)
    assert len(rounds) == 6
    union = SupportSet.empty(omega.shape)
    for part in rounds:
        assert len(part & omega) == 0
        union = union | part
    assert union == omega.complement()


def test_partition_is_reproducible():
    omega = sample_bernoulli_support((6, 6, 3), 0.1, 2)
    first = partition_complement(omega, 4, 9)
    second = partition_complement(omega, 4, 9)
    assert first == second


def test_partition_without_corruption_repeats_everything():
    omega = SupportSet.empty((3, 3, 2))
    rounds = partition_complement(omega, 3, 0)
    assert all(part == SupportSet.full((3, 3, 2)) for part in rounds)
