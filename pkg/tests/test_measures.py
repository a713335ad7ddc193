"""
Tests for discrete measures, codebooks, projections and pushforwards
"""

import numpy as np
import pytest

from wassquant.core.measures import (
    Codebook,
    DiscreteMeasure,
    assign,
    empirical_measure,
    expected_distance_power,
    make_discrete_measure,
    nearest_projection,
    projection_distance,
    pushforward,
    sample_codebook,
)
from wassquant.errors import DimensionMismatchError, ParameterError


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def random_measure(rng):
    points = rng.normal(size=(30, 3))
    weights = rng.random(30)
    return DiscreteMeasure(points, weights / weights.sum())


class TestDiscreteMeasure:
    """Construction and validation of DiscreteMeasure"""

    def test_uniform_default_weights(self):
        mu = DiscreteMeasure([[0.0], [1.0], [2.0], [3.0]])
        assert mu.size == 4
        assert mu.dim == 1
        assert mu.is_uniform
        np.testing.assert_allclose(mu.weights, 0.25)

    def test_weights_sum_to_one(self, random_measure):
        assert abs(random_measure.weights.sum() - 1.0) <= 1e-12

    def test_zero_weight_atoms_dropped(self):
        mu = make_discrete_measure([[0.0], [1.0], [2.0]], [0.5, 0.0, 0.5])
        assert mu.size == 2
        assert sorted(mu.support[:, 0].tolist()) == [0.0, 2.0]

    def test_duplicates_merged(self):
        mu = DiscreteMeasure([[1.0, 1.0], [0.0, 0.0], [1.0, 1.0]], [0.25, 0.5, 0.25])
        assert mu.size == 2
        np.testing.assert_array_equal(mu.support[0], [1.0, 1.0])
        assert mu.weights[0] == pytest.approx(0.5)

    def test_negative_zero_merges_with_zero(self):
        mu = DiscreteMeasure([[-0.0], [0.0]])
        assert mu.size == 1
        assert mu.weights[0] == pytest.approx(1.0)

    def test_rounded_weights_are_renormalized(self):
        weights = [0.3333333333, 0.3333333333, 0.3333333334]
        mu = DiscreteMeasure([[0.0], [1.0], [2.0]], weights)
        assert abs(mu.weights.sum() - 1.0) <= 1e-12

    @pytest.mark.parametrize(
        "weights",
        [[0.5, 0.6], [-0.1, 1.1], [0.0, 0.0], [np.nan, 1.0]],
    )
    def test_invalid_weights_rejected(self, weights):
        with pytest.raises(ParameterError):
            DiscreteMeasure([[0.0], [1.0]], weights)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            DiscreteMeasure([[0.0], [1.0]], [1.0])

    def test_ragged_points(self):
        with pytest.raises(DimensionMismatchError):
            DiscreteMeasure([[0.0, 1.0], [1.0]])

    def test_empty_rejected(self):
        with pytest.raises(ParameterError):
            DiscreteMeasure(np.zeros((0, 2)))

    def test_non_finite_points_rejected(self):
        with pytest.raises(ParameterError):
            DiscreteMeasure([[0.0], [np.inf]])

    def test_immutable(self, random_measure):
        with pytest.raises(AttributeError):
            random_measure.weights = np.ones(3)
        with pytest.raises(ValueError):
            random_measure.support[0, 0] = 5.0

    def test_equals_ignores_atom_order(self):
        a = DiscreteMeasure([[0.0], [1.0]], [0.3, 0.7])
        b = DiscreteMeasure([[1.0], [0.0]], [0.7, 0.3])
        assert a.equals(b)
        assert not a.equals(DiscreteMeasure([[0.0], [1.0]]))

    def test_empirical_measure_merges_repeats(self):
        mu = empirical_measure([[0.0], [1.0], [1.0], [1.0]])
        assert mu.size == 2
        np.testing.assert_allclose(sorted(mu.weights), [0.25, 0.75])


class TestCodebook:
    """Codebook validation and nearest-center assignment"""

    def test_distinct_centers_required(self):
        with pytest.raises(ParameterError):
            Codebook([[0.0, 0.0], [0.0, 0.0]])

    def test_from_points_dedupes(self):
        S = Codebook.from_points([[0.0], [1.0], [0.0], [2.0]])
        assert S.k == 3
        assert len(S) == 3

    def test_sample_codebook(self):
        points = [np.array([1.0, 2.0]), np.array([1.0, 2.0]), np.array([0.0, 0.0])]
        S = sample_codebook(points)
        assert S.k == 2
        assert S.dim == 2

    def test_nearest_projection_tie_goes_to_lowest_index(self):
        S = Codebook([[0.0], [2.0]])
        assert nearest_projection([1.0], S) == 0
        S_rev = Codebook([[2.0], [0.0]])
        assert nearest_projection([1.0], S_rev) == 0

    def test_nearest_projection_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            nearest_projection([1.0, 0.0], Codebook([[0.0], [1.0]]))

    def test_assign_matches_nearest_projection(self, rng):
        points = rng.normal(size=(5000, 2))
        S = Codebook(rng.normal(size=(7, 2)))
        labels = assign(points, S)
        for i in range(0, 5000, 487):
            assert labels[i] == nearest_projection(points[i], S)


class TestPushforward:
    """Pushforward measures through the nearest-center map"""

    def test_mass_preserved(self, random_measure, rng):
        S = Codebook(rng.normal(size=(5, 3)))
        image = pushforward(random_measure, S)
        assert abs(image.weights.sum() - 1.0) <= 1e-12
        assert image.size <= S.k

    def test_support_is_subset_of_codebook(self, random_measure, rng):
        S = Codebook(rng.normal(size=(5, 3)))
        image = pushforward(random_measure, S)
        for atom in image.support:
            assert np.min(np.linalg.norm(S.centers - atom, axis=1)) == 0.0

    def test_idempotent(self, random_measure, rng):
        S = Codebook(rng.normal(size=(6, 3)))
        once = pushforward(random_measure, S)
        twice = pushforward(once, S)
        np.testing.assert_array_equal(once.support, twice.support)
        np.testing.assert_array_equal(once.weights, twice.weights)

    def test_single_center_collapses_everything(self, random_measure):
        image = pushforward(random_measure, Codebook([[0.0, 0.0, 0.0]]))
        assert image.size == 1
        assert image.weights[0] == pytest.approx(1.0)

    def test_two_point_example(self):
        mu = DiscreteMeasure([[0.0], [0.4], [0.6], [1.0]])
        image = pushforward(mu, Codebook([[0.0], [1.0]]))
        np.testing.assert_allclose(image.support[:, 0], [0.0, 1.0])
        np.testing.assert_allclose(image.weights, [0.5, 0.5])

    def test_empty_cells_omitted(self):
        mu = DiscreteMeasure([[0.0], [0.1]])
        image = pushforward(mu, Codebook([[0.0], [10.0]]))
        assert image.size == 1

    def test_dimension_mismatch(self, random_measure):
        with pytest.raises(DimensionMismatchError):
            pushforward(random_measure, Codebook([[0.0], [1.0]]))


class TestExpectedDistance:
    """Expected distance to a codebook"""

    def test_zero_on_own_support(self, random_measure):
        S = Codebook(random_measure.support)
        assert expected_distance_power(random_measure, S, 2) == 0.0

    def test_hand_computed_value(self):
        mu = DiscreteMeasure([[0.0], [3.0]], [0.5, 0.5])
        S = Codebook([[1.0]])
        assert expected_distance_power(mu, S, 2) == pytest.approx(0.5 * 1 + 0.5 * 4)
        assert expected_distance_power(mu, S, 1) == pytest.approx(1.5)
        assert projection_distance(mu, S, 2) == pytest.approx(np.sqrt(2.5))

    def test_more_centers_never_increase_cost(self, random_measure, rng):
        centers = rng.normal(size=(8, 3))
        small = expected_distance_power(random_measure, Codebook(centers[:3]), 2)
        large = expected_distance_power(random_measure, Codebook(centers), 2)
        assert large <= small

    def test_order_below_one_rejected(self, random_measure):
        with pytest.raises(ParameterError):
            S = Codebook(random_measure.support[:2])
            expected_distance_power(random_measure, S, 0.5)
