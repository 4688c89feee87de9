from fractions import Fraction
from math import ceil

import numpy as np
import pytest

from graph_radii.errors import DimensionError, ParameterError
from graph_radii.formalisms import conformal
from graph_radii.utils import is_almost_equal


def test_conformal_score():
    assert conformal.conformal_score(lower=0., upper=1., y=1.5) == 0.5
    assert conformal.conformal_score(lower=0., upper=1., y=0.5) == -0.5
    assert conformal.conformal_score(lower=0., upper=1., y=-2.) == 2.
    assert conformal.conformal_score(lower=1., upper=0., y=0.5) == 0.5
    for y in np.linspace(0., 1., 5):
        assert conformal.conformal_score(lower=0., upper=1., y=y) <= 0


def test_calc_conformal_scores():
    scores = conformal.calc_conformal_scores(np.zeros((2, 2)), np.ones((2, 2)), np.array([[1.5, 0.5], [-1., 0.]]))
    assert np.array_equal(scores, [[0.5, -0.5], [1., 0.]])
    with pytest.raises(DimensionError):
        conformal.calc_conformal_scores(np.zeros((2, 2)), np.ones((2, 2)), np.zeros((3, 2)))


def test_compute_qhat():
    scores = [0.1 * i for i in range(1, 10)]
    assert is_almost_equal(conformal.compute_qhat(scores, alpha=0.1), 0.9)

    scores = np.random.default_rng(0).random(19)
    assert conformal.compute_qhat(scores, alpha=0.05) == scores.max()

    assert conformal.compute_qhat([0.3] * 7, alpha=0.2) == 0.3
    assert conformal.compute_qhat([4., 1., 2., 3., 5.], alpha=0.05) == 5.
    assert conformal.compute_qhat([2.], alpha=0.5) == 2.

    with pytest.raises(ParameterError):
        conformal.compute_qhat([], alpha=0.1)
    with pytest.raises(ParameterError):
        conformal.compute_qhat([1.], alpha=1.)


def test_compute_qhat_matches_sort_and_index():
    rng = np.random.default_rng(1)
    for alpha in (0.05, 0.1, 0.5):
        level = 1 - Fraction(str(alpha))
        for _ in range(1000):
            scores = rng.standard_normal(int(rng.integers(1, 60)))
            m = len(scores)
            k = min(ceil((m + 1) * level), m)
            assert conformal.compute_qhat(scores, alpha) == sorted(scores)[k - 1]


def test_compute_qhat_is_monotone_in_the_scores():
    rng = np.random.default_rng(2)
    for _ in range(100):
        scores = list(rng.standard_normal(int(rng.integers(1, 30))))
        before = conformal.compute_qhat(scores, alpha=0.1)
        after = conformal.compute_qhat(scores + [max(scores) + rng.random()], alpha=0.1)
        assert after >= before


def test_calc_intervals():
    lower, upper = np.array([[0., 1.], [2., 3.]]), np.array([[1., 2.], [3., 5.]])
    new_lower, new_upper = conformal.calc_intervals(lower, upper, np.zeros(2))
    assert np.array_equal(new_lower, lower) and np.array_equal(new_upper, upper)

    q_hat = np.array([0.5, 0.25])
    new_lower, new_upper = conformal.calc_intervals(lower, upper, q_hat)
    assert np.allclose((new_upper - new_lower) - (upper - lower), 2 * q_hat)

    with pytest.raises(DimensionError):
        conformal.calc_intervals(lower, upper, np.zeros(3))


def test_calc_mean_width_clamps_inverted_intervals():
    lower = np.array([[0., 0.], [1., 0.]])
    upper = np.array([[2., 1.], [0., 1.]])
    assert np.array_equal(conformal.calc_mean_width(lower, upper), [1.5, 0.5])


def _heteroscedastic(rng, m):
    x = rng.random(m)
    y = np.sin(2 * np.pi * x) + (0.1 + x) * rng.standard_normal(m)
    return x, y


@pytest.mark.slow
def test_conformalized_intervals_reach_nominal_coverage():
    alpha = 0.05

    def regressor(x):
        center = np.sin(2 * np.pi * x)
        return center - 0.3, center + 0.3

    covered_trials = 0
    for trial in range(10):
        rng = np.random.default_rng(100 + trial)
        x_cal, y_cal = _heteroscedastic(rng, 200)
        lower, upper = regressor(x_cal)
        q_hat = conformal.compute_qhat(conformal.calc_conformal_scores(lower, upper, y_cal), alpha)

        x_test, y_test = _heteroscedastic(rng, 1000)
        lower, upper = conformal.calc_intervals(*regressor(x_test), q_hat)
        coverage = np.mean((lower <= y_test) & (y_test <= upper))
        covered_trials += coverage >= 0.92
    assert covered_trials >= 9
