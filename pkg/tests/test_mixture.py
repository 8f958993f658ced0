"""
Tests for lattice grids and the Bayesian mixture predictor
"""

import math

import numpy as np
import pytest
from scipy.special import expit, logsumexp

from adversary import build_design, build_theory_grid, sample_and_label
from conftest import ones_sequence
from comparators import Norm, NormConstraint, best_comparator
from core.logistic import LabeledExample, LabeledSequence, ParamVector
from mixtures import (
    BayesianMixture,
    LogPosterior,
    ParamGrid,
    PriorSpec,
    build_grid,
    default_spacing,
    grid_cardinality,
    init_posterior,
    mixture_predict,
    posterior_update,
    refinement_delta,
    run_online,
    sequence_probability,
    variational_certificate,
)
from utils.errors import FeatureBoundError, GridSizeError


def two_point_grid() -> ParamGrid:
    return ParamGrid(np.array([[-1.0], [1.0]]), 2.0, NormConstraint(Norm.LINF, 1.0), 'two points')


def test_linf_lattice_example():
    grid = build_grid(1, NormConstraint(Norm.LINF, 1.0), 0.5)
    np.testing.assert_allclose(grid.points[:, 0], [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5])
    assert grid.is_lattice


def test_l1_lattice_example():
    grid = build_grid(2, NormConstraint(Norm.L1, 1.0), 0.5)
    assert grid.cardinality == 37
    assert np.all(np.abs(grid.points).sum(axis=1) <= 2.0 + 1e-12)
    assert grid_cardinality(2, NormConstraint(Norm.L1, 1.0), 0.5) == 37


def test_coarse_lattice_still_brackets():
    grid = build_grid(1, NormConstraint(Norm.L2, 1.0), 3.0)
    np.testing.assert_allclose(grid.points[:, 0], [-3.0, 0.0, 3.0])


@pytest.mark.parametrize('norm', ['l1', 'l2', 'linf'])
@pytest.mark.parametrize('d', [1, 2, 3])
def test_cardinality_count_matches_enumeration(norm, d):
    constraint = NormConstraint(norm, 1.3)
    grid = build_grid(d, constraint, 0.4)
    assert grid_cardinality(d, constraint, 0.4) == grid.cardinality
    assert len({tuple(row) for row in grid.indices.tolist()}) == grid.cardinality


def test_grid_cap():
    with pytest.raises(GridSizeError) as excinfo:
        build_grid(3, NormConstraint(Norm.LINF, 1.0), 0.1, max_points=1000)
    assert excinfo.value.cap == 1000
    assert excinfo.value.requested == 23 ** 3


def test_default_spacing():
    assert default_spacing(16) == 1.0
    assert default_spacing(1) == 4.0
    assert default_spacing(1024) == 0.125
    with pytest.raises(ValueError):
        default_spacing(0)


def test_prior_weights():
    lattice = build_grid(2, NormConstraint(Norm.L1, 1.0), 0.5)
    np.testing.assert_allclose(init_posterior(lattice, PriorSpec.uniform()).weights, 1.0 / 37)

    three = build_grid(1, NormConstraint(Norm.LINF, 0.5), 1.0)
    np.testing.assert_allclose(three.points[:, 0], [-1.0, 0.0, 1.0])
    weights = init_posterior(three, PriorSpec.gaussian(1.0)).weights
    np.testing.assert_allclose(weights, [0.27406, 0.45187, 0.27406], atol=1e-5)

    flat = init_posterior(lattice, PriorSpec.gaussian(1e12)).weights
    assert np.max(np.abs(flat - 1.0 / 37)) <= 1e-6

    with pytest.raises(ValueError):
        PriorSpec('quantized_gaussian')


def test_posterior_update_examples():
    grid = two_point_grid()
    prior = init_posterior(grid, PriorSpec.uniform())
    updated = posterior_update(prior, grid, LabeledExample(np.array([1.0]), 1))
    np.testing.assert_allclose(updated.weights, [expit(-1.0), expit(1.0)], atol=1e-12)
    np.testing.assert_allclose(updated.weights, [0.268941, 0.731059], atol=1e-6)
    assert abs(logsumexp(updated.log_weights)) <= 1e-9

    unchanged = posterior_update(prior, grid, LabeledExample(np.array([0.0]), -1))
    np.testing.assert_allclose(unchanged.weights, prior.weights)


def test_mixture_predict_examples():
    grid = two_point_grid()
    uniform = init_posterior(grid, PriorSpec.uniform())
    assert mixture_predict(uniform, grid, np.array([0.7])) == pytest.approx(0.5)

    skewed = LogPosterior(np.log([0.75, 0.25]))
    expected = 0.75 * expit(-1.0) + 0.25 * expit(1.0)
    assert mixture_predict(skewed, grid, np.array([1.0])) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.384471, abs=1e-6)

    single = ParamGrid(np.array([[0.8, -0.3]]), 1.0, NormConstraint(Norm.L2, 1.0), 'single')
    x = np.array([0.5, 1.0])
    assert mixture_predict(init_posterior(single, PriorSpec.uniform()), single, x) == pytest.approx(
        expit(0.8 * 0.5 - 0.3)
    )


def test_singleton_grid_has_zero_regret(random_sequence_2d):
    theta = ParamVector(np.array([0.4, -0.2]))
    grid = ParamGrid(theta.weights[None, :], 1.0, NormConstraint(Norm.L2, 1.0), 'single')
    trace, _ = run_online(grid, PriorSpec.uniform(), random_sequence_2d, comparator=theta)
    np.testing.assert_allclose(trace.cumulative_regret, 0.0, atol=1e-12)


@pytest.mark.parametrize('prior', [PriorSpec.uniform(), PriorSpec.gaussian(1.0)])
def test_online_loss_equals_sequence_code_length(random_sequence_2d, prior):
    grid = build_grid(2, NormConstraint(Norm.L2, 1.0), 0.5)
    trace, posterior = run_online(grid, prior, random_sequence_2d)
    assert trace.algorithm_loss == pytest.approx(
        sequence_probability(grid, prior, random_sequence_2d), abs=1e-9
    )
    assert abs(posterior.log_normalizer()) <= 1e-9


def test_regret_is_order_independent(random_sequence_2d):
    grid = build_grid(2, NormConstraint(Norm.LINF, 1.0), 0.5)
    comparator = best_comparator(random_sequence_2d, grid.constraint).theta_star
    forward, _ = run_online(grid, PriorSpec.uniform(), random_sequence_2d, comparator)
    order = np.arange(len(random_sequence_2d))[::-1]
    backward, _ = run_online(grid, PriorSpec.uniform(), random_sequence_2d.permuted(order), comparator)
    assert forward.total_regret == pytest.approx(backward.total_regret, abs=1e-9)


def test_regret_within_lattice_bounds(rng):
    T = 64
    constraint = NormConstraint(Norm.L2, 1.0)
    features = rng.uniform(-1, 1, size=(T, 2))
    labels = np.where(rng.random(T) < expit(features @ np.array([0.6, -0.5])), 1, -1)
    sequence = LabeledSequence(features, labels)

    spacing = default_spacing(T)
    grid = build_grid(2, constraint, spacing)
    comparator = best_comparator(sequence, constraint).theta_star
    trace = BayesianMixture(grid).run(sequence, comparator)

    certificate = variational_certificate(grid, PriorSpec.uniform(), comparator, T)
    assert trace.total_regret <= certificate + 1e-9
    assert certificate <= math.log(grid.cardinality) + 2 * T * spacing ** 2 / 32 + 1e-9


def test_mixture_defaults_to_best_comparator():
    sequence = ones_sequence([1, 1, 1, -1])
    grid = build_grid(1, NormConstraint(Norm.LINF, 1.0), 0.25)
    mixture = BayesianMixture(grid)
    trace = mixture.run(sequence)
    expected = best_comparator(sequence, grid.constraint)
    assert trace.comparator_loss == pytest.approx(expected.loss, abs=1e-9)
    assert len(mixture.last_posterior) == grid.cardinality


def test_refinement_delta_is_small_for_a_fine_lattice():
    sequence = ones_sequence([1, -1, 1, 1])
    constraint = NormConstraint(Norm.LINF, 4.0)
    fine = refinement_delta(1, constraint, 0.0625, PriorSpec.gaussian(1.0), sequence)
    assert 0.0 <= fine < 1e-3

    empty = LabeledSequence.empty(1)
    assert refinement_delta(1, constraint, 0.5, PriorSpec.gaussian(1.0), empty) == pytest.approx(0.0, abs=1e-15)


def _labeled_sequence(kind: str, d: int, T: int, rng) -> LabeledSequence:
    if kind == 'segmented':
        design = build_design(d, T)
        _, sequence = sample_and_label(design, build_theory_grid(design, points_per_dimension=3), rng)
        return sequence
    features = rng.uniform(-1, 1, size=(T, d))
    return LabeledSequence(features, rng.choice([-1, 1], size=T))


@pytest.mark.parametrize('kind', ['random', 'segmented'])
@pytest.mark.parametrize('norm', ['l1', 'l2', 'linf'])
@pytest.mark.parametrize('d', [1, 2, 3])
def test_regret_to_a_grid_point_is_its_log_posterior_ratio(rng, kind, norm, d):
    sequence = _labeled_sequence(kind, d, 12 * d, rng)
    grid = build_grid(d, NormConstraint(norm, 1.0), 0.5)
    prior = init_posterior(grid, PriorSpec.uniform())
    _, posterior = run_online(grid, PriorSpec.uniform(), sequence, comparator=grid[0])
    log_ratio = posterior.log_weights - prior.log_weights

    for i, theta in enumerate(grid):
        trace, _ = run_online(grid, PriorSpec.uniform(), sequence, comparator=theta)
        assert trace.total_regret == pytest.approx(log_ratio[i], abs=1e-9)


def test_prediction_lies_between_the_point_predictions(rng):
    grid = build_grid(2, NormConstraint(Norm.L2, 2.0), 0.5)
    for _ in range(100):
        posterior = LogPosterior.normalized(rng.normal(0, 3, size=grid.cardinality))
        x = rng.uniform(-1, 1, size=2)
        point_predictions = expit(grid.points @ x)
        p = mixture_predict(posterior, grid, x)
        assert point_predictions.min() - 1e-12 <= p <= point_predictions.max() + 1e-12


def test_grid_order_does_not_change_predictions(rng, random_sequence_2d):
    grid = build_grid(2, NormConstraint(Norm.L1, 1.5), 0.5)
    order = rng.permutation(grid.cardinality)
    shuffled = grid.permuted(order)
    for prior in (PriorSpec.uniform(), PriorSpec.gaussian(2.0)):
        comparator = ParamVector(np.array([0.25, -0.5]))
        forward, posterior = run_online(grid, prior, random_sequence_2d, comparator)
        permuted, permuted_posterior = run_online(shuffled, prior, random_sequence_2d, comparator)
        np.testing.assert_allclose(permuted.per_round_alg_loss, forward.per_round_alg_loss, rtol=0, atol=1e-12)
        np.testing.assert_allclose(permuted_posterior.log_weights, posterior.log_weights[order], atol=1e-9)

        x = random_sequence_2d.features[0]
        assert mixture_predict(permuted_posterior, shuffled, x) == pytest.approx(
            mixture_predict(posterior, grid, x), abs=1e-12
        )


def test_posterior_weights_stay_positive(rng):
    grid = build_grid(1, NormConstraint(Norm.LINF, 2.0), 0.25)
    sequence = ones_sequence(np.where(rng.random(200) < 0.8, 1, -1))
    _, posterior = run_online(grid, PriorSpec.uniform(), sequence)
    assert np.all(posterior.weights > 0.0)
    assert abs(posterior.log_normalizer()) <= 1e-9

    long_run = ones_sequence(np.ones(10_000, dtype=int))
    _, skewed = run_online(grid, PriorSpec.gaussian(1.0), long_run)
    assert np.all(np.isfinite(skewed.log_weights))
    assert abs(skewed.log_normalizer()) <= 1e-9


def test_non_finite_features_are_rejected():
    grid = two_point_grid()
    posterior = init_posterior(grid, PriorSpec.uniform())
    for bad in (np.nan, np.inf):
        with pytest.raises(FeatureBoundError):
            mixture_predict(posterior, grid, np.array([bad]))
    with pytest.raises(FeatureBoundError):
        mixture_predict(posterior, grid, np.array([1.5]))
