"""
Tests for the closed-form regret bound calculator
"""

import math

import pytest

from bounds import (
    BoundQuery,
    binary_entropy,
    classify_region,
    evaluate,
    fano_error_bound,
    gamma_effective,
    gaussian_mixture_bound,
    gaussian_prior_variance,
    l1_grid_cardinality_bound,
    l1_optimal_spacing,
    lower_bound,
    lower_in_region,
    multilabel_lower_bound,
    pe_upper,
    scaled_grid_log_cardinality,
    theorem2_instance_bound,
    to_bits,
    upper_bound,
)
from comparators import Norm, NormConstraint
from mixtures import default_spacing


def test_gamma_examples():
    T = 1000.0
    assert gamma_effective(BoundQuery(2, T, math.log(T))) == pytest.approx(1.0)
    query = BoundQuery(10, math.exp(10.0), 20.0, eps_exponent=0.1)
    assert gamma_effective(query) == pytest.approx(2.0)
    dense = BoundQuery(500, 100.0, 2 * math.log(100.0))
    assert gamma_effective(dense) == pytest.approx(1.0)


def test_query_validation():
    with pytest.raises(ValueError):
        BoundQuery(0, 100, 1.0)
    with pytest.raises(ValueError):
        BoundQuery(1, 1, 1.0)
    with pytest.raises(ValueError):
        BoundQuery(1, 100, -1.0)
    with pytest.raises(ValueError):
        BoundQuery(1, 100, 1.0, eps_exponent=1.0)
    assert BoundQuery(1, 100, 1.0, 'inf').norm is Norm.LINF


def test_region_one_lower_bound():
    label, value = lower_bound(BoundQuery(1, math.exp(8.0), 1.0))
    assert value == pytest.approx(4.0)
    assert 'region-1' in label


def test_linf_plateau_is_independent_of_d():
    T = 100.0
    B = math.log(T)
    values = [lower_bound(BoundQuery(d, T, B, Norm.LINF)) for d in (200, 300, 1000)]
    for label, value in values:
        assert 'plateau' in label
        assert value == pytest.approx(2.0 / math.e * T)


def test_threshold_takes_the_log_branch():
    T = 100.0
    B = math.log(T)
    label, _ = lower_bound(BoundQuery(2, T, B, Norm.LINF))
    assert 'log' in label
    assert classify_region(BoundQuery(100, T, B, Norm.LINF))[0] == 7
    assert classify_region(BoundQuery(101, T, B, Norm.LINF))[0] == 8


def test_upper_bound_examples():
    label, value = upper_bound(BoundQuery(2, 100, 1.0, Norm.LINF))
    assert value == pytest.approx(math.log(26.0) + 1.0)
    assert value == pytest.approx(4.25810, abs=1e-5)

    _, l2 = upper_bound(BoundQuery(4, 100, 2.0, Norm.L2))
    assert l2 == pytest.approx(2.0 * math.log(100 * math.e / 4.0 + math.e))

    label, _ = upper_bound(BoundQuery(2, 1024, 8.0, Norm.L1))
    assert 'l1-log' in label
    label, value = upper_bound(BoundQuery(200, 1024, 8.0, Norm.L1))
    assert 'l1-mid' in label
    assert value == pytest.approx(100 * math.log(4 * math.e) + 128.0)


def test_instance_bound_examples():
    assert theorem2_instance_bound(1, 3, 50, 0.0) == 0.0
    assert theorem2_instance_bound(37, 2, 64, 0.5) == pytest.approx(math.log(37) + 1.0)
    assert theorem2_instance_bound(37, 2, 64, 0.5) == pytest.approx(4.61092, abs=1e-5)
    for T in (16, 100, 4096):
        assert theorem2_instance_bound(9, 3, T, default_spacing(T)) == pytest.approx(math.log(9) + 1.5)
    with pytest.raises(ValueError):
        theorem2_instance_bound(0, 1, 10, 0.1)


def test_gaussian_prior_choices():
    assert gaussian_prior_variance(NormConstraint(Norm.LINF, 1.0), 3).variance == 1.0
    choice = gaussian_prior_variance(NormConstraint(Norm.L2, 1.0), 4)
    assert choice.variance == pytest.approx(0.25)
    assert gaussian_prior_variance(NormConstraint(Norm.LINF, 1.0), 1).induced_spacing_sq(4) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        gaussian_prior_variance(NormConstraint(Norm.L1, 1.0), 2)

    value = gaussian_mixture_bound(1.0, 2, 4.0, 1.0)
    assert value == pytest.approx(0.5 + math.log(2.0))


def test_multilabel_examples():
    assert multilabel_lower_bound(1, 3, 300) == pytest.approx(math.log(100.0))
    assert multilabel_lower_bound(1, 3, 300) == pytest.approx(4.60517, abs=1e-5)
    assert multilabel_lower_bound(2, 4, 4 * 2 * math.e) == pytest.approx(3.0)
    assert multilabel_lower_bound(3, 2, 600) == pytest.approx(1.5 * math.log(100.0))
    with pytest.raises(ValueError):
        multilabel_lower_bound(1, 1, 100)


def test_table_rows():
    assert classify_region(BoundQuery(1, 1e6, 1.0, Norm.L1))[0] == 1
    assert classify_region(BoundQuery(50, 100, 0.5, Norm.L2))[0] == 6
    row, label = classify_region(BoundQuery(2, 1e6, 1.0, Norm.L2))
    assert row == 4 and label.startswith('L2')


def test_lower_in_region():
    assert lower_in_region(BoundQuery(1, 100, 0.5 * math.log(100)))
    assert not lower_in_region(BoundQuery(2, 100, 0.5 * math.log(100)))
    assert lower_in_region(BoundQuery(2, 100, math.log(100)))
    assert not lower_in_region(BoundQuery(2, 100, math.log(100), drop_vanishing=False))


def test_evaluate_in_region_cell():
    for norm in Norm:
        report = evaluate(BoundQuery(2, 1024, 8.0, norm))
        assert report.lower_in_region
        assert report.lower_nats <= report.upper_nats
        assert report.lower_nats >= report.lower_branch_nats
        assert report.upper_nats <= report.upper_branch_nats + 1e-12


@pytest.mark.parametrize('d, T, B', [(1, 64, 1.0), (3, 1000, 4.0), (40, 256, 2.0), (5, 2 ** 20, 0.5)])
def test_evaluate_is_nested_across_balls(d, T, B):
    reports = {norm: evaluate(BoundQuery(d, T, B, norm)) for norm in Norm}
    assert reports[Norm.L1].lower_nats <= reports[Norm.L2].lower_nats <= reports[Norm.LINF].lower_nats
    assert reports[Norm.L1].upper_nats <= reports[Norm.L2].upper_nats <= reports[Norm.LINF].upper_nats


@pytest.mark.parametrize('norm', list(Norm))
def test_upper_bound_does_not_decrease_with_horizon(norm):
    previous = 0.0
    for exponent in range(4, 21):
        value = evaluate(BoundQuery(6, 2.0 ** exponent, 1.0, norm)).upper_nats
        assert value >= previous - 1e-12
        previous = value


def test_report_dict_units():
    report = evaluate(BoundQuery(2, 100, 1.0, Norm.LINF), include_instance_bound=True)
    nats = report.to_dict()
    assert nats['units'] == 'nats'
    assert nats['norm'] == 'linf'
    assert nats['upper_nats'] == pytest.approx(4.25810, abs=1e-5)
    assert nats['theorem2_bound'] is not None

    bits = report.to_dict(bits=True)
    assert bits['units'] == 'bits'
    assert 'upper_nats' not in bits
    assert bits['upper_bits'] == pytest.approx(to_bits(nats['upper_nats']))
    assert bits['theorem2_bound'] == pytest.approx(nats['theorem2_bound'] / math.log(2.0))


def test_counting_helpers():
    assert l1_grid_cardinality_bound(1, 1.0, 0.5) == pytest.approx(7.0)
    assert l1_grid_cardinality_bound(2000, 1.0, 1e-3) == math.inf
    assert l1_optimal_spacing(1, 1.0, 1.0) == pytest.approx(2.0 ** 1.8)
    assert scaled_grid_log_cardinality(1, 100, 1.0) == 0.0
    assert scaled_grid_log_cardinality(3, 300, 1.0) == pytest.approx(2 * (math.log(3) + 0.5 * math.log(100)))


def test_fano_and_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(math.log(2.0))
    assert fano_error_bound(0.0, 16) == pytest.approx(math.log(16))
    assert fano_error_bound(0.0, 1) == 0.0
    assert fano_error_bound(0.3, 16) <= math.log(16)
    with pytest.raises(ValueError):
        fano_error_bound(1.5, 4)


def test_pe_upper():
    assert pe_upper(BoundQuery(2, 1000, 10.0)) is None
    value = pe_upper(BoundQuery(1, 1e8, 100.0, eps_exponent=0.5))
    assert 0.0 <= value <= 1.0


SWEEP_DIMENSIONS = range(1, 65)
SWEEP_HORIZONS = [2.0 ** exponent for exponent in range(4, 21)]
SWEEP_RADII = (0.5, 1.0, 2.0, 8.0)


@pytest.mark.parametrize('norm', list(Norm))
def test_bounds_over_the_sweep_grid(norm):
    for B in SWEEP_RADII:
        for d in SWEEP_DIMENSIONS:
            previous_lower = previous_upper = -math.inf
            for T in SWEEP_HORIZONS:
                report = evaluate(BoundQuery(d, T, B, norm))
                assert report.lower_nats >= previous_lower - 1e-9
                assert report.upper_nats >= previous_upper - 1e-9
                if report.lower_in_region:
                    assert report.lower_nats <= report.upper_nats + 1e-9
                previous_lower, previous_upper = report.lower_nats, report.upper_nats


@pytest.mark.parametrize('norm, threshold', [
    (Norm.LINF, lambda gamma_tau: 4.0 / math.e * gamma_tau),
    (Norm.L2, lambda gamma_tau: math.sqrt(2.0 * math.pi * gamma_tau / math.e)),
    (Norm.L1, lambda gamma_tau: (4.0 * gamma_tau / math.e) ** (1.0 / 3.0)),
])
def test_lower_branches_meet_at_the_threshold(norm, threshold):
    # B = ln(T) / 2 pins gamma at 1/2, so the threshold does not move with d.
    T = 1000.0
    B = 0.5 * math.log(T)
    d_star = threshold(0.5 * T)
    below_label, below = lower_bound(BoundQuery(d_star * (1 - 1e-10), T, B, norm))
    above_label, above = lower_bound(BoundQuery(d_star * (1 + 1e-10), T, B, norm))
    assert 'log' in below_label
    assert 'plateau' in above_label
    assert above == pytest.approx(below, rel=1e-8)
