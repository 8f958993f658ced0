"""
End-to-end tests for the workbench commands
"""

import json
import math

import numpy as np
import pandas as pd
import pytest

from comparators import Norm, NormConstraint
from formatters import TRACE_COLUMNS
from utils.errors import ConfigurationError, GridSizeError, InfeasibleDesignError
from workbench import RegretWorkbench, random_sequence


@pytest.fixture
def workbench(monkeypatch):
    monkeypatch.delenv('REGRETLAB_THREADS', raising=False)
    monkeypatch.delenv('REGRETLAB_LOG_LEVEL', raising=False)
    return RegretWorkbench()


def run(workbench, **flags):
    return workbench.execute(workbench.experiment(**flags))


def test_random_sequence_respects_the_ball(rng):
    constraint = NormConstraint(Norm.L1, 0.5)
    theta, sequence = random_sequence(rng, 3, 40, constraint)
    assert len(sequence) == 40
    assert sequence.dimension == 3
    assert np.abs(theta.weights).sum() <= 0.5 + 1e-12
    assert np.all(np.abs(sequence.features) <= 1.0)

    _, ones = random_sequence(rng, 1, 10, constraint, unit_features=True)
    assert np.all(ones.features == 1.0)


def test_grid_mixture_run(tmp_path, workbench):
    output = tmp_path / 'trace.csv'
    summary = run(
        workbench, command='run', algorithm='grid-mixture', norm='l1',
        B=1.0, d=1, T=16, seed=7, output_path=output,
    )

    lines = output.read_text().splitlines()
    assert lines[0] == ','.join(TRACE_COLUMNS)
    assert len(lines) == 17

    summary_path = tmp_path / 'trace.summary.json'
    assert sorted(summary['artifacts']) == sorted([str(output), str(summary_path)])
    on_disk = json.loads(summary_path.read_text())
    assert on_disk['kind'] == 'run'
    assert on_disk['T'] == 16
    assert on_disk['final_regret'] == pytest.approx(summary['final_regret'], rel=1e-15)
    assert on_disk['grid_cardinality'] == 5
    assert on_disk['spacing'] == pytest.approx(1.0)
    assert on_disk['final_regret'] <= on_disk['theorem2_bound'] + 1e-9
    assert on_disk['upper_bound_branch']
    assert abs(on_disk['comparator'][0]) <= 1.0 + 1e-12

    trace = pd.read_csv(output, float_precision='round_trip')
    assert trace['cum_regret_nats'].iloc[-1] == pytest.approx(summary['final_regret'], abs=1e-9)

    assert workbench.validate_output(str(output))
    assert workbench.validate_output(str(summary_path))


def test_runs_are_reproducible(tmp_path, workbench):
    first = tmp_path / 'a.csv'
    second = tmp_path / 'b.csv'
    run(workbench, d=2, T=30, norm='l2', seed=5, output_path=first)
    run(workbench, d=2, T=30, norm='l2', seed=5, output_path=second)
    assert first.read_bytes() == second.read_bytes()

    third = tmp_path / 'c.csv'
    run(workbench, d=2, T=30, norm='l2', seed=6, output_path=third)
    assert first.read_bytes() != third.read_bytes()


@pytest.mark.parametrize('algorithm', ['kt', 'ogd'])
def test_baseline_runs(tmp_path, workbench, algorithm):
    output = tmp_path / f'{algorithm}.json'
    summary = run(workbench, algorithm=algorithm, d=1, T=20, seed=1, format='json', output_path=output)
    data = json.loads(output.read_text())
    assert data['round'] == list(range(1, 21))
    assert summary['algorithm'] == algorithm
    assert summary['theorem2_bound'] is None
    assert summary['comparator_loss'] >= 0.0
    assert workbench.validate_output(str(output))


def test_kt_regret_bound(tmp_path, workbench):
    summary = run(workbench, algorithm='kt', d=1, T=64, B=8.0, seed=2, output_path=tmp_path / 'kt.csv')
    assert summary['final_regret'] <= 0.5 * math.log(64) + 1.0 + 1e-6


def test_gaussian_mixture_run(tmp_path, workbench):
    summary = run(
        workbench, algorithm='gaussian-mixture', norm='linf', d=1, T=16, seed=4,
        output_path=tmp_path / 'gauss.csv',
    )
    assert summary['gaussian_variance'] > 0.0
    assert summary['gaussian_bound'] > 0.0
    assert summary['refinement_delta'] is not None
    assert summary['refinement_delta'] >= 0.0
    assert summary['refinement_accepted'] == (summary['refinement_delta'] < 1e-3)


def test_csv_sequence_run(tmp_path, workbench):
    examples = tmp_path / 'examples.csv'
    examples.write_text("x1,x2,label\n0.5,-0.5,1\n1,0,-1\n-0.25,0.75,1\n0,0,1\n")
    summary = run(
        workbench, sequence='csv', input_path=examples, norm='l2', B=2.0,
        output_path=tmp_path / 'csv_trace.csv',
    )
    assert summary['d'] == 2
    assert summary['T'] == 4
    assert len(summary['comparator']) == 2


def test_segmented_sequence_run(tmp_path, workbench):
    summary = run(
        workbench, sequence='segmented', d=2, T=64, B=4.0, seed=3,
        output_path=tmp_path / 'segmented.csv',
    )
    assert summary['T'] == 64
    assert summary['d'] == 2


def test_grid_cap_writes_nothing(tmp_path, workbench):
    output = tmp_path / 'capped.csv'
    with pytest.raises(GridSizeError) as info:
        run(workbench, d=3, T=16, max_grid_points=10, output_path=output)
    assert info.value.requested == 125
    assert info.value.cap == 10
    assert list(tmp_path.iterdir()) == []


def test_bounds_report(tmp_path, workbench):
    output = tmp_path / 'bounds.json'
    record = run(workbench, command='bounds', d=2, T=100, B=1.0, norm='linf', output_path=output)
    data = json.loads(output.read_text())
    assert data['kind'] == 'bounds'
    assert data['upper_nats'] == pytest.approx(4.25810, abs=1e-5)
    assert data['units'] == 'nats'
    assert record['artifacts'] == [str(output)]
    assert workbench.validate_output(str(output))


def test_bounds_report_in_bits_with_labels(tmp_path, workbench):
    output = tmp_path / 'bounds.csv'
    run(workbench, command='bounds', d=2, T=100, B=1.0, labels_m=4, bits=True, output_path=output)
    frame = pd.read_csv(output)
    assert len(frame) == 1
    assert frame['units'].iloc[0] == 'bits'
    assert frame['upper_bits'].iloc[0] == pytest.approx(4.25810 / math.log(2.0), abs=1e-5)
    assert 'multilabel_lower' in frame.columns
    assert workbench.validate_output(str(output))


def test_bounds_report_rejects_short_horizon(tmp_path, workbench):
    with pytest.raises(ValueError, match='Horizon'):
        run(workbench, command='bounds', T=1, output_path=tmp_path / 'b.json')
    assert not (tmp_path / 'b.json').exists()


def test_distinguish(tmp_path, workbench):
    output = tmp_path / 'distinguish.json'
    record = run(workbench, command='distinguish', d=1, T=16, trials=400, seed=3, output_path=output)
    assert record['grid_cardinality_M'] == 5
    assert record['units'] == 'nats'
    assert record['exact_error_rate'] is not None
    sigma = math.sqrt(record['exact_error_rate'] * (1 - record['exact_error_rate']) / 400)
    assert abs(record['error_rate_Pe'] - record['exact_error_rate']) <= 4 * sigma + 0.01
    assert record['expected_regret_lower'] <= math.log(5)
    assert workbench.validate_output(str(output))

    again = run(workbench, command='distinguish', d=1, T=16, trials=400, seed=3, threads=1,
                output_path=tmp_path / 'again.json')
    assert again['error_rate_Pe'] == record['error_rate_Pe']


def test_distinguish_in_bits(tmp_path, workbench):
    record = run(workbench, command='distinguish', d=1, T=16, trials=50, seed=3, bits=True,
                 output_path=tmp_path / 'bits.json')
    assert record['units'] == 'bits'
    assert record['expected_regret_lower'] <= math.log2(5) + 1e-12


def test_distinguish_infeasible_design(tmp_path, workbench):
    with pytest.raises(InfeasibleDesignError):
        run(workbench, command='distinguish', d=3, T=2, output_path=tmp_path / 'x.json')


@pytest.mark.parametrize('algorithm', ['grid-mixture', 'kt'])
def test_capacity(tmp_path, workbench, algorithm):
    output = tmp_path / f'capacity_{algorithm}.json'
    record = run(workbench, command='capacity', algorithm=algorithm, d=1, T=16, trials=60, seed=8,
                 output_path=output)
    assert record['grid_cardinality'] == 5
    assert record['trials'] == 60
    assert record['standard_error'] >= 0.0
    assert record['violation'] == (record['measured_expected_regret'] < record['bound'])
    assert workbench.validate_output(str(output))


def test_capacity_kt_needs_plain_scalar_design(tmp_path, workbench):
    with pytest.raises(InfeasibleDesignError):
        run(workbench, command='capacity', algorithm='kt', d=2, T=72, gamma_levels=1,
            output_path=tmp_path / 'x.json')


def test_sweep_marks_infeasible_cells(tmp_path, workbench):
    output = tmp_path / 'sweep.csv'
    record = run(workbench, command='sweep', norm='l2', d_values=[1, 2], T_values=[1, 64], B_values=[1.0],
                 output_path=output)
    assert record['rows'] == 4
    assert record['infeasible'] == 2

    table = pd.read_csv(output)
    assert len(table) == 4
    assert 'measured_regret' not in table.columns
    short = table[table['T'] == 1]
    assert short['status'].str.startswith('infeasible:').all()
    assert (table[table['T'] == 64]['status'] == 'ok').all()
    assert workbench.validate_output(str(output))


def test_sweep_measure_in_bits(tmp_path, workbench):
    output = tmp_path / 'sweep.json'
    run(workbench, command='sweep', norm='linf', d_values='1', T_values='16,32', B=1.0,
        measure=True, bits=True, format='json', output_path=output)
    rows = json.loads(output.read_text())
    assert len(rows) == 2
    for row in rows:
        assert row['status'] == 'ok'
        assert 'upper_bits' in row and 'upper_nats' not in row
        assert row['grid_cardinality'] >= 1
        assert 0.0 <= row['measured_regret'] <= row['theorem2_bound'] + 1e-9
    assert workbench.validate_output(str(output))


def test_sweep_is_independent_of_threads(tmp_path, workbench):
    flags = dict(command='sweep', norm='l1', d_values=[1, 2], T_values=[16, 64], B_values=[1.0, 2.0],
                 measure=True)
    run(workbench, threads=1, output_path=tmp_path / 'one.csv', **flags)
    run(workbench, threads=4, output_path=tmp_path / 'four.csv', **flags)
    assert (tmp_path / 'one.csv').read_bytes() == (tmp_path / 'four.csv').read_bytes()


def test_config_file_feeds_experiments(tmp_path, monkeypatch):
    monkeypatch.delenv('REGRETLAB_THREADS', raising=False)
    config = tmp_path / 'config.yaml'
    config.write_text("experiment:\n  norm: l2\n  d: 2\noutput:\n  format: json\n")
    workbench = RegretWorkbench(str(config))
    experiment = workbench.experiment(T=32)
    assert (experiment.norm, experiment.d, experiment.T, experiment.format) == ('l2', 2, 32, 'json')


def test_invalid_config_file_is_rejected(tmp_path, monkeypatch):
    monkeypatch.delenv('REGRETLAB_LOG_LEVEL', raising=False)
    config = tmp_path / 'config.yaml'
    config.write_text("logging:\n  level: LOUD\n")
    with pytest.raises(ConfigurationError):
        RegretWorkbench(config_path=str(config))
