"""
Tests for the command-line interface
"""

import json

import pytest
import yaml

from cli import create_parser, experiment_overrides, main


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv('REGRETLAB_THREADS', raising=False)
    monkeypatch.delenv('REGRETLAB_LOG_LEVEL', raising=False)


def test_unset_flags_are_none():
    args = create_parser().parse_args(['run', '--alg', 'kt', '--T', '32'])
    overrides = experiment_overrides(args)
    assert overrides['command'] == 'run'
    assert overrides['algorithm'] == 'kt'
    assert overrides['T'] == 32
    assert overrides['d'] is None
    assert overrides['bits'] is None
    assert overrides['output_path'] is None


def test_flag_names_map_to_fields():
    args = create_parser().parse_args([
        'sweep', '--m', '4', '--d-values', '1,2', '--bits', '--measure', '--max-grid-points', '99',
        '-o', 'table.csv', '--input', 'x.csv', '--radius-B', '3.5',
    ])
    overrides = experiment_overrides(args)
    assert overrides['labels_m'] == 4
    assert overrides['d_values'] == '1,2'
    assert overrides['bits'] is True
    assert overrides['measure'] is True
    assert overrides['max_grid_points'] == 99
    assert overrides['output_path'] == 'table.csv'
    assert overrides['input_path'] == 'x.csv'
    assert overrides['radius_B'] == 3.5


def test_no_command_prints_help(capsys):
    assert main([]) == 1
    assert 'regretlab' in capsys.readouterr().out


def test_run_command(tmp_path):
    output = tmp_path / 'trace.csv'
    code = main([
        '-q', 'run', '--alg', 'grid-mixture', '--norm', 'l1', '--B', '1', '--d', '1',
        '--T', '16', '--seed', '7', '-o', str(output),
    ])
    assert code == 0
    assert len(output.read_text().splitlines()) == 17
    assert (tmp_path / 'trace.summary.json').is_file()

    assert main(['-q', 'validate', str(output)]) == 0


def test_bounds_command(tmp_path):
    output = tmp_path / 'bounds.json'
    assert main(['-q', 'bounds', '--norm', 'linf', '--d', '2', '--B', '1', '--T', '100', '-o', str(output)]) == 0
    record = json.loads(output.read_text())
    assert record['upper_nats'] == pytest.approx(4.25810, abs=1e-5)


def test_sweep_command(tmp_path):
    output = tmp_path / 'sweep.csv'
    code = main([
        '-q', 'sweep', '--norm', 'l2', '--d-values', '1,2', '--T-values', '1,64',
        '--B-values', '1', '-o', str(output),
    ])
    assert code == 0
    lines = output.read_text().splitlines()
    assert len(lines) == 5
    assert sum('infeasible:' in line for line in lines) == 2


def test_error_record_on_stderr(tmp_path, capsys):
    output = tmp_path / 'capped.csv'
    code = main(['-q', 'run', '--d', '3', '--T', '16', '--max-grid-points', '10', '-o', str(output)])
    assert code == 1
    assert not output.exists()

    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record['status'] == 'error'
    assert record['error_type'] == 'GridSizeError'
    assert record['requested'] == 125
    assert record['cap'] == 10


def test_invalid_flags_are_reported(tmp_path, capsys):
    code = main(['-q', 'run', '--alg', 'kt', '--d', '2', '-o', str(tmp_path / 'kt.csv')])
    assert code == 1
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record['error_type'] == 'ConfigurationError'


def test_missing_config_file(tmp_path, capsys):
    code = main(['--config', str(tmp_path / 'absent.yaml'), 'bounds'])
    assert code == 1
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record['error_type'] == 'ConfigurationError'


def test_config_file_and_flags(tmp_path):
    config = tmp_path / 'config.yaml'
    config.write_text("experiment:\n  d: 2\n  T: 100\n  norm: linf\nlogging:\n  level: ERROR\n")
    output = tmp_path / 'bounds.json'
    assert main(['--config', str(config), 'bounds', '--B', '1', '-o', str(output)]) == 0
    record = json.loads(output.read_text())
    assert (record['d'], record['T'], record['norm']) == (2, 100, 'linf')


def test_validate_rejects_tampered_trace(tmp_path):
    trace = tmp_path / 'bad.csv'
    trace.write_text(
        "round,alg_loss_nats,comparator_loss_nats,cum_regret_nats\n"
        "1,0.7,0.5,0.2\n"
        "2,0.7,0.5,0.9\n"
    )
    assert main(['-q', 'validate', str(trace)]) == 1
    assert main(['-q', 'validate', str(tmp_path / 'absent.csv')]) == 1


def test_config_command_writes_merged_settings(tmp_path, monkeypatch):
    monkeypatch.setenv('REGRETLAB_THREADS', '3')
    config = tmp_path / 'config.yaml'
    config.write_text("experiment:\n  norm: l2\n  T: 256\ngrid:\n  max_points: 5000\n")

    merged = tmp_path / 'merged.yaml'
    assert main(['-q', '--config', str(config), 'config', '-o', str(merged)]) == 0
    data = yaml.safe_load(merged.read_text())
    assert data['experiment'] == {'norm': 'l2', 'T': 256}
    assert data['grid']['max_points'] == 5000
    assert data['execution']['threads'] == 3
    assert data['solver']['tol'] == 1e-8

    as_json = tmp_path / 'merged.json'
    assert main(['-q', '--config', str(merged), 'config', '-o', str(as_json)]) == 0
    assert json.loads(as_json.read_text()) == data


def test_invalid_config_settings_are_reported(tmp_path, capsys):
    config = tmp_path / 'config.yaml'
    config.write_text("execution:\n  threads: 0\n")
    assert main(['--config', str(config), 'bounds', '-o', str(tmp_path / 'b.json')]) == 1
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record['error_type'] == 'ConfigurationError'
    assert record['path'] == str(config)
    assert not (tmp_path / 'b.json').exists()
