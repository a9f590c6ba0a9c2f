"""
Tests for the command-line entry point: reports, exit codes and determinism.
"""
import json

import pytest

from stator_lab import cli


def run_cli(tmp_path, *argv, name="report.json"):
    out = tmp_path / name
    code = cli.main([*argv, '--out', str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


def test_rotate2_report(tmp_path):
    code, report = run_cli(tmp_path, 'rotate2', '--alpha', '1.57', '--axis', 'z', '--seed', '7')
    assert code == 0
    assert report["pass"] is True
    assert report["fidelity"] >= 1 - 1e-9
    assert report["causal"] is True
    assert report["ledger"]["to_alice"] == 1
    assert report["ledger"]["from_alice"] == 1


def test_scenario_flag_matches_positional(tmp_path):
    _, positional = run_cli(tmp_path, 'cnot', '--seed', '3', name="a.json")
    _, flagged = run_cli(tmp_path, '--scenario', 'cnot', '--seed', '3', name="b.json")
    assert positional == flagged


def test_count_ops_report(tmp_path):
    code, report = run_cli(tmp_path, 'count-ops', '--n', '3', '--parties', '2')
    assert code == 0
    assert report["operator_family"]["independent"] == 8
    assert report["d_level"]["independent"] == 8
    assert report["d_level_equal"] is True


def test_stats_report(tmp_path):
    code, report = run_cli(tmp_path, 'stats', '--scenario', 'rotate2', '--alpha', '0.4',
                           '--trials', '10000', '--seed', '1')
    assert code == 0
    assert report["target"] == 'rotate2'
    assert set(report["chi_square"]) == {'to_alice/party1/arity2', 'from_alice/party1/arity2'}
    assert sum(report["chi_square"]["to_alice/party1/arity2"]["counts"]) == 10000
    assert report["pass"] is True


def test_stats_on_measurement_tallies_signs(tmp_path):
    code, report = run_cli(tmp_path, 'stats', '--scenario', 'measure', '--trials', '2000', '--seed', '5')
    assert code == 0
    assert report["outcomes"]["+1"] == 2000
    assert report["coupling_sign"]["pass"] is True


def test_same_seed_same_bytes(tmp_path):
    argv = ('multi', '--parties', '2', '--alpha', '0.3', '0.5', '0.9', '--axis', 'x', '--seed', '11')
    run_cli(tmp_path, *argv, name="a.json")
    run_cli(tmp_path, *argv, name="b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_force_branch_is_recorded(tmp_path):
    code, report = run_cli(tmp_path, 'rotate2', '--alpha', '0.9', '--force-branch', '1', '1')
    assert code == 0
    assert [b["outcome"] for b in report["branches"]] == [1, 1]


def test_state_from_file(tmp_path):
    state = tmp_path / "state.json"
    state.write_text(json.dumps([[0.6, 0.0], [0.0, 0.8]]))
    code, report = run_cli(tmp_path, 'rotate2', '--alpha', '0.2', '--axis', 'y', '--state', str(state))
    assert code == 0
    assert report["fidelity"] >= 1 - 1e-9


def test_report_on_stdout(capsys):
    assert cli.main(['identity']) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["scenario"] == 'identity'
    assert "PASS" in captured.err


@pytest.mark.parametrize("argv", [
    ['rotate2', '--axis', '2,0,0'],
    ['rotate2', '--axis', '1,0'],
    ['rotaten', '--n', '3', '--angles', '0.1', '0.2', '0.3'],
    ['measure', '--spectrum', '0', '1'],
    ['--scenario', 'teleport'],
    ['count-ops', '--n', '2', '--parties', '9'],
    ['stats', '--trials', '0'],
    ['rotate2', '--state', '[1, 0, 0]'],
    ['rotate2', '--state', 'not json'],
    ['rotate2', '--alpha', '0.3', '--force-branch', '5'],
    ['rotaten', '--n', '3', '--force-branch', '0', '-1'],
    ['measure', '--force-branch', '0', '1'],
    ['stats', '--trials', '10', '--force-branch', '0'],
    [],
])
def test_config_errors_exit_2(capsys, argv):
    assert cli.main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_log_level_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(cli.LOG_LEVEL_ENV, 'debug')
    code, _ = run_cli(tmp_path, 'identity')
    assert code == 0


@pytest.mark.parametrize("argv", [
    ['rotate2', '--alpha', '0.3', '--force-branch', '5'],
    ['measure', '--force-branch', '0', '1'],
])
def test_bad_forced_branch_names_the_option(capsys, argv):
    assert cli.main(argv) == 2
    assert "--force-branch" in capsys.readouterr().err
