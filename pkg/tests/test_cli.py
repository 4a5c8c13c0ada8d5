import json
import logging
import math

import pandas as pd
import pytest

from main import run
from systems.SystemFamilies import random_lti


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def wide_system_file(tmp_path, rng):
    path = tmp_path / 'wide.json'
    random_lti(2, 4, 2, rng).to_json(path)
    return path


def last_stderr_line(capsys):
    return capsys.readouterr().err.strip().splitlines()[-1]


class TestAnalyze:
    def test_rank3_input_is_dynamic_unidentifiable(self, system_file, capsys):
        code = run(['analyze', '--system', str(system_file), '--random-input', '--rank-input', '3',
                    '--horizon', '50', '--seed', '7'])
        report = json.loads(capsys.readouterr().out)
        assert code == 0
        assert report['dynamic_identifiable'] is False
        assert report['param_identifiable'] is False
        assert report['theorem1_hypothesis_ok'] is True
        assert len(report['witness']) == 48

    def test_needs_an_input(self, system_file):
        assert run(['analyze', '--system', str(system_file)]) == 2

    def test_export_bundle(self, tmp_path, system_file):
        target = tmp_path / 'bundle'
        code = run(['analyze', '--system', str(system_file), '--random-input', '--horizon', '10', '--no-rank-check',
                    '--export-bundle', str(target), '--output', str(tmp_path / 'report.json')])
        assert code == 0
        assert (target / 'W.csv').exists()
        assert json.loads((tmp_path / 'report.json').read_text())['theorem1_hypothesis_ok'] is None


class TestDesign:
    def test_byte_identical(self, tmp_path, wide_system_file):
        outputs = []
        for name in ('a.json', 'b.json'):
            code = run(['design', '--system', str(wide_system_file), '--q', '1', '--r', '1', '--seed', '7',
                        '--force-pod', '--output', str(tmp_path / name)])
            assert code == 0
            outputs.append((tmp_path / name).read_bytes())
        assert outputs[0] == outputs[1]
        controller = json.loads(outputs[0])
        assert controller['r'] == 2 and controller['design_cost'] >= controller['lqr_cost'] * (1 - 1e-9)

    def test_missing_system(self, capsys):
        assert run(['design', '--json-errors']) == 2
        assert json.loads(last_stderr_line(capsys))['error'] == 'ConfigError'

    def test_malformed_system(self, tmp_path, capsys):
        path = tmp_path / 'broken.json'
        path.write_text('{"A": ')
        assert run(['design', '--system', str(path), '--json-errors']) == 1
        error = json.loads(last_stderr_line(capsys))
        assert error['error'] == 'ParseError' and 'detail' in error


class TestLqr:
    def test_infinite(self, wide_system_file, capsys):
        assert run(['lqr', '--system', str(wide_system_file)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload['mode'] == 'lqr' and payload['rank'] <= 2
        assert payload['closed_loop_radius'] < 1.0

    def test_finite(self, wide_system_file, capsys):
        assert run(['lqr', '--system', str(wide_system_file), '--finite-horizon', '5', '--q-terminal', '2']) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload['mode'] == 'finite_lqr' and len(payload['gains']) == 5


class TestSimulateAndAttack:
    def test_open_loop_round_trip(self, tmp_path, system_file, capsys):
        traj_path = tmp_path / 'traj.csv'
        assert run(['simulate', '--system', str(system_file), '--steps', '1000', '--seed', '3',
                    '--output', str(traj_path)]) == 0
        assert len(pd.read_csv(traj_path)) == 1000

        capsys.readouterr()
        assert run(['attack', '--trajectory', str(traj_path), '--method', 'markov', '--train', '950',
                    '--test', '50']) == 0
        result = json.loads(capsys.readouterr().out)
        assert math.isfinite(result['pred_error'])
        assert result['method'] == 'markov_ls'

    def test_closed_loop_with_designed_controller(self, tmp_path, wide_system_file):
        controller = tmp_path / 'controller.json'
        traj_path = tmp_path / 'traj.csv'
        assert run(['design', '--system', str(wide_system_file), '--output', str(controller)]) == 0
        assert run(['simulate', '--system', str(wide_system_file), '--controller', str(controller),
                    '--steps', '60', '--dither', '1.0', '--output', str(traj_path)]) == 0
        assert run(['analyze', '--system', str(wide_system_file), '--trajectory', str(traj_path),
                    '--horizon', '50', '--output', str(tmp_path / 'report.json')]) == 0
        report = json.loads((tmp_path / 'report.json').read_text())
        assert report['dynamic_identifiable'] is False

    def test_closed_loop_without_excitation_warns(self, tmp_path, wide_system_file, capsys):
        controller = tmp_path / 'controller.json'
        traj_path = tmp_path / 'traj.csv'
        assert run(['design', '--system', str(wide_system_file), '--output', str(controller)]) == 0
        capsys.readouterr()
        assert run(['simulate', '--system', str(wide_system_file), '--controller', str(controller),
                    '--steps', '20', '--output', str(traj_path)]) == 0
        warnings = [json.loads(line) for line in capsys.readouterr().err.strip().splitlines()]
        assert any(entry['levelname'] == 'WARNING' and 'identically zero' in entry['message']
                   for entry in warnings)
        assert (pd.read_csv(traj_path).drop(columns='t').to_numpy() == 0.0).all()

    def test_unwritable_output(self, tmp_path, wide_system_file, capsys):
        target = tmp_path / 'missing' / 'out.json'
        assert run(['lqr', '--system', str(wide_system_file), '--output', str(target), '--json-errors']) == 1
        assert json.loads(last_stderr_line(capsys))['error'] == 'FileError'

    def test_graddesc_needs_system(self, tmp_path, system_file):
        traj_path = tmp_path / 'traj.csv'
        run(['simulate', '--system', str(system_file), '--steps', '20', '--output', str(traj_path)])
        assert run(['attack', '--trajectory', str(traj_path), '--method', 'graddesc']) == 2


class TestMonteCarlo:
    def test_csv(self, capsys):
        code = run(['montecarlo', '--method', 'markov', '--runs', '2', '--sizes', '10,20', '--dims', '2,2,2',
                    '--lags', '5', '--test', '10', '--seed', '1'])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == 'sample_size,metric,mean,std,runs'
        assert len(lines) == 1 + 2 * 2

    def test_rank_sweep(self, capsys):
        code = run(['montecarlo', '--method', 'markov', '--runs', '2', '--sizes', '30', '--dims', '2,3,2',
                    '--lags', '5', '--test', '10', '--ranks', '1,3'])
        assert code == 0
        assert capsys.readouterr().out.splitlines()[0].startswith('rank,')


class TestUsage:
    def test_unknown_command(self):
        assert run(['fit']) == 2

    def test_bad_flag_value(self):
        assert run(['montecarlo', '--dims', '4,4']) == 2

    def test_selftest(self, capsys):
        assert run(['selftest', '--seed', '0']) == 0
        out = capsys.readouterr().out
        assert 'FAIL' not in out and out.strip().endswith('passed')
