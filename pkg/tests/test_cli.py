import json
from pathlib import Path

import numpy as np
import pytest

import cli
from cli import main, run
from formats import read_burst, read_points

CONFIGS = Path(__file__).resolve().parents[1] / 'configs'


def small_config(tmp_path, **kmeans):
    config = {
        'seed': 42,
        'scenario': {
            'n_pulses': 16,
            'classes': [
                {'name': 'A', 'p0': 1.0, 'mu': [0.1], 'n_cells': 30},
                {'name': 'B', 'p0': 1.0, 'mu': [0.9], 'n_cells': 30, 'texture_shape': 4.0},
            ],
        },
        'burg': {'order': 2, 'gamma': 0.0},
        'kmeans': {'k': 2, 'restarts': 2, **kmeans},
        'io': {'output_dir': str(tmp_path / 'unused')},
    }
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(config), encoding='utf-8')
    return path


def load(path):
    return json.loads(Path(path).read_text(encoding='utf-8'))


class TestPipeline:
    def test_artifacts_and_report(self, tmp_path):
        out = tmp_path / 'run'
        code, report = run(['pipeline', '--config', str(small_config(tmp_path)), '--output', str(out), '--quiet'])
        assert code == 0 and report['success']
        for name in ('burst.csv', 'truth.json', 'points.jsonl', 'model.json', 'median_spectrum.csv',
                     'run_report.json'):
            assert (out / name).exists()
        saved = load(out / 'run_report.json')
        assert set(saved['timings']) == {'simulate', 'estimate', 'cluster', 'evaluate', 'spectrum'}
        assert len(saved['labels']) == 60
        assert saved['config']['kmeans']['seed'] == report['config']['kmeans']['seed']
        assert read_burst(out / 'burst.csv').samples.shape == (16, 60)
        assert len(read_points(out / 'points.jsonl')) == 60
        assert saved['eval']['f1'] >= 0.9

    def test_rerun_is_identical(self, tmp_path):
        config = str(small_config(tmp_path))
        reports = []
        for _ in range(2):
            assert main(['pipeline', '--config', config, '--output', str(tmp_path / 'run'), '--quiet']) == 0
            report = load(tmp_path / 'run' / 'run_report.json')
            report.pop('timings')
            reports.append(report)
        assert reports[0] == reports[1]

    def test_seed_override(self, tmp_path):
        code, report = run(['pipeline', '--config', str(small_config(tmp_path)), '--seed', '7',
                            '--output', str(tmp_path / 'run'), '--quiet'])
        assert code == 0
        assert report['config']['seed'] == 7

    def test_failure_leaves_no_artifacts(self, tmp_path):
        out = tmp_path / 'run'
        code, report = run(['pipeline', '--config', str(small_config(tmp_path, k=100)), '--output', str(out),
                            '--quiet'])
        assert code == 4
        assert report == {'success': False, 'stage': 'cluster', 'category': 'numeric', 'error': report['error']}
        assert not out.exists()

    def test_failed_write_leaves_no_artifacts(self, tmp_path, monkeypatch):
        config = str(small_config(tmp_path))
        out = tmp_path / 'run'
        assert main(['pipeline', '--config', config, '--output', str(out), '--quiet']) == 0
        before = {p.name: p.read_bytes() for p in out.iterdir()}
        save = cli.safe_json_save
        monkeypatch.setattr(cli, 'safe_json_save',
                            lambda data, path: Path(path).name != 'run_report.json' and save(data, path))

        code, report = run(['pipeline', '--config', config, '--seed', '7', '--output', str(out), '--quiet'])
        assert code == 3 and report['category'] == 'file'
        assert {p.name: p.read_bytes() for p in out.iterdir()} == before
        assert sorted(p.name for p in tmp_path.iterdir()) == ['config.json', 'run']

        code, _ = run(['pipeline', '--config', config, '--output', str(tmp_path / 'fresh'), '--quiet'])
        assert code == 3
        assert not (tmp_path / 'fresh').exists()

    @pytest.mark.slow
    def test_two_class_acceptance(self, tmp_path):
        code, report = run(['pipeline', '--config', str(CONFIGS / 'two_class_sirv.json'),
                            '--output', str(tmp_path / 'run'), '--quiet'])
        assert code == 0
        assert report['eval']['f1'] >= 0.95
        assert [d for d in report['diagnostics'] if d['event'] == 'no_convergence' and 'cluster' in d] == []


class TestStages:
    def test_simulate_estimate_cluster_evaluate(self, tmp_path):
        config = str(small_config(tmp_path))
        out = tmp_path / 'stages'
        assert main(['simulate', '--config', config, '--output', str(out), '--quiet']) == 0
        assert main(['estimate', '--input', str(out / 'burst.csv'), '--output', str(out / 'points.jsonl'),
                     '--order', '3', '--gamma', '0.01', '--quiet']) == 0
        assert all(p.order == 3 for p in read_points(out / 'points.jsonl'))
        assert main(['cluster', '--config', config, '--input', str(out / 'points.jsonl'),
                     '--output', str(out / 'model.json'), '--quiet']) == 0
        code, report = run(['evaluate', '--input', str(out / 'model.json'), '--truth', str(out / 'truth.json'),
                            '--output', str(out / 'eval.json'), '--quiet'])
        assert code == 0
        assert load(out / 'eval.json')['f1'] == report['eval']['f1']

    def test_standalone_cluster_matches_config_seed(self, tmp_path):
        config = str(small_config(tmp_path))
        out = tmp_path / 'stages'
        main(['simulate', '--config', config, '--output', str(out), '--quiet'])
        main(['estimate', '--input', str(out / 'burst.csv'), '--output', str(out / 'points.jsonl'), '--quiet'])
        main(['cluster', '--config', config, '--input', str(out / 'points.jsonl'),
              '--output', str(out / 'a.json'), '--quiet'])
        main(['cluster', '--seed', '42', '--k', '2', '--restarts', '2', '--input', str(out / 'points.jsonl'),
              '--output', str(out / 'b.json'), '--quiet'])
        assert load(out / 'a.json')['labels'] == load(out / 'b.json')['labels']

    def test_single_cell_estimate(self, tmp_path):
        burst = tmp_path / 'burst.csv'
        burst.write_text("# pulses=2\n1.0,0.0,0.0,1.0\n", encoding='utf-8')
        code, report = run(['estimate', '--input', str(burst), '--output', str(tmp_path / 'p.jsonl'), '--quiet'])
        assert code == 0 and report['n_points'] == 1
        assert len((tmp_path / 'p.jsonl').read_text(encoding='utf-8').splitlines()) == 1

    def test_spectrum_peak(self, tmp_path):
        points = tmp_path / 'points.jsonl'
        points.write_text(json.dumps({'log_p0': 0.0, 'mu': [[-0.9, 0.0]], 'n_pulses': 2}) + "\n", encoding='utf-8')
        code, report = run(['spectrum', '--input', str(points), '--output', str(tmp_path / 's.csv'),
                            '--n-freq', '64', '--quiet'])
        assert code == 0
        assert report['peak_frequency'] == pytest.approx(0.0)
        assert len((tmp_path / 's.csv').read_text(encoding='utf-8').splitlines()) == 65

    def test_siegel(self, tmp_path):
        zeros = [[[0.0, 0.0]] * 2] * 2
        params = [
            {'R0': [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]], 'A': [zeros, zeros]},
            {'R0': [[[np.e, 0.0], [0.0, 0.0]], [[0.0, 0.0], [np.e, 0.0]]], 'A': [zeros, zeros]},
        ]
        source = tmp_path / 'params.json'
        source.write_text(json.dumps(params), encoding='utf-8')
        assert main(['siegel', '--input', str(source), '--output', str(tmp_path / 'd.json'), '--quiet']) == 0
        result = load(tmp_path / 'd.json')
        assert result['distances'][0][1] == pytest.approx(np.sqrt(6))
        assert result['entropy'][0] == pytest.approx(-6 * (1 + np.log(np.pi)))


class TestExitCodes:
    def test_config_error(self, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text(json.dumps({'seed': 1, 'scenario': {}, 'kmeans': {'k': 2}, 'extra': 1}), encoding='utf-8')
        code, report = run(['pipeline', '--config', str(path), '--quiet'])
        assert code == 2 and report['category'] == 'config'
        assert main(['cluster', '--input', 'p.jsonl', '--output', 'm.json', '--quiet']) == 2

    def test_missing_file(self, tmp_path):
        code, report = run(['estimate', '--input', str(tmp_path / 'none.csv'), '--output', str(tmp_path / 'p'),
                            '--quiet'])
        assert code == 3
        assert report['stage'] == 'read'

    def test_numeric_failure(self, tmp_path):
        burst = tmp_path / 'burst.csv'
        burst.write_text("# pulses=2\n0,0,0,0\n", encoding='utf-8')
        code, report = run(['estimate', '--input', str(burst), '--output', str(tmp_path / 'p.jsonl'), '--quiet'])
        assert code == 4
        assert report['stage'] == 'estimate'
        assert not (tmp_path / 'p.jsonl').exists()

    def test_order_too_large_is_config_error(self, tmp_path):
        burst = tmp_path / 'burst.csv'
        burst.write_text("# pulses=2\n1.0,0.0,0.0,1.0\n", encoding='utf-8')
        code, report = run(['estimate', '--input', str(burst), '--output', str(tmp_path / 'p.jsonl'),
                            '--order', '2', '--quiet'])
        assert code == 2 and report['category'] == 'config'
        assert 'burg.order' in report['error']
        assert not (tmp_path / 'p.jsonl').exists()
