import pandas as pd
import yaml
from click.testing import CliRunner

from pyslicemon.cli import cli
from pyslicemon.core.workload import saveWorkload
from pyslicemon.experiments import micro


def writeSpec(tmp_path, slices):
    workload = tmp_path / 'workload.yaml'
    saveWorkload(slices, str(workload))
    spec = {
        'Scenario': 'cli',
        'Workload': str(workload),
        'Seeds': [5],
        'Duration': 1.0,
        'Simulation': {'Epoch': 0.5, 'BetaSteps': 200, 'CandidateCount': 4},
        'Schemes': [{'Name': 'static-agnostic', 'Sweep': {'Delta': [1, 10]}}],
    }
    path = tmp_path / 'spec.yaml'
    with open(path, 'w') as f:
        yaml.safe_dump(spec, f)
    return str(path)


def test_run_then_frontier(tmp_path, slices):
    runner = CliRunner()
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['run', '--spec', writeSpec(tmp_path, slices), '--output', str(out), '--workers', '1'])
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(out / 'results_cli.csv')) == 2

    frontierPath = tmp_path / 'frontier.csv'
    result = runner.invoke(cli, ['frontier', '--results', str(out / 'results_*.csv'), '--output', str(frontierPath)])
    assert result.exit_code == 0, result.output
    assert 'frontier points written' in result.output
    frontier = pd.read_csv(frontierPath)
    assert set(frontier['scheme']) == {'static-agnostic'}


def test_invalid_spec_is_a_usage_error(tmp_path):
    path = tmp_path / 'bad.yaml'
    path.write_text('Scenario: x\nSeeds: [1]\nDuration: 1\nSchemes: [magic]\n')
    result = CliRunner().invoke(cli, ['run', '--spec', str(path)])
    assert result.exit_code == 2
    assert 'Schemes.magic' in result.output


def test_workers_must_be_positive(tmp_path, slices):
    result = CliRunner().invoke(cli, ['run', '--spec', writeSpec(tmp_path, slices), '--workers', '0'])
    assert result.exit_code == 2


def test_micro_buckets(tmp_path, monkeypatch):
    def quick(seed=1):
        return pd.DataFrame([micro.bucketBenchmark(2, 4096, packets=3000, warmup=1000, seed=seed)])

    monkeypatch.setattr(micro, 'bucketSweep', quick)
    result = CliRunner().invoke(cli, ['micro', '--kind', 'buckets', '--output', str(tmp_path), '--seed', '4'])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / 'micro_buckets.csv')
    assert frame[['d', 'w']].values.tolist() == [[2, 4096]]


def test_micro_rejects_unknown_kind(tmp_path):
    result = CliRunner().invoke(cli, ['micro', '--kind', 'nope', '--output', str(tmp_path)])
    assert result.exit_code == 2
