import json

import pytest

from dyadicwalsh.cli import ExperimentConfig, main, run


def test_config_defaults(monkeypatch):
    monkeypatch.delenv('DYADICWALSH_SEED', raising=False)
    monkeypatch.delenv('DYADICWALSH_FORMAT', raising=False)
    config = ExperimentConfig()
    assert config.dimension == 2
    assert config.depth == 6
    assert config.stage == 2
    assert config.seed == 0
    assert config.format == 'csv'
    assert 'out' not in config.to_json()


def test_config_from_environment(monkeypatch):
    monkeypatch.setenv('DYADICWALSH_SEED', '7')
    monkeypatch.setenv('DYADICWALSH_FORMAT', 'json')
    config = ExperimentConfig(mode='sets')
    assert config.seed == 7
    assert config.format == 'json'
    assert ExperimentConfig(seed=3, format='csv').seed == 3


@pytest.mark.parametrize('kwargs', [
    {'dimension': 1},
    {'mode': 'plot'},
    {'format': 'xml'},
    {'depth': 4},
    {'stage': 3},
    {'stages': 0},
    {'points': 0},
    {'seed': 'abc'},
])
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_dimension_one_needs_flag():
    config = ExperimentConfig(dimension=1, allow_d1=True, stages=1)
    assert config.dimension == 1
    assert main(['--dimension', '1']) == 2


def test_sets_mode(tmp_path):
    out = tmp_path / 'sets.csv'
    assert main(['--mode', 'sets', '--format', 'csv', '--out', str(out)]) == 0
    lines = out.read_text().split('\n')
    assert lines[0] == 'kind,rank,m1,m2,value'
    assert lines[-1] == ''
    rows = lines[1:-1]
    assert len(rows) == 257
    assert all(r.startswith('cube,5,') for r in rows[:-1])
    assert rows[-1] == 'measure,5,,,1/4'


def test_coeffs_mode(tmp_path):
    out = tmp_path / 'coeffs.csv'
    assert main(['--mode', 'coeffs', '--out', str(out), '--format', 'csv']) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ('n1,n2,closed_mantissa,closed_exp,brute_mantissa,brute_exp,equal,'
                        'closed_decimal')
    assert len(lines) == 257
    assert all(line.split(',')[6] == '1' for line in lines[1:])
    assert lines[1] == '16,16,1,-3,1,-3,1,0.125'


def test_sums_mode_is_deterministic(tmp_path):
    paths = [tmp_path / 'a.json', tmp_path / 'b.json']
    for path in paths:
        assert main(['--mode', 'sums', '--format', 'json', '--points', '2', '--seed', '5',
                     '--out', str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    payload = json.loads(paths[0].read_text())
    assert payload['config']['seed'] == 5
    assert 'out' not in payload['config']
    assert {r['mode'] for r in payload['records']} >= {'rectangular', 'cubic', 'lambda(2)'}


def test_uset_mode(tmp_path):
    out = tmp_path / 'uset.json'
    assert main(['--mode', 'uset', '--format', 'json', '--out', str(out)]) == 0
    records = json.loads(out.read_text())['records']
    assert {r['construction'] for r in records} == {'symmetric', 'mset'}
    assert {r['index'] for r in records if r['construction'] == 'symmetric'} == {'2;2', '44;44'}


def test_perm_file(tmp_path, perm_entries):
    perm = tmp_path / 'perm.json'
    perm.write_text(json.dumps(perm_entries()))
    out = tmp_path / 'coeffs.csv'
    assert main(['--mode', 'coeffs', '--perm-file', str(perm), '--out', str(out),
                 '--format', 'csv']) == 0
    missing = ExperimentConfig(mode='sets', perm_file=str(tmp_path / 'missing.json'))
    assert run(missing) == 2
    perm.write_text(json.dumps([{'stage': 2, 'coordinate': 1, 'perm': [0, 0, 1, 2]}]))
    assert main(['--mode', 'sets', '--perm-file', str(perm)]) == 2


def test_verify_mode(tmp_path):
    out = tmp_path / 'verify.csv'
    assert main(['--mode', 'verify', '--out', str(out), '--format', 'csv', '--points', '2']) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == 'suite,check,status,failure_count'
    assert not any(',failed,' in line for line in lines)
