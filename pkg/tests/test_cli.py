"""Test pylgs.cli and pylgs.run."""
import csv
import importlib.util
import math

import numpy as np
import pytest
import scipy.stats

import pylgs
from pylgs import cli

# Import test params.
conf = f"{__file__.replace('.py', '')}/params.py"
spec = importlib.util.spec_from_file_location(f"temp", f"{conf}")
conf_file = importlib.util.module_from_spec(spec)
spec.loader.exec_module(conf_file)
params = conf_file.params
currdir = conf_file.currdir
SMALL_BER = conf_file.SMALL_BER


def read_record(path):
    with open(path, 'r') as f:
        return dict(line.rstrip('\n').split('=', 1) for line in f)


@pytest.mark.parametrize("id_,argv,expected", params)
def test_exit_status(id_, argv, expected, tmp_path):
    out = tmp_path / 'out.txt'
    assert cli.main(argv + ['--out', str(out)]) == expected, f"test={id_}"
    assert out.exists() == (expected == 0), f"test={id_}"


@pytest.mark.parametrize("argv", [
    ['decode', '--seed', '11', '--set', 'moves=25', '--set', 'k=3'],
    ['sample', '--seed', '12', '--set', 'pickups=4', '--set',
     'basis=identity', '--set', 'sigma=1.0'],
    ['diagnose', '--seed', '13', '--set', 'k_grid=1,2', '--set',
     'tv_moves=4', '--set', 'replicas=50', '--set',
     f'basis={currdir}/triangular_basis.txt'],
    ['ber', '--seed', '14'] + SMALL_BER,
])
def test_repeat_identical(argv, tmp_path):
    outputs = []
    for name in ('a', 'b'):
        out = tmp_path / name
        assert cli.main(argv + ['--out', str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0]


def test_seed_changes_output(tmp_path):
    outputs = []
    for seed in ('1', '2'):
        out = tmp_path / seed
        cli.main(['decode', '--seed', seed, '--out', str(out)])
        outputs.append(read_record(out))
    assert outputs[0]['seed'] == '1' and outputs[1]['seed'] == '2'
    assert outputs[0]['planted'] != outputs[1]['planted']


def test_decode_record(tmp_path):
    out = tmp_path / 'decode.txt'
    assert cli.main(['decode', '--seed', '3', '--set', 'noise=0',
                     '--set', 'moves=4', '--out', str(out)]) == 0
    record = read_record(out)
    assert list(record)[:2] == ['seed', 'n']
    assert record['n'] == '4'
    assert float(record['distance']) == 0.0
    assert record['x_cvp'] == record['planted']
    assert record['planted_found'] == 'on'
    # 4 moves are below ln(1/eps).
    assert record['bdd_radius'] == 'nan'
    assert math.isclose(float(record['complexity']), math.log(100))


def test_config_file_and_flags(tmp_path):
    from_file = tmp_path / 'file.txt'
    from_sets = tmp_path / 'sets.txt'
    cli.main(['decode', '--config', f'{currdir}/decode.conf',
              '--seed', '6', '--out', str(from_file)])
    cli.main(['decode', '--seed', '6', '--set', 'moves=30', '--set', 'k=2',
              '--set', 'noise=0.2', '--out', str(from_sets)])
    assert read_record(from_file)['seed'] == '6'
    assert from_file.read_bytes() == from_sets.read_bytes()


def test_diagnose_one_dimension(tmp_path):
    out = tmp_path / 'diagnose.txt'
    assert cli.main(['diagnose', '--seed', '0', '--set', 'basis=identity',
                     '--set', 'n=1', '--set', 'center=0',
                     '--out', str(out)]) == 0
    record = read_record(out)
    assert abs(float(record['delta']) - 1.0) < 1e-9
    assert abs(float(record['tau1'])) < 1e-6
    assert 'delta_mtm[k=10]' in record


def test_sample_file(tmp_path):
    out = tmp_path / 'samples.txt'
    assert cli.main(['sample', '--seed', '7', '--set', 'pickups=6',
                     '--set', 'basis=identity', '--set', 'n=2',
                     '--set', 'sigma=1.5', '--out', str(out)]) == 0
    lines = out.read_text().splitlines()
    header = [line for line in lines if line.startswith('#')]
    assert [line.split('=')[0] for line in header] == \
        ['# sigma', '# delta', '# gap']
    rows = [line.split() for line in lines if not line.startswith('#')]
    assert len(rows) == 6
    for row in rows:
        x = [int(v) for v in row[:2]]
        assert len(row) == 3
        assert float(row[2]) >= 0
        assert isinstance(x[0], int)


def test_sample_distribution(tmp_path):
    # On Z every pickup is an exact draw from D_{Z, sigma, c}.
    out = tmp_path / 'samples.txt'
    assert cli.main(['sample', '--seed', '9', '--set', 'basis=identity',
                     '--set', 'n=1', '--set', 'sigma=1.0', '--set',
                     'center=0.3', '--set', 'pickups=400',
                     '--out', str(out)]) == 0
    draws = [int(line.split()[0]) for line in out.read_text().splitlines()
             if not line.startswith('#')]
    assert len(draws) == 400
    zg = pylgs.ZGaussian(1.0, 0.3)
    xs = [-1, 0, 1]
    observed = [sum(x <= -2 for x in draws)] + [draws.count(x) for x in xs]
    observed.append(len(draws) - sum(observed))
    inner = [pylgs.pmf_z(x, zg) for x in xs]
    low = sum(pylgs.pmf_z(x, zg) for x in range(-20, -1))
    probs = np.array([low] + inner + [1.0 - low - sum(inner)])
    _, pvalue = scipy.stats.chisquare(observed, probs * len(draws))
    assert pvalue > 0.001


def test_ber_csv(tmp_path):
    out = tmp_path / 'ber.csv'
    assert cli.main(['ber', '--seed', '8', '--set', 'detectors=ZF,MTMK',
                     '--set', 'ebn0_db=5,10'] + SMALL_BER
                    + ['--out', str(out)]) == 0
    with open(out, newline='') as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == pylgs.SimResult.header
    # ZF once, MTMK per (lll on/off, moves 5/10), per SNR.
    assert len(rows) == 1 + 2 * (1 + 2 * 2)
    mtmk = [r for r in rows[1:] if r[1] == 'MTMK']
    assert {r[2] for r in mtmk} == {'on', 'off'}
    assert {r[4] for r in mtmk} == {'2'}


def test_unused_key_warning(caplog, tmp_path):
    out = tmp_path / 'out.txt'
    assert cli.main(['decode', '--seed', '1', '--set', 'moves=5',
                     '--set', 'bogus=3', '--set', 'frames=2',
                     '--out', str(out)]) == 0
    warnings = [r.getMessage() for r in caplog.records
                if r.levelname == 'WARNING']
    assert any('Unused' in m and 'bogus' in m and 'frames' in m
               for m in warnings)


def test_verbose(caplog, tmp_path):
    out = tmp_path / 'out.txt'
    try:
        with caplog.at_level('DEBUG', logger='pylgs'):
            assert cli.main(['decode', '--seed', '1', '--set', 'moves=5',
                             '--verbose', '--out', str(out)]) == 0
    finally:
        pylgs.default.logger.setLevel('INFO')
    assert any(r.levelname == 'DEBUG' for r in caplog.records)


def test_cmd_functions(tmp_path):
    out = str(tmp_path / 'decode.txt')
    assert cli.cmd_decode(overrides={'seed': 2, 'moves': 5,
                                     'out': out}) == out
    with pytest.raises(pylgs.ConfigError):
        cli.cmd_decode(overrides={'moves': 5, 'out': out})


def test_run_objects(tmp_path):
    objects = {}
    out = str(tmp_path / 'decode.txt')
    obj = pylgs.run('decode', overrides={'seed': 3, 'moves': 5, 'out': out},
                    objects=objects, oid='test')
    assert objects['decode__test'] is obj
    assert 'logger__default' in objects
    assert obj['out'] == out
    assert isinstance(obj['result'], pylgs.DecodeResult)
    with pytest.raises(pylgs.ConfigError):
        pylgs.run('encode', overrides={'seed': 3})


def test_read_substitution():
    handler = pylgs.Handler({}, 'test')
    config = handler.read('decode', overrides={'seed': '9', 'moves': '7',
                                               'lll': 'off'})
    assert config.oid == 'decode__test'
    steps = dict(config.steps)
    assert steps['build_instance']['seed'] == 9
    assert steps['decode']['moves'] == 7
    assert steps['decode']['lll'] is False
    assert steps['dump_record'] == {'out': 'decode.txt'}
    ber = handler.read('ber', overrides={'seed': 1, 'lll': 'both',
                                         'moves': '5,10'})
    assert dict(ber.steps)['configure']['lll'] == (False, True)
    assert dict(ber.steps)['configure']['moves'] == (5, 10)
    assert dict(ber.steps)['configure']['detectors'] is None
