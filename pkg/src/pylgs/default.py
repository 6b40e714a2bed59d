"""The module contains default configuration and the field schema."""

import collections
import logging
import sys

from .commands import BerProducer, DecodeProducer, DiagnoseProducer, \
    SampleProducer
from .mimo import DETECTORS
from .producer import Producer

__all__ = ['CNFG', 'FIELDS', 'Field']

logger = logging.getLogger('pylgs')
logger.addHandler(logging.StreamHandler(stream=sys.stdout))
logger.setLevel('INFO')


Field = collections.namedtuple('Field', ['parse', 'doc'])


def _split(value):
    if isinstance(value, str):
        return [v.strip() for v in value.split(',') if v.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _int(low=None):
    def parse(value):
        value = int(value)
        if low is not None and value < low:
            raise ValueError(f"should be >= {low}")
        return value
    return parse


def _float(low=None, high=None, closed=False):
    def parse(value):
        value = float(value)
        if low is not None and not (value > low or closed and value == low):
            raise ValueError(f"should be > {low}")
        if high is not None and not value < high:
            raise ValueError(f"should be < {high}")
        return value
    return parse


def _list(item):
    def parse(value):
        items = [item(v) for v in _split(value)]
        if not items:
            raise ValueError("should not be empty")
        return tuple(items)
    return parse


def _choice(*options):
    def parse(value):
        value = str(value).strip()
        if value not in options:
            raise ValueError(f"should be one of {options}")
        return value
    return parse


def _sigma(value):
    if str(value).strip() in ('default', 'klein'):
        return str(value).strip()
    return _float(0)(value)


def _center(value):
    if str(value).strip() == 'planted':
        return 'planted'
    return _list(float)(value)


def _lll(value):
    value = {True: 'on', False: 'off'}.get(value, value)
    return {'on': (True,), 'off': (False,),
            'both': (False, True)}[_choice('on', 'off', 'both')(value)]


def _kappa(value):
    value = float(value)
    if not 0.25 <= value <= 1:
        raise ValueError("should be in [1/4, 1]")
    return value


def _detectors(value):
    if value == 'auto':
        return None
    names = tuple(_split(value))
    unknown = set(names) - set(DETECTORS)
    if unknown or not names:
        raise ValueError(f"should be from {DETECTORS}")
    return names


FIELDS = {
    'seed': Field(_int(0), "Master seed, mandatory."),
    'out': Field(str, "Output file path."),
    'basis': Field(str, "'random', 'identity' or path to a basis file."),
    'n': Field(_int(1), "Dimension of generated bases."),
    'entry_range': Field(_int(1), "Random basis entries in [-r, r]."),
    'center': Field(_center, "'planted' or comma separated floats."),
    'noise': Field(_float(0, closed=True), "Planted noise norm."),
    'sigma': Field(_sigma, "'default', 'klein' or positive float."),
    'moves': Field(_list(_int(1)), "Markov moves (list for ber)."),
    'k': Field(_int(1), "MTMK trials per move, 1 means MHK."),
    'eps': Field(_float(0, 1), "Mixing accuracy in (0, 1)."),
    'lll': Field(_lll, "'on', 'off' ('both' for ber)."),
    'kappa': Field(_kappa, "LLL parameter in [1/4, 1]."),
    'shards': Field(_int(1), "Independent decoding chains."),
    'method': Field(_choice('auto', 'gibbs'), "'auto' or 'gibbs'."),
    'pickups': Field(_int(1), "Samples to keep."),
    'mass': Field(_float(0, 1), "Truncation mass in (0, 1)."),
    'k_grid': Field(_list(_int(1)), "Trial counts of the report."),
    'tv_moves': Field(_int(1), "Length of TV traces."),
    'replicas': Field(_int(0), "Replicate chains, 0 disables simulation."),
    'n_antennas': Field(_int(1), "Complex MIMO dimension."),
    'qam': Field(_int(4), "QAM order, a power of 4."),
    'ebn0_db': Field(_list(float), "Eb/N0 grid in dB."),
    'frames': Field(_int(1), "Frames per SNR."),
    'detectors': Field(_detectors, f"'auto' or subset of"
                                    f" {','.join(DETECTORS)}."),
    'gibbs_sigma': Field(_sigma, "Gibbs detector sigma policy."),
}
"""dict: Parameter schema {'key': Field(parse, doc)}."""


CNFG = {
    'global': {
        'seed': None,
        'basis': 'random',
        'n': 4,
        'entry_range': 5,
        'center': 'planted',
        'noise': 0.3,
        'sigma': 'default',
        'moves': '50',
        'k': 1,
        'eps': 0.01,
        'lll': 'on',
        'kappa': 0.75,
        'shards': 1,
        'method': 'auto',
    },
    'logger': {
        'default': {
            'init': logger,
            'producer': Producer,
            'global': {},
            'steps': [],
        },
    },
    'sample': {
        'default': {
            'init': dict,
            'producer': SampleProducer,
            'global': {
                'out': 'samples.txt',
                'pickups': 100,
                'lll': 'off',
            },
            'steps': [
                ('build_instance', {}),
                ('sample', {}),
                ('dump_samples', {}),
            ],
        },
    },
    'decode': {
        'default': {
            'init': dict,
            'producer': DecodeProducer,
            'global': {
                'out': 'decode.txt',
            },
            'steps': [
                ('build_instance', {}),
                ('decode', {}),
                ('dump_record', {}),
            ],
        },
    },
    'diagnose': {
        'default': {
            'init': dict,
            'producer': DiagnoseProducer,
            'global': {
                'out': 'diagnose.txt',
                'n': 2,
                'lll': 'off',
                'mass': 1 - 1e-9,
                'k_grid': '1,2,5,10',
                'tv_moves': 15,
                'replicas': 0,
            },
            'steps': [
                ('build_instance', {}),
                ('diagnose', {}),
                ('dump_record', {}),
            ],
        },
    },
    'ber': {
        'default': {
            'init': dict,
            'producer': BerProducer,
            'global': {
                'out': 'ber.csv',
                'n_antennas': 4,
                'qam': 16,
                'ebn0_db': '15',
                'frames': 100,
                'moves': '20',
                'k': 10,
                'lll': 'both',
                'detectors': 'auto',
                'gibbs_sigma': 'default',
            },
            'steps': [
                ('configure', {}),
                ('simulate', {}),
                ('dump_csv', {}),
            ],
        },
    },
}
"""dict: Default configuration.

Level-0 ``global`` holds common parameters, each subcommand section holds a
single ``default`` configuration with its producer, steps and section-level
``global``. The ``logger`` section provides the ``logger__default`` object.
"""


if __name__ == '__main__':
    pass
