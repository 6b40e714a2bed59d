"""
The :mod:`pylgs.cli` is the command line entry point.

.. code-block:: none

    pylgs {sample,decode,diagnose,ber} [--config PATH] [--seed N]
          [--out PATH] [--set KEY=VALUE ...] [--verbose]

Exit status: 0 on success, 1 on invalid configuration or I/O failure,
2 on numerical failure (singular basis, enumeration capacity, eigen
iteration).

"""


import argparse
import logging
import sys

from .handler import ConfigError
from .lattice import LatticeError
from .utils import run

__all__ = ['main', 'build_parser', 'cmd_sample', 'cmd_decode',
           'cmd_diagnose', 'cmd_ber']

SUBCOMMANDS = {
    'sample': "Draw lattice Gaussian samples by a Markov chain.",
    'decode': "Solve CVP/BDD by MHK/MTMK sampling.",
    'diagnose': "Spectral gap and mixing time report.",
    'ber': "MIMO detection BER sweep to CSV.",
}


def cmd_sample(path=None, overrides=None):
    """Run 'sample' subcommand, return the written file path."""
    return run('sample', path=path, overrides=overrides)['out']


def cmd_decode(path=None, overrides=None):
    """Run 'decode' subcommand, return the written file path."""
    return run('decode', path=path, overrides=overrides)['out']


def cmd_diagnose(path=None, overrides=None):
    """Run 'diagnose' subcommand, return the written file path."""
    return run('diagnose', path=path, overrides=overrides)['out']


def cmd_ber(path=None, overrides=None):
    """Run 'ber' subcommand, return the written file path."""
    return run('ber', path=path, overrides=overrides)['out']


COMMANDS = {
    'sample': cmd_sample,
    'decode': cmd_decode,
    'diagnose': cmd_diagnose,
    'ber': cmd_ber,
}


def _key_value(text):
    key, sep, value = text.partition('=')
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got '{text}'")
    return key.strip(), value.strip()


def build_parser():
    parser = argparse.ArgumentParser(
        prog='pylgs',
        description="Lattice Gaussian sampling by Markov chain Monte Carlo.")
    subparsers = parser.add_subparsers(dest='subcommand', required=True)
    for name, text in SUBCOMMANDS.items():
        sub = subparsers.add_parser(name, help=text, description=text)
        sub.add_argument('--config', metavar='PATH', default=None,
                         help="flat key=value configuration file")
        sub.add_argument('--seed', type=int, default=None,
                         help="master seed (mandatory here or in config)")
        sub.add_argument('--out', metavar='PATH', default=None,
                         help="output file")
        sub.add_argument('--set', dest='overrides', metavar='KEY=VALUE',
                         type=_key_value, action='append', default=[],
                         help="override a configuration key, repeatable")
        sub.add_argument('--verbose', action='store_true',
                         help="debug logging")
    return parser


def main(argv=None):
    """Parse ``argv``, run the subcommand and return the exit status."""
    args = build_parser().parse_args(argv)
    logger = logging.getLogger('pylgs')
    if args.verbose:
        logger.setLevel('DEBUG')
    overrides = dict(args.overrides)
    # Flags have the highest priority.
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.out is not None:
        overrides['out'] = args.out
    try:
        out = COMMANDS[args.subcommand](path=args.config, overrides=overrides)
    except LatticeError as e:
        logger.error(f"Numerical error ({type(e).__name__}):\n    {e}")
        return 2
    except ConfigError as e:
        logger.error(f"Configuration error:\n    {e}")
        return 1
    except (ValueError, OSError) as e:
        logger.error(f"Error ({type(e).__name__}):\n    {e}")
        return 1
    logger.info(f"Done:\n    {out}")
    return 0


if __name__ == '__main__':
    sys.exit(main())
