"""The module includes auxiliary utilities."""


import time

import numpy as np

import pylgs

__all__ = ['derive_rng', 'run']


def derive_rng(seed, *stream):
    """Random stream for ``(seed, stream...)``.

    Counter-based derivation: the master seed with ``stream`` as spawn key,
    so every (seed, index) pair gives an independent, reproducible stream.

    Parameters
    ----------
    seed : int
        Master seed.
    *stream : int
        Stream coordinates, e.g. frame index.

    Returns
    -------
    rng : :class:`numpy.random.Generator`

    """
    if seed is None:
        raise ValueError("Seed is mandatory for reproducible streams.")
    seq = np.random.SeedSequence(int(seed),
                                 spawn_key=tuple(int(i) for i in stream))
    return np.random.default_rng(seq)


def run(subcommand, path=None, overrides=None, cnfg=None, objects=None,
        oid=None):
    """Wrapper over configuration handler.

    Parameters
    ----------
    subcommand : {'sample', 'decode', 'diagnose', 'ber'}
        Section of ``cnfg`` to execute.
    path : str, optional (default=None)
        Flat ``key=value`` configuration file.
    overrides : dict, optional (default=None)
        Highest priority values {'key': 'value'}, strings are parsed like
        file values.
    cnfg : dict, optional (default=None)
        Default configuration. If None, use :data:`pylgs.CNFG` .
    objects : dict, optional (default=None)
        Dict of initial objects to pass in ``pylgs.Handler``:
        {'object_id': object}. If None, set {}.
    oid : str, optional (default=None)
        Unique identifier of run. If None, use ``str(time.time())``.

    Returns
    -------
    obj : dict
        Run state produced by the subcommand producer, ``obj['out']`` is the
        written file.

    See Also
    --------
    :class:`pylgs.Handler`: Reads configurations, executes steps.

    """
    if objects is None:
        objects = {}
    if oid is None:
        oid = str(time.time()).replace('.', '-')
    handler = pylgs.Handler(objects, oid)
    config = handler.read(subcommand, path=path, overrides=overrides,
                          cnfg=cnfg)
    return handler.exec(config)


if __name__ == '__main__':
    pass
