"""
The :mod:`pylgs.producer` includes the base class to run configuration steps.

Each subcommand has its producer (see :mod:`pylgs.commands`). A producer
takes an initial object and consecutively passes it through its ``steps``
methods, each step returns the updated object. Output steps write files
in a deterministic text format.

"""


import logging
import math
import sys

import numpy as np

__all__ = ['Producer', 'format_value']


def format_value(value, digits=12):
    """Deterministic text for record values (floats with ``digits`` s.f.)."""
    if isinstance(value, (bool, np.bool_)):
        return 'on' if value else 'off'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return 'nan'
        return f"{float(value):.{digits}g}"
    return str(value)


class Producer(object):
    """Execute configuration steps.

    Interface: run, dump_record.

    Parameters
    ----------
    objects : dict
        Dictionary with objects of previous runs:
        {'section_id__configuration_id': object}.
    oid : str
        Unique identifier of produced object.
    logger_id: str, optional (default='logger__default')
        Unique identifier of logger either in ``objects`` or
        :data:`logging.root.manager.loggerDict` . If not found, attach
        new logger to stdout (with logger_id name and 'info' level).

    Attributes
    ----------
    objects : dict
        Dictionary with objects of previous runs.
    oid : str
        Unique identifier of produced object.
    logger : :class:`logging.Logger`
        Logger.

    """
    _required_parameters = ['objects', 'oid']

    def __init__(self, objects, oid, logger_id='logger__default'):
        if logger_id in objects:
            logger = objects[logger_id]
        elif logger_id in logging.root.manager.loggerDict:
            logger = logging.getLogger(logger_id)
        else:
            # Temporary, garbage collected (in opposite to getLogger())
            logger = logging.Logger(logger_id)
            logger.addHandler(logging.StreamHandler(stream=sys.stdout))
            logger.setLevel("INFO")
        self.objects = objects
        self.oid = oid
        self.logger = logger

    def run(self, init, steps):
        """Execute configuration steps.

        Consecutive call ``obj = getattr(self, 'method_id')(obj, **kwargs)``.

        Parameters
        ----------
        init: object
            Passed as arg in the first step, each result goes to the next.
        steps : list of tuples
            ``self`` methods with kwargs: [('method_id', kwargs), ...].

        Returns
        -------
        res : object
            Result of the last step.

        """
        self.logger.info(f"|__ CONFIGURATION: {self.oid}")
        self.logger.debug(f"steps:\n"
                          f"    {[i[0] for i in steps]}")
        res = init
        for method, kwargs in steps:
            self.logger.info(f"    |__ {method.upper()}")
            if not isinstance(kwargs, dict):
                raise ValueError(f"Kwargs for step '{method}' "
                                 f"should be a dictionary.")
            res = getattr(self, method)(res, **kwargs)
        return self._check(res)

    def dump_record(self, obj, out, key='record'):
        """Write ``obj[key]`` pairs as ``key=value`` lines to ``out``.

        Parameters
        ----------
        obj : dict
            Run state with a list of ``(key, value)`` under ``key``.
        out : str
            Output file path.
        key : str, optional (default='record')
            Entry of ``obj`` holding the record.

        Returns
        -------
        obj : dict
            Input with ``out`` set to the written path.

        """
        with open(out, 'w') as f:
            for name, value in obj[key]:
                f.write(f"{name}={format_value(value)}\n")
        self.logger.info(f"    Record saved:\n        {out}")
        obj['out'] = out
        return obj

    def _check(self, res):
        """Additional result check."""
        return res


if __name__ == '__main__':
    pass
