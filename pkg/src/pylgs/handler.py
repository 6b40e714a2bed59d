"""
The :class:`pylgs.Handler` contains class to read and execute configuration.

A run is one subcommand of the default configuration :data:`pylgs.CNFG`.
Each subcommand section holds a ``default`` sub-configuration:

.. code-block::

    {'section_id':
        'default': {
            'init': Initial object state.
            'producer': Factory class, contained methods to run steps.
            'steps': [
                ('method_id 1', {'kwarg_id': value, ..}),
                ('method_id 2', {'kwarg_id': value, ..}),
            ],
            'global': Section level parameters.
        }
    }

Parameters come from levels with ascending priority:

* ``global`` on the most outer configuration level (level 0).
* ``global`` of the section (level 1).
* ``global`` of the sub-configuration (level 2).
* flat ``key=value`` configuration file.
* overrides (command line ``--set key=value`` and flags).

Every value is parsed with :data:`pylgs.default.FIELDS` , then substituted
into step kwargs whose names match the step method signature. Kwargs set
explicitly in ``steps`` are not replaced. Keys supplied by file or overrides
but consumed by no step are reported in a warning.

Configuration file syntax:

.. code-block::

    # comment
    seed = 7
    moves = 20,50,100  # lists are comma separated

"""


import copy
import dataclasses
import inspect

import pylgs

__all__ = ['Handler', 'ConfigError', 'RunConfig']


class ConfigError(ValueError):
    """Invalid configuration value or file."""


# Keys holding a sweep grid in 'ber', a single value elsewhere.
_SWEEP_KEYS = ('moves', 'lll')


@dataclasses.dataclass
class RunConfig(object):
    """Configuration prepared for execution.

    Attributes
    ----------
    subcommand : str
        Executed section.
    oid : str
        Unique identifier ``section_id__oid`` of the produced object.
    producer : class
        Producer class.
    init : object
        Initial object state.
    steps : list of tuples
        Steps with substituted kwargs: [('method_id', kwargs), ...].
    params : dict
        Parsed parameters {'key': value}.

    """
    subcommand: str
    oid: str
    producer: type
    init: object
    steps: list
    params: dict


class Handler(pylgs.Producer):
    """Read and execute configuration.

    Interface: read, exec.

    Parameters
    ----------
    objects : dict
        Dictionary with objects from previous executed producers:
        {'section_id__config__id', object,}
    oid : str
        Unique identifier of run.
    logger_id : str, optional (default='logger__default')
        Logger identifier in `objects`.

    See Also
    ---------
    :class:`pylgs.Producer`: Execute configuration steps.

    """
    _required_parameters = ['objects', 'oid', 'logger_id']

    def __init__(self, objects, oid, logger_id='logger__default'):
        pylgs.Producer.__init__(self, objects, oid, logger_id=logger_id)
        self.logger_id = logger_id

    def read(self, subcommand, path=None, overrides=None, cnfg=None):
        """Merge, parse and substitute parameters of ``subcommand``.

        Parameters
        ----------
        subcommand : str
            Section id in ``cnfg``.
        path : str, optional (default=None)
            Flat ``key=value`` configuration file.
        overrides : dict, optional (default=None)
            Highest priority values {'key': value}.
        cnfg : dict, optional (default=None)
            Default configuration. If None, use :data:`pylgs.CNFG` .

        Returns
        -------
        config : :class:`pylgs.handler.RunConfig`
            Configuration prepared for execution.

        Raises
        ------
        ConfigError
            Unknown subcommand, malformed file, invalid value or missing
            seed.

        """
        if cnfg is None:
            cnfg = pylgs.CNFG
        cnfg = copy.deepcopy(cnfg)
        self._init_logger(cnfg)
        sections = [key for key in cnfg if key not in ('global', 'logger')]
        if subcommand not in sections:
            raise ConfigError(f"Unknown subcommand:\n"
                              f"    {subcommand}, available: {sections}")
        section = cnfg[subcommand]
        conf_id = [key for key in section if key != 'global'][0]
        conf = section[conf_id]

        user = {}
        if path is not None:
            user.update(self._read_file(path))
        if overrides:
            user.update({k: v for k, v in overrides.items() if v is not None})
        raw = self._merge([cnfg.get('global', {}), section.get('global', {}),
                           conf.get('global', {}), user])
        params = self._parse(raw, subcommand)

        steps, used = self._substitute(conf['producer'], conf['steps'],
                                       params)
        unused = set(user) - used
        if unused:
            self.logger.warning(f"Warning: Unused global key(s):\n"
                                f"    {sorted(unused)}")
        self.logger.debug(f"parameters:\n    {params}")
        return RunConfig(subcommand, f"{subcommand}__{self.oid}",
                         conf['producer'], conf.get('init', dict), steps,
                         params)

    def exec(self, config):
        """Execute configuration.

        * Initialize producer ``producer(objects, oid)``.
        * Call ``producer.run(init, steps)``.
        * Store result under ``oid`` in ``objects``.

        Parameters
        ----------
        config : :class:`pylgs.handler.RunConfig`
            Configuration from :meth:`read` .

        Returns
        -------
        obj : object
            Result of the last step.

        """
        init = config.init
        if inspect.isclass(init) or inspect.isfunction(init):
            init = init()
        if not inspect.isclass(config.producer):
            raise TypeError(f"{config.oid} producer should be a class.")
        producer = config.producer(self.objects, config.oid,
                                   logger_id=self.logger_id)
        obj = producer.run(init, config.steps)
        self.objects[config.oid] = obj
        return obj

    def _init_logger(self, cnfg):
        """Produce logger from 'logger' section if not in objects."""
        if self.logger_id in self.objects or 'logger' not in cnfg:
            return
        conf = cnfg['logger']['default']
        producer = conf.get('producer', pylgs.Producer)(self.objects,
                                                        self.logger_id)
        logger = producer.run(conf['init'], conf.get('steps', []))
        self.objects[self.logger_id] = logger
        self.logger = logger

    def _read_file(self, path):
        """Parse flat ``key=value`` file, '#' starts a comment."""
        res = {}
        with open(path, 'r') as f:
            for num, line in enumerate(f, 1):
                line = line.split('#')[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition('=')
                key = key.strip()
                if not sep or not key:
                    raise ConfigError(f"Malformed line {num} in config file,"
                                      f" expected 'key=value':\n"
                                      f"    {path}: {line}")
                res[key] = value.strip()
        return res

    def _merge(self, levels):
        """Merge dicts, the later the higher priority."""
        res = {}
        for level in levels:
            res.update(level)
        return res

    def _parse(self, raw, subcommand):
        fields = pylgs.default.FIELDS
        params = {}
        for key, value in raw.items():
            if key not in fields:
                # Kept raw, reported as unused.
                params[key] = value
                continue
            if value is None:
                params[key] = None
                continue
            try:
                params[key] = fields[key].parse(value)
            except (ValueError, TypeError, KeyError) as e:
                raise ConfigError(f"Invalid value for field '{key}':\n"
                                  f"    {key}={value!r}: {e}") from None
        if params.get('seed') is None:
            raise ConfigError("Field 'seed' is mandatory:\n"
                              "    set 'seed' in config or use --seed.")
        if subcommand != 'ber':
            for key in _SWEEP_KEYS:
                if key in params and isinstance(params[key], tuple):
                    if len(params[key]) != 1:
                        raise ConfigError(f"Field '{key}' should be a single"
                                          f" value for '{subcommand}':\n"
                                          f"    {key}={raw[key]!r}")
                    params[key] = params[key][0]
        return params

    def _substitute(self, producer, steps, params):
        """Fill step kwargs from ``params`` by signature."""
        used = set()
        res = []
        for step in steps:
            method, kwargs = step[0], dict(step[1] if len(step) > 1 else {})
            func = getattr(producer, method)
            for name in inspect.signature(func).parameters:
                if name in ('self', 'obj') or name in kwargs:
                    continue
                if name in params:
                    kwargs[name] = copy.deepcopy(params[name])
                    used.add(name)
            res.append((method, kwargs))
        return res, used


if __name__ == '__main__':
    pass
