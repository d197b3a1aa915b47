'''
Run configuration: built-in defaults, overridden by a config file, overridden by flags.

Config files are either plain key=value text ('#' starts a comment) or YAML. A YAML file may be
flat or split into general_configs plus named experiment_configs presets:

    general_configs:
      J: 4
    experiment_configs:
      small_eps_table:
        experiment: converge
        eps: 0.001
'''

import logging
import os

import yaml

from ..exceptions import ConfigurationError

logger = logging.getLogger(__name__)

__all__ = []

EXPERIMENTS = ('converge', 'channel', 'energy')
__all__.append("EXPERIMENTS")

_BOOL_WORDS = {'true': True, 'yes': True, 'on': True, '1': True,
               'false': False, 'no': False, 'off': False, '0': False}

# key -> (type, choices)
_SCHEMA = {
    'experiment': (str, EXPERIMENTS),
    'nu': (float, None),
    'nu_m': (float, None),
    'dt': (float, None),
    'T': (float, None),
    'eps': (float, None),
    'levels': (int, None),
    'level': (int, None),
    'J': (int, None),
    'out': (str, None),
    'threads': (int, None),
    'solver': (str, ('direct', 'iterative')),
    'convection': (str, ('standard', 'skew')),
    'bootstrap': (str, ('be', 'exact')),
    'extrapolation': (str, ('second', 'first')),
    'refinement': (str, ('both', 'space', 'time')),
    'reference': (str, ('exact', 'interpolant')),
    'naive': (bool, None),
    'benchmark': (bool, None),
    'cells_per_unit': (int, None),
    'snapshot_interval': (int, None),
    'perturb_magnetic': (bool, None),
    'c_const': (float, None),
    'ci_const': (float, None),
    'bench_n': (int, None),
    'bench_steps': (int, None),
}

_COMMON_DEFAULTS = {
    'dt': None,
    'levels': 5,
    'level': 3,
    'J': 4,
    'out': 'output',
    'threads': 1,
    'solver': 'direct',
    'convection': 'standard',
    'bootstrap': 'exact',
    'extrapolation': 'second',
    'refinement': 'both',
    'reference': 'exact',
    'naive': False,
    'benchmark': False,
    'cells_per_unit': 1,
    'snapshot_interval': 100,
    'perturb_magnetic': False,
    'c_const': 1.,
    'ci_const': 1.,
    'bench_n': 16,
    'bench_steps': 8,
}

# manufactured-solution tables and the energy check use the same physical setup
_EXPERIMENT_DEFAULTS = {
    'converge': {'nu': 0.01, 'nu_m': 0.001, 'T': 0.001, 'eps': 0.001},
    'energy': {'nu': 0.01, 'nu_m': 0.001, 'T': 0.001, 'eps': 0.001, 'convection': 'skew'},
    'channel': {'nu': 0.001, 'nu_m': 1., 'T': 2., 'dt': 0.001, 'eps': 0.001, 'bootstrap': 'be'},
}


def _coerce(key, value):
    if key not in _SCHEMA:
        raise ConfigurationError(f'unknown configuration key "{key}"')
    kind, choices = _SCHEMA[key]
    if value is None:
        return None
    try:
        if kind is bool:
            if isinstance(value, bool):
                coerced = value
            elif str(value).strip().lower() in _BOOL_WORDS:
                coerced = _BOOL_WORDS[str(value).strip().lower()]
            else:
                raise ValueError(value)
        elif kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            coerced = int(str(value).strip()) if not isinstance(value, (int, float)) else int(value)
        elif kind is float:
            if isinstance(value, bool):
                raise ValueError(value)
            coerced = float(value)
        else:
            coerced = str(value).strip()
    except (TypeError, ValueError):
        raise ConfigurationError(f'value "{value}" for "{key}" is not of type {kind.__name__}')
    if choices is not None and coerced not in choices:
        raise ConfigurationError(f'value "{coerced}" for "{key}" is not one of {choices}')
    return coerced


def _parse_key_values(text):
    entries = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigurationError(f'line {number} is not of the form key=value: "{raw.strip()}"')
        key, value = (part.strip() for part in line.split('=', 1))
        if key in entries:
            raise ConfigurationError(f'key "{key}" given twice (line {number})')
        entries[key] = value
    return entries


def _parse_yaml(text, preset=None):
    try:
        content = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigurationError(f'invalid YAML configuration: {err}')
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigurationError('YAML configuration must be a mapping')
    if 'general_configs' not in content and 'experiment_configs' not in content:
        if preset is not None:
            raise ConfigurationError(f'preset "{preset}" requested but the file has no experiment_configs')
        return dict(content)

    entries = dict(content.get('general_configs') or {})
    presets = content.get('experiment_configs') or {}
    if preset is not None:
        if preset not in presets:
            raise ConfigurationError(f'unknown preset "{preset}", available: {sorted(presets)}')
        entries.update(presets[preset] or {})
    return entries


__all__.append("RunConfig")
class RunConfig:
    '''
    Fully resolved settings of one run; every key of the schema is an attribute.
    '''

    def __init__(self, values):
        self._values = dict(values)
        for key, value in self._values.items():
            setattr(self, key, value)

    def as_dict(self):
        return dict(self._values)

    def echo(self):
        '''one key=value line per key, in schema order'''
        return '\n'.join(f'{key}={self._values[key]}' for key in _SCHEMA) + '\n'

    def __repr__(self):
        return f'RunConfig({self._values})'


def _normalize_flags(flags):
    if flags is None:
        return {}
    if isinstance(flags, dict):
        return {key: value for key, value in flags.items() if value is not None}
    entries = {}
    for flag in flags:
        if '=' not in flag:
            if flag in EXPERIMENTS:
                entries['experiment'] = flag
                continue
            raise ConfigurationError(f'flag "{flag}" is not of the form key=value')
        key, value = flag.split('=', 1)
        entries[key.strip().lstrip('-').replace('-', '_')] = value.strip()
    return entries


__all__.append("parse_config")
def parse_config(text='', flags=None, fmt='keyvalue', preset=None):
    '''
    Resolve a RunConfig from config-file text and flags.

    Args:
        text (str): file content
        flags (dict or list of str): overrides; a dict (None values ignored) or strings
            'key=value' and bare experiment names
        fmt (str): 'keyvalue' or 'yaml'
        preset (str|None): YAML experiment_configs entry to apply
    Raises:
        ConfigurationError: unknown key, type mismatch, missing experiment
    '''
    if fmt == 'yaml':
        from_file = _parse_yaml(text, preset)
    elif fmt == 'keyvalue':
        if preset is not None:
            raise ConfigurationError('presets need a YAML configuration file')
        from_file = _parse_key_values(text)
    else:
        raise ConfigurationError(f'unknown configuration format "{fmt}"')

    file_values = {key: _coerce(key, value) for key, value in from_file.items()}
    flag_values = {key: _coerce(key, value) for key, value in _normalize_flags(flags).items()}

    experiment = flag_values.get('experiment') or file_values.get('experiment')
    if experiment is None:
        raise ConfigurationError(f'no experiment given, expected one of {EXPERIMENTS}')

    values = dict(_COMMON_DEFAULTS)
    values.update(_EXPERIMENT_DEFAULTS[experiment])
    values.update({k: v for k, v in file_values.items() if v is not None})
    values.update(flag_values)
    values['experiment'] = experiment

    for key in ('nu', 'nu_m', 'T'):
        if not values[key] > 0.:
            raise ConfigurationError(f'"{key}" must be positive, got {values[key]}')
    for key in ('J', 'levels', 'level', 'threads', 'cells_per_unit', 'snapshot_interval'):
        if values[key] < 1:
            raise ConfigurationError(f'"{key}" must be at least 1, got {values[key]}')
    if values['dt'] is not None and not values['dt'] > 0.:
        raise ConfigurationError(f'"dt" must be positive, got {values["dt"]}')
    if values['eps'] < 0.:
        raise ConfigurationError(f'"eps" must be nonnegative, got {values["eps"]}')

    config = RunConfig(values)
    logger.info(f'resolved configuration:\n{config.echo()}')
    return config


__all__.append("load_config")
def load_config(path=None, flags=None, preset=None):
    '''
    parse_config on a file (YAML when the name ends in .yaml/.yml); without a path only
    defaults and flags apply
    '''
    if path is None:
        return parse_config('', flags)
    try:
        with open(path) as config_file:
            text = config_file.read()
    except OSError as err:
        raise ConfigurationError(f'cannot read configuration file {path}: {err}')
    fmt = 'yaml' if os.path.splitext(path)[1].lower() in ('.yaml', '.yml') else 'keyvalue'
    return parse_config(text, flags, fmt, preset)
