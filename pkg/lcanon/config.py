"""
Configuration
-------------
This module locates the optional configuration file, configures basic logging
to stderr and resolves the numerical tolerances used by the library.

When prompting for verbosity, log levels are translated according to a
mapping:

.. py:data:: LOGGING_VERBOSITY

    0. :py:const:`logging.ERROR`
    1. :py:const:`logging.WARNING`
    2. :py:const:`logging.INFO`
    3. :py:const:`logging.DEBUG`

Tolerances are resolved with the precedence flag > environment > config file
> default. Environment variables carry the prefix ``LCANON_``.
"""
import configparser
import dataclasses
import logging
import math
import os
import sys
import typing

from .exceptions import ValidationError

logger = logging.getLogger(__name__)

# Config file locations
DEFAULT_CONFIG_PATH = tuple((
    os.path.expanduser('~/.config/lcanon.conf'),
    '/etc/lcanon.conf',
    os.path.join(sys.prefix, 'local', 'share', 'lcanon.conf'),
    os.path.join(sys.prefix, 'share', 'lcanon.conf'),
    # At last, look in ../data/ in case we're developing
    os.path.join(os.path.dirname(__file__), '..', 'data', 'lcanon.conf'),
))

CONFIG_SECTION = 'lcanon'
ENV_PREFIX = 'LCANON_'

# Default logging format
LOGGING_FORMAT = "%(levelname)s - %(name)s - %(message)s"

# Verbosity count to logging level
LOGGING_VERBOSITY = (
    logging.ERROR,
    logging.WARNING,
    logging.INFO,
    logging.DEBUG,
)


@dataclasses.dataclass(frozen=True)
class Config:
    """Numerical tolerances shared by the canonicalization pipeline."""

    tol_eq: float = 1e-10
    tol_psd: float = 1e-9
    tol_recon: float = 1e-9
    rank_tol: float = 1e-12

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{field.name} must be a positive finite number, got {value!r}")


def get_verbosity(verbosity):
    """
    Translate verbosity to logging level.

    Levels are translated according to :py:const:`LOGGING_VERBOSITY`.

    :param int verbosity: verbosity level

    :rtype: int
    """
    level = LOGGING_VERBOSITY[min(len(LOGGING_VERBOSITY) - 1, verbosity)]
    return level


def configure_logging(level):
    """
    Enable and configure logging.

    :param int level: logging level
    """
    logging.basicConfig(level=level, format=LOGGING_FORMAT)


def get_config_file():
    """
    :return:
        returns the best (first) match from DEFAULT_CONFIG_PATH, or
        None if no file was found.
    """
    for path in DEFAULT_CONFIG_PATH:
        logger.debug('looking for config in %r', os.path.abspath(path))
        if os.path.isfile(path):
            logger.info('found config in %r', path)
            return path
    logger.debug('no config file found in config paths')
    return None


def read_config_file(path) -> dict:
    """Return the [lcanon] section of an INI file as a dict (empty if absent)."""
    if path is None:
        return {}
    cfgparser = configparser.ConfigParser()
    cfgparser.read(path)
    if CONFIG_SECTION not in cfgparser:
        return {}
    return dict(cfgparser[CONFIG_SECTION].items())


def _parse_tolerance(name: str, raw, source: str) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} from {source}: not a number: {raw!r}")
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} from {source}: must be positive and finite, got {raw!r}")
    return value


def resolve_config(flags: typing.Optional[dict] = None,
                   environ: typing.Optional[typing.Mapping] = None,
                   file_conf: typing.Optional[dict] = None) -> Config:
    """
    Build a :class:`Config` from flags, environment and config file.

    :param flags: values given on the command line; ``None`` entries are unset.
    :param environ: environment mapping, defaults to :py:data:`os.environ`.
    :param file_conf: key/value pairs read from the config file.
    """
    flags = flags or {}
    environ = os.environ if environ is None else environ
    file_conf = file_conf or {}

    values = {}
    for field in dataclasses.fields(Config):
        name = field.name
        env_name = ENV_PREFIX + name.upper()
        if flags.get(name) is not None:
            values[name] = _parse_tolerance(name, flags[name], 'command line')
        elif environ.get(env_name):
            values[name] = _parse_tolerance(name, environ[env_name], env_name)
        elif file_conf.get(name):
            values[name] = _parse_tolerance(name, file_conf[name], 'config file')
    config = Config(**values)
    logger.debug('resolved config: %s', config)
    return config
