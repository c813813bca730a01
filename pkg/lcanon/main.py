import logging
import sys

from . import config, log, util
from .cli import cli, options, report_error
from .exceptions import ValidationError

logger = logging.getLogger(__name__)


def setup_logging(verbosity):
    """ configure logging if verbosity is not None """
    if verbosity is None:
        root = logging.getLogger()
        root.addHandler(logging.NullHandler())
    else:
        level = config.get_verbosity(int(verbosity))
        config.configure_logging(level)


def run(argv):
    """Run one command line and return its exit code."""
    try:
        args, _ = options.parse_known_args(argv)
    except SystemExit as e:
        return e.code or 0
    setup_logging(args.verbosity)
    logger.debug(f'args: {args}')
    log.logfile = args.logfile

    # Read config file first, to provide defaults
    file_conf = config.read_config_file(config.get_config_file())
    flags = {name: getattr(args, name) for name in ('tol_eq', 'tol_psd', 'tol_recon', 'rank_tol')}
    try:
        util.set_config(config.resolve_config(flags, file_conf=file_conf))
    except ValidationError as e:
        report_error(e)
        return e.exit_code

    # Must import the commands, for the side effects of creating the commands
    # when importing.
    from . import commands  # noqa: F401

    return cli.parse(argv)


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
