import logging
import math

import numpy as np

from . import choi, gksl, kraus, semigroup, util
from .cli import Flag, cli
from .config import Config
from .exceptions import VerificationFailed
from .log import cli_error, cli_info, cli_warning

logger = logging.getLogger(__name__)


def _config() -> Config:
    return util.config or Config()


def _out_flag():
    return Flag('--out',
                description='Write the JSON result to %(metavar)s instead of stdout.',
                metavar='PATH')


############################################
# Implementation of command 'canonicalize' #
############################################

def cmd_canonicalize(args):
    """Canonical (K, phi) or (H, phi) of a generator relative to a reference operator."""
    config = _config()
    L = util.generator_from_json(util.load_json(args.generator))
    B = util.operator_from_json(util.load_json(args.reference), 'reference')

    if args.mode == 'cptp':
        cd = gksl.canonicalize_cptp(L, B, config)
    else:
        cd = gksl.canonicalize(L, B, config)
    report = gksl.verify_canonical(cd, L, config)
    if cd.mode == 'cptp' and 'tr_bh' not in report.residuals:
        cli_warning("reference is not self-adjoint, tr(BH) = 0 is not checked; "
                    f"cptp_domain_gap is {report.residuals['cptp_domain_gap']:.3g}")
    util.dump_json(util.decomposition_to_json(cd, report.residuals, report.passed), args.out)
    if not report.passed:
        cli_error(f"residuals above tolerance: {', '.join(report.failed)}",
                  exception=VerificationFailed)
    cli_info(f"{args.generator} ({cd.mode}): {len(cd.phi)} Kraus operators")


cli.add_command(
    prog='canonicalize',
    description='Compute the unique decomposition L = K(.) + (.)K* + phi with phi '
                'completely positive, tr(phi(B* (.) B)) = 0 and Im tr(B* K) = 0. '
                'In cptp mode the Hamiltonian H with K = -iH - phi*(1)/2 is also '
                'reported.',
    short_desc='Canonical decomposition of a generator',
    callback=cmd_canonicalize,
    flags=[
        Flag('generator',
             description='Generator file.',
             metavar='GENERATOR'),
        Flag('reference',
             description='Reference operator B (operator file).',
             metavar='REFERENCE'),
        Flag('--mode',
             description='Decomposition form, cp (K form) or cptp (H form).',
             choices=('cp', 'cptp'),
             default='cp'),
        _out_flag(),
    ]
)


####################################
# Implementation of command 'choi' #
####################################

def _parse_weights(text):
    try:
        weights = [float(w) for w in text.split(',')]
    except ValueError:
        cli_error(f"weights must be comma separated numbers, got {text!r}")
    if not all(math.isfinite(w) for w in weights):
        cli_error(f"weights must be finite, got {text!r}")
    return weights


def cmd_choi(args):
    """Choi matrix of a map, optionally weighted."""
    phi = util.map_from_json(util.load_json(args.map))
    if args.weights:
        weights = _parse_weights(args.weights)
        if len(weights) != phi.dim_in:
            cli_error(f"{len(weights)} weights given for a map on dimension {phi.dim_in}")
        wb = choi.WeightedBasis.standard(weights)
    else:
        wb = choi.WeightedBasis.unit(phi.dim_in)
    C = choi.choi_map(phi, wb)
    eigenvalues = C.eigenvalues()
    util.dump_json({
        'choi': util.operator_to_json(C.matrix),
        'eigenvalues': [float(e) for e in eigenvalues],
        'min_eigenvalue': float(eigenvalues[0]),
        'max_eigenvalue': float(eigenvalues[-1]),
        'weights': [[float(w.real), float(w.imag)] for w in wb.weights],
    }, args.out)
    cli_info(f"{args.map}: min eigenvalue {eigenvalues[0]:.6g}")


cli.add_command(
    prog='choi',
    description='Write the (weighted) Choi matrix of a map together with its spectrum.',
    short_desc='Choi matrix of a map',
    callback=cmd_choi,
    flags=[
        Flag('map',
             description='Map file (superop_matrix or kraus).',
             metavar='MAP'),
        Flag('--weights',
             description='Comma separated weights lambda_1,...,lambda_d in the '
                         'standard basis. Default is all ones.',
             metavar='WEIGHTS'),
        _out_flag(),
    ]
)


#####################################
# Implementation of command 'kraus' #
#####################################

def cmd_kraus(args):
    """Kraus operators of a completely positive map."""
    config = _config()
    phi = util.map_from_json(util.load_json(args.map))
    ks = kraus.kraus_from_choi(choi.unweighted_choi(phi), rank_tol=config.rank_tol,
                               psd_tol=config.tol_psd, tol_eq=config.tol_eq)
    util.dump_json({
        'kraus': util.kraus_to_json(ks),
        'eigenvalues': [float(e) for e in ks.eigenvalues],
    }, args.out)
    cli_info(f"{args.map}: {len(ks)} Kraus operators")


cli.add_command(
    prog='kraus',
    description='Extract Kraus operators from the Choi matrix of a map. Fails '
                'with exit code 2 if the map is not completely positive.',
    short_desc='Kraus operators of a map',
    callback=cmd_kraus,
    flags=[
        Flag('map',
             description='Map file (superop_matrix or kraus).',
             metavar='MAP'),
        _out_flag(),
    ]
)


######################################
# Implementation of command 'verify' #
######################################

def cmd_verify(args):
    """Check a decomposition file against a generator file."""
    config = _config()
    L = util.generator_from_json(util.load_json(args.generator))
    cd = util.decomposition_from_json(util.load_json(args.decomposition))
    report = gksl.verify_canonical(cd, L, config)
    util.dump_json({
        'failed': report.failed,
        'passed': report.passed,
        'residuals': {k: float(v) for k, v in report.residuals.items()},
        'thresholds': {k: float(v) for k, v in report.thresholds.items()},
    }, args.out)
    if not report.passed:
        cli_error(f"residuals above tolerance: {', '.join(report.failed)}",
                  exception=VerificationFailed)
    cli_info(f"{args.decomposition} verified against {args.generator}")


cli.add_command(
    prog='verify',
    description='Recompute the residuals of a decomposition written by '
                'canonicalize against a generator.',
    short_desc='Verify a canonical decomposition',
    callback=cmd_verify,
    flags=[
        Flag('generator',
             description='Generator file.',
             metavar='GENERATOR'),
        Flag('decomposition',
             description='Decomposition file written by canonicalize.',
             metavar='DECOMPOSITION'),
        _out_flag(),
    ]
)


#######################################
# Implementation of command 'witness' #
#######################################

def _parse_dims(text):
    parts = util.parse_range(text, '--dims')
    if len(parts) != 2:
        cli_error(f"--dims must look like a:b, got {text!r}")
    try:
        low, high = int(parts[0]), int(parts[1])
    except ValueError:
        cli_error(f"--dims bounds must be integers, got {text!r}")
    if low < 1 or high < low:
        cli_error(f"--dims needs 1 <= a <= b, got {text!r}")
    return list(range(low, high + 1))


def cmd_witness(args):
    """Norms ||Lambda_d||_inf of the truncated non-surjectivity witness."""
    rule = choi.weight_rule(args.weights)
    table = choi.surjectivity_witness(rule, _parse_dims(args.dims))
    if args.table:
        util.print_table(('d', 'norm'), ('d', 'norm'),
                         [{'d': d, 'norm': repr(value)} for d, value in table.rows])
    else:
        util.dump_json({
            'regime': table.regime,
            'rows': [[d, value] for d, value in table.rows],
            'rule': table.rule,
        }, args.out)
    cli_info(f"{table.rule}: {len(table.rows)} rows")


cli.add_command(
    prog='witness',
    description='Tabulate the operator norm of the truncated preimage of a '
                'trace-class operator under the weighted Choi map. For '
                'absolutely summable weights the norms grow without bound.',
    short_desc='Surjectivity witness table',
    callback=cmd_witness,
    flags=[
        Flag('--weights',
             description='Weight rule, geometric:r or power:p.',
             required=True,
             metavar='RULE'),
        Flag('--dims',
             description='Dimension range a:b (inclusive).',
             required=True,
             metavar='A:B'),
        Flag('--table',
             description='Print a plain table instead of JSON.',
             action='store_true'),
        _out_flag(),
    ]
)


######################################
# Implementation of command 'evolve' #
######################################

def _parse_times(text):
    parts = util.parse_range(text, '--times')
    try:
        values = [float(p) for p in parts]
    except ValueError:
        cli_error(f"--times entries must be numbers, got {text!r}")
    start, stop = values[0], values[1]
    step = values[2] if len(values) == 3 else 1.0
    if not all(math.isfinite(v) for v in values) or start < 0 or stop < start or step <= 0:
        cli_error(f"--times needs 0 <= start <= stop and step > 0, got {text!r}")
    # last point never exceeds stop
    count = math.floor((stop - start) / step + 1e-9)
    return [start + k * step for k in range(count + 1)]


def cmd_evolve(args):
    """Check the semigroup generated by a generator on a time grid."""
    config = _config()
    L = util.generator_from_json(util.load_json(args.generator))
    report = semigroup.check_semigroup(L, _parse_times(args.times), config,
                                       processes=args.processes)
    trace_tol = config.tol_recon if L.claimed_class is gksl.GeneratorClass.CPTP_SEMIGROUP else None
    passed = report.passed(config.tol_psd, trace_tol, config.tol_recon)
    util.dump_json({
        'passed': passed,
        'rows': [[t, e, dev] for t, e, dev in report.rows()],
        'semigroup_residuals': [list(r) for r in report.semigroup_residuals],
    }, args.out)
    if not passed:
        worst = float(np.min(report.min_choi_eigenvalues))
        cli_error(f"semigroup check failed (min Choi eigenvalue {worst:.6g})",
                  exception=VerificationFailed)
    cli_info(f"{args.generator}: {len(report.t_grid)} grid points")


cli.add_command(
    prog='evolve',
    description='Evaluate exp(tL) on a time grid and report Choi positivity, '
                'trace deviation and the semigroup law.',
    short_desc='Check the generated semigroup',
    callback=cmd_evolve,
    flags=[
        Flag('generator',
             description='Generator file.',
             metavar='GENERATOR'),
        Flag('--times',
             description='Time grid start:stop:step (default 0:5:0.25).',
             default='0:5:0.25',
             metavar='GRID'),
        Flag('--processes',
             description='Evaluate grid points in a pool of %(metavar)s processes.',
             type=int,
             metavar='N'),
        _out_flag(),
    ]
)
