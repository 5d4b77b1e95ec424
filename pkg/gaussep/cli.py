"""Command line interface

Every subcommand reads a QCM document from a file or stdin ("-") and prints
a short report, or JSON with --json. The exit code carries the verdict.
"""
import argparse
from copy import deepcopy
import json
import logging
import sys

import numpy as np

from gaussep.exceptions import DomainError, GaussepError, UsageError
from gaussep.io import load_qcm, revalidate, save_certificate, save_qcm
from gaussep.matrix_analysis import (
    BlockPartition, arithmetic_mean, geometric_mean, harmonic_mean, mean_identity_check,
    positivity_via_schur, schur_complement
)
from gaussep.passive import absolute_separability, passive_orbit_check
from gaussep.routing import ENGINES, decide_separability
from gaussep.separability import Verdict, full_separability
from gaussep.settings import settings
from gaussep.structure import detect_mono_symmetry, localize
from gaussep.symplectic import (
    ModeLayout, QCM, is_ppt, is_qcm, random_qcm, symplectic_spectrum, thermal, tmsv, vacuum
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_MISSING_FILE = 66

VERDICT_EXIT = {
    Verdict.SEPARABLE: EXIT_OK,
    Verdict.ENTANGLED: EXIT_NEGATIVE,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse reports usage errors through UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _groups(text):
    try:
        groups = [int(part) for part in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"groups must be comma separated integers, got '{text}'")
    if len(groups) < 2 or min(groups) < 1:
        raise argparse.ArgumentTypeError("need at least two positive group sizes")
    return groups


def _common_options():
    common = ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--config", type=str, help="configuration file (json or yaml)")
    common.add_argument("--tol-psd", type=float, help="positivity tolerance")
    common.add_argument("--tol-verdict", type=float, help="verdict tolerance")
    common.add_argument("--epsilon", type=float, help="regularization of V_B − iΩ_B")
    common.add_argument("--max-iter", type=int, help="projection sweeps per bisection level")
    common.add_argument("-d", "--debug", action="store_true", help="log debug information")
    return common


def _input_argument(parser):
    parser.add_argument(
        "input", type=str, nargs='?', default='-',
        help="QCM file, '-' for stdin (default)"
    )


def build_parser():
    common = _common_options()
    parser = ArgumentParser(
        prog="gaussep", description="Separability of Gaussian states from their covariance matrix."
    )
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=ArgumentParser)
    commands.required = True

    check = commands.add_parser("check", parents=[common], help="is the matrix a valid QCM?")
    _input_argument(check)

    ppt = commands.add_parser("ppt", parents=[common], help="PPT test across A|B")
    _input_argument(ppt)

    sep = commands.add_parser("sep", parents=[common], help="decide separability across A|B")
    _input_argument(sep)
    sep.add_argument("--engine", choices=ENGINES, default='auto', help="force one route")
    sep.add_argument("--cert", type=str, help="write the certificate to this file")

    fullsep = commands.add_parser(
        "fullsep", parents=[common], help="separability into groups of consecutive modes"
    )
    _input_argument(fullsep)
    fullsep.add_argument("--groups", type=_groups, required=True, help="group sizes, e.g. 1,1,2")
    fullsep.add_argument("--cert", type=str, help="write the certificate to this file")

    abs_sep = commands.add_parser(
        "abs-sep", parents=[common], help="separability under every passive transformation"
    )
    _input_argument(abs_sep)
    abs_sep.add_argument("--cert", type=str, help="write the certificate to this file")

    orbit = commands.add_parser(
        "orbit", parents=[common], help="sample the state's orbit under passive transformations"
    )
    _input_argument(orbit)
    orbit.add_argument("--trials", type=int, help="number of sampled transforms")
    orbit.add_argument("--seed", type=int, help="seed of the sampler")
    orbit.add_argument("--workers", type=int, help="number of worker threads")

    gen = commands.add_parser("gen", parents=[common], help="generate a QCM document")
    gen.add_argument("kind", choices=("tmsv", "thermal", "vacuum", "random"))
    gen.add_argument("params", type=float, nargs='*',
                     help="tmsv: r | thermal: nu m [n] | vacuum: m [n] | random: m n")
    gen.add_argument("--nu", type=float, default=1.0, help="scale the tmsv by this factor")
    gen.add_argument("--seed", type=int, default=0, help="seed for kind 'random'")
    gen.add_argument("--nu-max", type=float, help="largest symplectic eigenvalue (random)")
    gen.add_argument("--squeeze-max", type=float, help="largest squeezing (random)")
    gen.add_argument("--pure", action="store_true", help="pure random state")
    gen.add_argument("--output", type=str, help="write to this file instead of stdout")

    local = commands.add_parser(
        "localize", parents=[common], help="localize a mono-symmetric party onto one mode"
    )
    _input_argument(local)
    local.add_argument("--party", choices=('A', 'B'), default='A')
    local.add_argument("--output", type=str, help="write the reduced 1 vs n QCM to this file")

    means = commands.add_parser(
        "means", parents=[common], help="matrix means and Schur complements of stored matrices"
    )
    means.add_argument("first", type=str, help="first matrix (QCM document)")
    means.add_argument("second", type=str, nargs='?', help="second matrix (QCM document)")
    means.add_argument("--schur", type=int, help="Schur complement of the first matrix at this split")

    suite = commands.add_parser("suite", parents=[common], help="run the property suites")
    suite.add_argument("--seed", type=int, default=0)
    suite.add_argument("--scale", type=float, default=0.05, help="fraction of the full sample counts")
    suite.add_argument("--workers", type=int, default=1)
    suite.add_argument("--case", action="append", dest="cases", help="run only this case")

    check_cert = commands.add_parser(
        "revalidate", parents=[common], help="re-check a certificate file"
    )
    check_cert.add_argument("certificate", type=str)
    return parser


def _overrides(args):
    overrides = {}
    tolerances = {}
    if args.tol_psd is not None:
        tolerances['psd'] = args.tol_psd
    if args.tol_verdict is not None:
        tolerances['verdict'] = args.tol_verdict
    if tolerances:
        overrides['tolerances'] = tolerances
    solver = {}
    if args.epsilon is not None:
        solver['epsilon'] = args.epsilon
    if args.max_iter is not None:
        solver['max_iterations'] = args.max_iter
    if solver:
        overrides['solver'] = solver
    return overrides


def _configure_logging(debug):
    name = str(settings['logging']['level']).upper()
    level = logging.DEBUG if debug else getattr(logging, name, logging.WARNING)
    package_logger = logging.getLogger('gaussep')
    package_logger.setLevel(level)
    if not package_logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        package_logger.addHandler(handler)


class Context:
    def __init__(self, args, stdin, stdout):
        self.args = args
        self.stdin = stdin
        self.stdout = stdout

    def print(self, *values):
        print(*values, file=self.stdout)

    def report(self, data, lines):
        if self.args.json:
            self.print(json.dumps(data, indent=2))
        else:
            for line in lines:
                self.print(line)

    def load(self, name=None):
        name = self.args.input if name is None else name
        return load_qcm(self.stdin if name == '-' else name)

    def load_state(self, name=None):
        return self.load(name).qcm


def _float(value):
    return None if value is None else float(value)


def cmd_check(ctx):
    source = ctx.load()
    validity = is_qcm(source.matrix, source.layout)
    ctx.report(
        {'valid': validity.valid, 'min_eigenvalue': validity.min_eigenvalue},
        [f"valid QCM: {'yes' if validity.valid else 'no'}",
         f"minimum eigenvalue of V + iΩ: {validity.min_eigenvalue:.6g}"]
    )
    return EXIT_OK if validity.valid else EXIT_NEGATIVE


def cmd_ppt(ctx):
    V = ctx.load_state()
    result = is_ppt(V)
    ctx.report(
        {'ppt': result.ppt, 'min_symplectic_eigenvalue': result.min_symplectic_eigenvalue,
         'distillable': result.distillable},
        [f"PPT: {'yes' if result.ppt else 'no'}",
         f"minimum symplectic eigenvalue of the partial transpose: "
         f"{result.min_symplectic_eigenvalue:.6g}"]
    )
    return EXIT_OK if result.ppt else EXIT_NEGATIVE


def _cert_report(ctx, cert):
    data = {
        'verdict': cert.verdict.value,
        'method': cert.method,
        'group_sizes': cert.group_sizes,
        'witness': cert.witness_kind,
        'margin': _float(cert.margin),
        'pt_min_symplectic_eigenvalue': _float(cert.pt_min_symplectic_eigenvalue),
        'pt_modes': cert.pt_modes,
        'epsilon': cert.epsilon,
        'notes': cert.notes,
    }
    lines = [f"verdict: {cert.verdict.value} (method: {cert.method})",
             f"witness: {cert.witness_kind}"]
    if cert.pt_min_symplectic_eigenvalue is not None:
        lines.append(
            f"minimum symplectic eigenvalue of the partial transpose: "
            f"{cert.pt_min_symplectic_eigenvalue:.6g}"
        )
    if cert.margin is not None:
        lines.append(f"margin: {cert.margin:.3g}")
    lines.extend(f"note: {note}" for note in cert.notes)
    ctx.report(data, lines)


def _write_cert(ctx, cert, V):
    if ctx.args.cert:
        save_certificate(cert, V, ctx.args.cert)
        logger.info("Certificate written to %s", ctx.args.cert)


def cmd_sep(ctx):
    V = ctx.load_state()
    cert = decide_separability(V, engine=ctx.args.engine)
    _cert_report(ctx, cert)
    _write_cert(ctx, cert, V)
    return VERDICT_EXIT[cert.verdict]


def cmd_fullsep(ctx):
    V = ctx.load_state()
    cert = full_separability(V, ctx.args.groups)
    _cert_report(ctx, cert)
    _write_cert(ctx, cert, V)
    return VERDICT_EXIT[cert.verdict]


def cmd_abs_sep(ctx):
    V = ctx.load_state()
    cert = absolute_separability(V)
    ctx.report(
        {'verdict': cert.verdict.value, 'lambda1': cert.lambda1, 'lambda2': cert.lambda2,
         'product': cert.product, 'k': cert.k, 'p': cert.p, 'min_gap': cert.min_gap},
        [f"verdict: {cert.verdict.value}",
         f"two smallest eigenvalues: {cert.lambda1:.6g}, {cert.lambda2:.6g}"
         f" (product {cert.product:.6g})"]
    )
    _write_cert(ctx, cert, V)
    return EXIT_OK if cert.absolutely_separable else EXIT_NEGATIVE


def cmd_orbit(ctx):
    V = ctx.load_state()
    report = passive_orbit_check(
        V, trials=ctx.args.trials, seed=ctx.args.seed, workers=ctx.args.workers
    )
    lines = [f"absolute separability: {report.verdict.value}",
             f"trials: {report.trials} (seed {report.seed})",
             f"minimum PT symplectic eigenvalue over the orbit: "
             f"{report.min_pt_symplectic_eigenvalue:.6g}"]
    if report.entangling_trial is not None:
        lines.append(f"first entangling trial: {report.entangling_trial}")
    lines.extend(f"violation: {violation}" for violation in report.violations)
    ctx.report(report.to_json(), lines)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def _int_param(params, index, name, default=None):
    if index >= len(params):
        if default is None:
            raise UsageError(f"gen: missing parameter '{name}'")
        return default
    value = params[index]
    if value != int(value):
        raise UsageError(f"gen: '{name}' must be an integer, got {value}")
    return int(value)


def cmd_gen(ctx):
    args = ctx.args
    params = args.params
    metadata = {'generator': args.kind, 'params': list(params)}
    if args.kind == 'tmsv':
        if len(params) != 1:
            raise UsageError("gen tmsv takes exactly one parameter r")
        V = tmsv(params[0])
        if args.nu != 1.0:
            V = QCM(args.nu * V.mat, V.layout)
            metadata['nu'] = args.nu
    elif args.kind == 'thermal':
        if not params:
            raise UsageError("gen thermal needs nu and the number of modes")
        V = thermal(params[0], _int_param(params, 1, 'm'), _int_param(params, 2, 'n', 0))
    elif args.kind == 'vacuum':
        V = vacuum(_int_param(params, 0, 'm'), _int_param(params, 1, 'n', 0))
    else:
        layout = ModeLayout(_int_param(params, 0, 'm'), _int_param(params, 1, 'n'))
        nu_max = None if args.pure else (
            args.nu_max if args.nu_max is not None else settings['random']['nu_max']
        )
        V = random_qcm(args.seed, layout, nu_max=nu_max, squeeze_max=args.squeeze_max)
        metadata['seed'] = args.seed
    save_qcm(V, args.output if args.output else ctx.stdout, metadata)
    return EXIT_OK


def cmd_localize(ctx):
    V = ctx.load_state()
    target = V.swap_parties() if ctx.args.party == 'B' else V
    blocks = detect_mono_symmetry(target)
    if not blocks.detected:
        raise DomainError(
            f"Party {ctx.args.party} is not mono-symmetric (deviation {blocks.deviation:.3g})"
        )
    result = localize(V, blocks, party=ctx.args.party)
    spectrum = symplectic_spectrum(V)
    localized = symplectic_spectrum(result.transformed)
    ctx.report(
        {'residual': result.residual, 'spectators': [s.tolist() for s in result.spectators],
         'reduced': result.reduced.mat.tolist(),
         'spectrum_change': float(np.max(np.abs(spectrum - localized)))},
        [f"localization residual: {result.residual:.3g}",
         f"spectators: {len(result.spectators)}",
         f"reduced state: 1 vs {result.reduced.layout.n} modes"]
    )
    if ctx.args.output:
        save_qcm(result.reduced, ctx.args.output, {'generator': 'localize'})
    return EXIT_OK


def cmd_means(ctx):
    first = ctx.load(ctx.args.first).matrix
    if ctx.args.schur is not None:
        partition = BlockPartition(ctx.args.schur)
        complement = schur_complement(first, partition)
        positivity = positivity_via_schur(first, partition)
        ctx.report(
            {'schur_complement': complement.tolist(), 'positivity': positivity.value},
            [f"positivity: {positivity.value}", "Schur complement:", str(complement)]
        )
        return EXIT_OK
    if ctx.args.second is None:
        raise UsageError("means needs a second matrix unless --schur is given")
    second = ctx.load(ctx.args.second).matrix
    arithmetic = arithmetic_mean(first, second)
    harmonic = harmonic_mean(first, second)
    geometric = geometric_mean(first, second)
    residual = mean_identity_check(first, second)
    ctx.report(
        {'arithmetic': arithmetic.tolist(), 'harmonic': harmonic.tolist(),
         'geometric': geometric.tolist(), 'identity_residual': residual},
        ["arithmetic mean:", str(arithmetic), "harmonic mean:", str(harmonic),
         "geometric mean:", str(geometric), f"A#B vs ((A+B)/2)#(A!B) residual: {residual:.3g}"]
    )
    return EXIT_OK


def cmd_suite(ctx):
    from gaussep.suite import run_suite

    try:
        report = run_suite(
            seed=ctx.args.seed, scale=ctx.args.scale, workers=ctx.args.workers,
            cases=ctx.args.cases
        )
    except KeyError as error:
        raise UsageError(str(error.args[0]))
    lines = []
    for case in report.cases:
        status = "ok" if case.passed else "FAILED"
        lines.append(
            f"{case.name}: {status} ({case.samples} samples, {case.inconclusive} inconclusive,"
            f" {case.seconds:.1f}s)"
        )
        lines.extend(f"  {failure}" for failure in case.failures)
    ctx.report(report.to_json(), lines)
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_revalidate(ctx):
    check = revalidate(ctx.args.certificate)
    ctx.report(
        {'ok': check.ok, 'reasons': check.reasons, 'gap': _float(check.gap)},
        [f"certificate valid: {'yes' if check.ok else 'no'}"]
        + [f"reason: {reason}" for reason in check.reasons]
    )
    return EXIT_OK if check.ok else EXIT_NEGATIVE


COMMANDS = {
    'check': cmd_check,
    'ppt': cmd_ppt,
    'sep': cmd_sep,
    'fullsep': cmd_fullsep,
    'abs-sep': cmd_abs_sep,
    'orbit': cmd_orbit,
    'gen': cmd_gen,
    'localize': cmd_localize,
    'means': cmd_means,
    'suite': cmd_suite,
    'revalidate': cmd_revalidate,
}


def cli_dispatch(argv=None, stdin=None, stdout=None):
    """Run one command and return its exit code; settings are restored afterwards"""
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    saved = deepcopy(settings.config), settings.file
    try:
        args = build_parser().parse_args(argv)
        if args.config:
            settings.load_from(args.config)
        settings.update(_overrides(args))
        _configure_logging(args.debug)
        return COMMANDS[args.command](Context(args, stdin, stdout))
    except GaussepError as error:
        print(f"error: {error}", file=sys.stderr)
        return error.exit_code
    except FileNotFoundError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except SystemExit as stop:
        # --help
        return stop.code or 0
    finally:
        settings.config, settings.file = saved
