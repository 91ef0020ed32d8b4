"""Command line front end.

Exit codes: 0 all bounds hold, 2 bound violation, 3 uncertified layer under
``--strict``, 4 configuration error.
"""

import argparse
import logging
import os
import sys

from ..basis import get_basis
from ..errors import ConfigError, MZError
from ..mzfamily import assemble, write_nodes
from ..quadrature import dual_weights, write_rules
from .config import build_config, read_config_file
from .experiments import (
    CONVERGENCE_COLUMNS,
    FRAME_COLUMNS,
    WEYL_COLUMNS,
    frame_rows,
    make_layers,
    render_csv,
    render_fits,
    run_approx_experiment,
    run_frame,
    run_quad_experiment,
    run_weyl_experiment,
    write_text,
)

EXIT_OK, EXIT_VIOLATION, EXIT_UNCERTIFIED, EXIT_CONFIG = 0, 2, 3, 4

logger = logging.getLogger("mzsampling")

# flag name -> (type, help)
_FLAGS = {
    "basis": (str, "fourier | chebyshev | legendre"),
    "generator": (str, "uniform | jittered | random | path to a node file"),
    "node-file": (str, "node file (same as passing the path as --generator)"),
    "oversampling": (float, "nodes per dimension of P_n"),
    "jitter": (float, "jitter amplitude in grid spacings, in [0, 1/2)"),
    "seed": (int, "random seed"),
    "degrees": (str, "8,16,32 | dyadic:8:256 | range:4:48:4"),
    "function": (str, "sobolev | analytic | hat"),
    "a": (float, "analytic test function parameter (> 1)"),
    "fsigma": (float, "smoothness of the sobolev test function"),
    "eps": (float, "extra decay of the sobolev test function"),
    "k-max": (int, "series truncation of the test function"),
    "sigma": (float, "Sobolev index of the error bounds"),
    "rate": (str, "auto | algebraic | geometric"),
    "floor": (float, "frame-bound certification floor"),
    "noise-floor": (float, "errors below this are ignored in rate fits"),
    "tol": (float, "absolute tolerance of bound checks"),
    "grid-size": (int, "grid for sup-norm estimates of the spectral tail"),
    "sup-grid": (int, "grid for the sup norm of f - P_n f"),
}


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--out", "-o", help="CSV output path (default stdout)")
    common.add_argument("--strict", action="store_true", default=None, help="exit 3 on uncertified layers")
    common.add_argument("-v", "--verbose", action="store_true")
    for flag, (kind, text) in _FLAGS.items():
        common.add_argument(f"--{flag}", type=kind, help=text)

    parser = argparse.ArgumentParser(prog="mzsampling", description="MZ sampling experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("frame", parents=[common], help="certify layers, write frame bounds")
    sub.add_parser("approx", parents=[common], help="least-squares convergence sweep")
    quad = sub.add_parser("quad", parents=[common], help="quadrature convergence sweep")
    quad.add_argument("--rules-out", help="also write the quadrature rules")
    sub.add_parser("weyl", parents=[common], help="Weyl fit and phi_sigma table")
    sub.add_parser("gen-nodes", parents=[common], help="write a node file")
    return parser


def _config(args):
    values = read_config_file(args.config) if args.config else {}
    overrides = {flag.replace("-", "_"): getattr(args, flag.replace("-", "_")) for flag in _FLAGS}
    overrides["strict"] = args.strict
    overrides["output"] = args.out
    if args.command == "weyl" and args.sigma is None and "sigma" not in values:
        basis = overrides["basis"] or values.get("basis", "fourier")
        try:
            overrides["sigma"] = get_basis(basis).sigma_crit + 0.5
        except ValueError as err:
            raise ConfigError(str(err)) from None
    return build_config(values, overrides)


def _emit(cfg, text):
    if cfg.output:
        write_text(cfg.output, text)
    else:
        sys.stdout.write(text)


def _fit_path(output):
    stem, _ = os.path.splitext(output)
    return stem + ".fit.csv"


def _status(violations, uncertified, strict):
    for v in violations:
        logger.error("bound violated: %s", v)
    if violations:
        return EXIT_VIOLATION
    if uncertified and strict:
        return EXIT_UNCERTIFIED
    return EXIT_OK


def _run(args, cfg):
    cmd = args.command
    if cmd == "gen-nodes":
        layers = make_layers(cfg)
        buf = [layers[n] for n in cfg.degrees]
        if cfg.output:
            write_nodes(buf, cfg.output)
        else:
            write_nodes(buf, sys.stdout)
        return EXIT_OK
    if cmd == "frame":
        report = run_frame(cfg)
        _emit(cfg, render_csv(FRAME_COLUMNS, frame_rows(report)))
        failing = list(report.failing)
        for n in failing:
            logger.warning("layer n=%d not certified", n)
        return _status([], failing, cfg.strict)
    if cmd == "weyl":
        report = run_weyl_experiment(cfg)
        _emit(cfg, render_csv(WEYL_COLUMNS, report.rows))
        fit = report.fit
        print(
            f"d={fit.d:.6g} C={fit.c:.6g} residual={fit.residual:.3g} "
            f"sigma_crit={fit.sigma_crit:.6g} sigma={report.sigma:.6g} dyadic_constant={report.dyadic:.6g}",
            file=sys.stderr,
        )
        return _status(report.violations, [], cfg.strict)

    run = run_approx_experiment if cmd == "approx" else run_quad_experiment
    report = run(cfg)
    _emit(cfg, render_csv(CONVERGENCE_COLUMNS, report.rows))
    if cfg.output:
        write_text(_fit_path(cfg.output), render_fits(report.fits))
    else:
        sys.stderr.write(render_fits(report.fits))
    if cmd == "quad" and args.rules_out:
        basis = get_basis(cfg.basis)
        layers = make_layers(cfg)
        rules = [
            dual_weights(g, cfg.floor)
            for g in (assemble(basis, layers[n]) for n in cfg.degrees)
            if g.certified(cfg.floor)
        ]
        write_rules(rules, args.rules_out)
    return _status(report.violations, report.uncertified, cfg.strict)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = _config(args)
        return _run(args, cfg)
    except ConfigError as err:
        logger.error("config error: %s", err)
        return EXIT_CONFIG
    except (MZError, OSError, ValueError) as err:
        # unreadable or inconsistent node files are input errors
        logger.error("%s", err)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
