"""Command-line entry point: ``twopulse <subcommand> [options]``.

Exit status: 0 success, 1 config error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

import numpy as np

from .analytic import compute_kappa_delta
from .config import ExperimentConfig, resolve_config
from .diagnostics import theoretical_areas, transfer_length
from .errors import ConfigError, TwoPulseError
from .experiment import fmt, run_experiment
from .verify import format_table, verify

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
SOLVER_OF = {"simulate": None, "analytic": "analytic", "adiabatic": "adiabatic"}

log = logging.getLogger("twopulse")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twopulse",
                                description="Two-pulse propagation in a lambda medium.")
    sub = p.add_subparsers(dest="command", required=True)
    help_ = {"simulate": "run the solver named in the config (default: full)",
             "analytic": "evaluate the closed-form solution on the config grid",
             "adiabatic": "run the adiabatically reduced solver",
             "verify": "run the desk-scale self-check suite",
             "areas": "print closed-form Area curves as CSV"}
    for name, text in help_.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", metavar="PATH",
                       help="config file, or the name of a shipped config")
        s.add_argument("--out", metavar="DIR", help="output directory (overrides [run] output)")
        s.add_argument("--stations", metavar="N", type=int, help="number of snapshot stations")
        s.add_argument("--quiet", action="store_true", help="suppress progress messages")
    return p


def _areas(cfg: ExperimentConfig, out) -> None:
    prep, kappa = cfg.medium()
    coeffs = compute_kappa_delta(prep, 1.0, cfg.quadrature())
    zk = np.linspace(cfg.grid.z_min, cfg.grid.z_max, max(cfg.grid.n_z, 1) + 1)
    rep = theoretical_areas(prep, coeffs, zk / kappa)
    print("z_kappa,theta_a,theta_b,theta_total", file=out)
    for row in zip(zk, rep.theta_a, rep.theta_b, np.hypot(rep.theta_a, rep.theta_b)):
        print(",".join(fmt(v) for v in row), file=out)
    if 0 < cfg.pulse_b.area < 2 * np.pi and prep.inversion != 0:
        z_t = transfer_length(prep, coeffs, cfg.pulse_b.area) * kappa
        log.info("transfer length kappa Z_T = %.6g", z_t)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    if args.quiet:
        warnings.simplefilter("ignore")
    try:
        cfg = resolve_config(args.config) if args.config else ExperimentConfig()
        bad = []
        if args.stations is not None and args.stations < 1:
            bad.append("--stations must be at least 1")
        if args.command == "adiabatic":
            if cfg.delta_bar == 0:
                bad.append("[medium] the adiabatic solver needs delta_bar != 0")
            if np.isfinite(cfg.t2_star):
                bad.append("[medium] the adiabatic solver needs a sharp line (t2_star = inf)")
        if bad:
            raise ConfigError(bad)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "verify":
            checks = verify(cfg)
            print(format_table(checks))
            return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY
        if args.command == "areas":
            _areas(cfg, sys.stdout)
            return EXIT_OK
        result = run_experiment(cfg, args.out, args.stations, SOLVER_OF[args.command])
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TwoPulseError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    log.info("artifacts in %s", result.directory)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
