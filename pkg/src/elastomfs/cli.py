"""Command-line interface: ``run``, ``phi`` and ``validate``.

Exit codes: 0 success, 1 a validation check failed, 2 configuration or input
error, 3 numerical failure (singular system, separation violation, failed row).
"""

import argparse
import logging
import sys

import numpy as np

from .addition_theorem import ElasticParameters, fundamental_solution, truncation_gap
from .exceptions import ConfigError, DomainError, SeparationError
from .experiment import parse_config, run_experiment

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

# argparse dest -> config key
_FLAG_KEYS = {
    "lam": "lambda",
    "mu": "mu",
    "omega": "omega",
    "trunc": "trunc",
    "fallback_trunc": "fallback_trunc",
    "separation": "separation",
    "ratio": "ratio",
    "subdivs": "subdivs",
    "grid_half_width": "grid_half_width",
    "grid_per_axis": "grid_per_axis",
    "source_r": "source_r",
    "source_theta": "source_theta",
    "source_phi": "source_phi",
    "source_v": "source_v",
    "seed": "seed",
}


def _material_flags(p):
    p.add_argument("--lambda", dest="lam", metavar="LAMBDA", help="Lame parameter lambda (default -1)")
    p.add_argument("--mu", help="shear modulus mu (default 2)")
    p.add_argument("--omega", help="angular frequency (default 1)")
    p.add_argument("--trunc", help="series truncation order (default 10)")
    p.add_argument("--separation", help="radius-ratio guard delta (default 1e-3)")
    p.add_argument("--config", metavar="PATH", help="flat 'key = value' config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elastomfs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the MFS experiment and print CSV")
    _material_flags(run)
    run.add_argument("--ratio", help="homothety ratio of the basis (default 0.95)")
    run.add_argument("--subdivs", help="comma-separated lattice subdivisions (default 3,5,7)")
    run.add_argument("--fallback-trunc", dest="fallback_trunc",
                     help="order for pairs inside the radius guard; 'none' to refuse them (default 20)")
    run.add_argument("--grid-half-width", dest="grid_half_width")
    run.add_argument("--grid-per-axis", dest="grid_per_axis")
    run.add_argument("--source-r", dest="source_r")
    run.add_argument("--source-theta", dest="source_theta")
    run.add_argument("--source-phi", dest="source_phi")
    run.add_argument("--source-v", dest="source_v", help="source polarization, e.g. --source-v=1,2,-1")
    run.add_argument("--seed")
    run.add_argument("--out", metavar="FILE", help="write CSV here instead of stdout")

    phi = sub.add_parser("phi", help="evaluate the fundamental solution at one pair of points")
    _material_flags(phi)
    phi.add_argument("--x", required=True, help="first point, e.g. --x=1.5,0,0")
    phi.add_argument("--y", required=True, help="second point")

    val = sub.add_parser("validate", help="run the oracle-agreement and property checks")
    val.add_argument("--skip-slow", action="store_true", help="skip the MFS experiment and determinism checks")
    return parser


def _overrides(ns) -> dict:
    return {key: getattr(ns, dest) for dest, key in _FLAG_KEYS.items() if getattr(ns, dest, None) is not None}


def _point(text, name):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --{name} {text!r}: {exc}", key=name) from exc
    if len(vals) != 3:
        raise ConfigError(f"--{name} needs three comma-separated coordinates", key=name)
    return np.array(vals)


def format_matrix(phi: np.ndarray) -> str:
    rows = []
    for i in range(3):
        rows.append("  ".join(f"{phi[i, j].real:+.12e} {phi[i, j].imag:+.12e}i" for j in range(3)))
    return "\n".join(rows)


def cmd_run(ns) -> int:
    cfg = parse_config(ns.config, _overrides(ns))
    report = run_experiment(cfg)
    text = report.to_csv()
    if ns.out:
        with open(ns.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for subdiv, stage, msg in report.failures:
        print(f"error: subdiv {subdiv} failed at stage '{stage}': {msg}", file=sys.stderr)
    return EXIT_NUMERICAL if report.failures else EXIT_OK


def cmd_phi(ns) -> int:
    cfg = parse_config(ns.config, _overrides(ns))
    x, y = _point(ns.x, "x"), _point(ns.y, "y")
    params = ElasticParameters(cfg.lam, cfg.mu, cfg.omega)
    phi = fundamental_solution(x, y, params, cfg.trunc, cfg.separation)
    print(f"Phi(x, y), truncation order {cfg.trunc}  (real imag per entry)")
    print(format_matrix(phi))
    if cfg.trunc >= 1:
        print(f"truncation gap |Phi_n - Phi_(n-1)|_max = {truncation_gap(x, y, params, cfg.trunc, cfg.separation):.3e}")
    return EXIT_OK


def cmd_validate(ns) -> int:
    from . import validation

    checks = validation.ALL_CHECKS
    if ns.skip_slow:
        checks = [c for c in checks if c not in (validation.check_mfs_experiment, validation.check_determinism)]
    failed = 0
    for check in checks:
        for res in check():
            print(res.line(), flush=True)
            failed += not res.passed
    print(f"{failed} check(s) failed" if failed else "all checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(ns.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    handler = {"run": cmd_run, "phi": cmd_phi, "validate": cmd_validate}[ns.command]
    try:
        return handler(ns)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeparationError as exc:
        print(f"separation error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
