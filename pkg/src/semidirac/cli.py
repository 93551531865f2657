"""Command-line interface: ``semidirac <subcommand> [options]``.

Exit status is 0 on success, 1 on usage or validation errors and 2 on
runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bounds import CutoffProfile, cutoff_constants, evaluate_bounds, potential_moments
from .config import ConfigError, RunConfig, load_config
from .eigensolve import eigenfunction_magnitude, solve_gap
from .assembly import assemble
from .model import dispersion, validate_potential
from .pipeline import (BOUNDS_HEADER, EIGEN_HEADER, EIGENFUNCTION_HEADER, _bounds_row,
                       _json_safe, build_basis, format_float, run_sweep, write_outputs)
from .testfn import qform_convergence

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semidirac", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a configuration and its potential")
    _common(p)

    p = sub.add_parser("dispersion", help="free band energies on a k-grid")
    _common(p)
    p.add_argument("--delta", type=float, help="gap parameter (overrides config)")
    p.add_argument("--kmax", type=float, default=2.0)
    p.add_argument("--points", type=int, default=21)

    p = sub.add_parser("bounds", help="analytic existence conditions and bounds")
    _common(p)
    p.add_argument("--epsilon", type=float, nargs="+", help="couplings (default: config grid)")

    p = sub.add_parser("qform", help="test-function quadratic form convergence table")
    _common(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--sign", choices=("plus", "minus"), default="plus")
    p.add_argument("--n", type=float, nargs="+", help="cutoff radii (default: config n_grid)")

    p = sub.add_parser("solve", help="gap spectrum at one coupling")
    _common(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--eigenfunctions", type=int, default=0, metavar="K",
                   help="write |psi| grids for the K lowest non-negative energies")

    p = sub.add_parser("sweep", help="full coupling sweep with bounds and plot script")
    _common(p)
    return parser


def _load(args) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config", "a configuration file is required")
    try:
        return load_config(args.config)
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from exc


def _emit(args, name: str, header, rows, payload) -> None:
    """Write a table to ``--out/name`` or stdout in the requested format."""
    if args.format == "json":
        text = json.dumps(_json_safe(payload), indent=2) + "\n"
        name = Path(name).with_suffix(".json").name
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    config = _load(args)
    report = validate_potential(config.potential)
    for name, ok in report.checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
    if not report.ok:
        print(f"first failing check: {report.first_failure}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_dispersion(args) -> int:
    delta = args.delta
    if delta is None:
        delta = _load(args).delta if args.config else 5.0
    if not delta > 0:
        raise ConfigError("--delta", "must be positive")
    ks = np.linspace(-args.kmax, args.kmax, args.points)
    rows, payload = [], []
    for kx in ks:
        for ky in ks:
            lo, hi = dispersion((kx, ky), delta)
            rows.append([format_float(kx), format_float(ky), format_float(lo), format_float(hi)])
            payload.append({"kx": kx, "ky": ky, "E_minus": lo, "E_plus": hi})
    _emit(args, "dispersion.csv", ("kx", "ky", "E_minus", "E_plus"), rows, payload)
    return EXIT_OK


def cmd_bounds(args) -> int:
    config = _load(args)
    moments = potential_moments(config.potential, config.quadrature)
    constants = cutoff_constants(CutoffProfile(config.bounds.margin), config.delta)
    support = config.potential.compact_support_radius
    grid = args.epsilon if args.epsilon else config.epsilon_grid
    reports = [evaluate_bounds(moments, config.delta, e, constants, support) for e in grid]
    _emit(args, "bounds.csv", BOUNDS_HEADER, [_bounds_row(b) for b in reports],
          [b.to_dict() for b in reports])
    return EXIT_OK


def cmd_qform(args) -> int:
    config = _load(args)
    n_grid = args.n if args.n else config.bounds.n_grid
    floor = max(math.e, config.potential.compact_support_radius or 0.0)
    if any(n <= floor for n in n_grid):
        raise ConfigError("--n", f"cutoff radii must exceed {floor:.6g} (e and the support radius)")
    report = qform_convergence(config.model(args.epsilon), CutoffProfile(config.bounds.margin),
                               n_grid, args.sign, config.quadrature)
    rows = [[format_float(r["n"]), format_float(r["Q"]), format_float(r["I"]),
             format_float(r["diff"]), format_float(r["bound"]), str(r["pass"]).lower()]
            for r in report.csv_rows()]
    _emit(args, "qform.csv", ("n", "Q", "I", "diff", "bound", "pass"), rows,
          {"rows": list(report.csv_rows()), "verdict": report.passed})
    print(f"verdict: {'pass' if report.passed else 'fail'}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    config = _load(args)
    basis = build_basis(config)
    system = assemble(config.model(args.epsilon), basis, config.quadrature)
    result = solve_gap(system, config.solver.truncation_tol, config.solver.residual_tol)
    rows = [[format_float(args.epsilon), str(k), format_float(p.energy), format_float(p.residual)]
            for k, p in enumerate(result.eigenpairs)]
    payload = {"epsilon": args.epsilon, "basis": basis.report(),
               "diagnostics": result.diagnostics,
               "eigenvalues": [{"index": k, "E": p.energy, "residual": p.residual}
                               for k, p in enumerate(result.eigenpairs)]}
    _emit(args, "spectrum.csv", EIGEN_HEADER, rows, payload)
    if args.eigenfunctions:
        if not args.out:
            raise ConfigError("--out", "required when writing eigenfunction grids")
        ef = config.output.eigenfunctions
        xs = np.linspace(ef.extent[0], ef.extent[1], ef.points)
        ys = np.linspace(ef.extent[2], ef.extent[3], ef.points)
        states = [(k, p) for k, p in enumerate(result.eigenpairs) if p.energy >= 0]
        for k, p in states[:args.eigenfunctions]:
            X, Y, mag = eigenfunction_magnitude(p, basis, xs, ys)
            path = Path(args.out) / f"eigenfunction_state{k}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(EIGENFUNCTION_HEADER)
                w.writerows([format_float(a), format_float(b), format_float(c)]
                            for a, b, c in zip(X.ravel(), Y.ravel(), mag.ravel()))
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args)
    if args.format == "json" and "json" not in config.output.formats:
        config = _with_formats(config, config.output.formats + ("json",))
    table = run_sweep(config)
    paths = write_outputs(table, config, args.out)
    for eps, message in table.failures:
        print(f"warning: epsilon={eps:g}: {message}", file=sys.stderr)
    for p in paths:
        print(p)
    return EXIT_OK


def _with_formats(config: RunConfig, formats) -> RunConfig:
    return replace(config, output=replace(config.output, formats=tuple(formats)))


COMMANDS = {"validate": cmd_validate, "dispersion": cmd_dispersion, "bounds": cmd_bounds,
            "qform": cmd_qform, "solve": cmd_solve, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit status
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
