"""Command-line interface.

Subcommands:

    run       one experiment, report to CSV/JSON
    sweep     grid of experiments over one or two axes
    dist      one experiment, per-site measured/ideal distribution
    validate  truncated vs full tensor-product cross-check (small N)
    ideal     exact walk oracle only, no master equation

Every ExperimentConfig field is available as a flag (key spelling with
dashes, e.g. --g-over-2pi-mhz); a --config file supplies defaults that
flags override.  Exit codes: 0 ok, 1 configuration error, 2 numerical
failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import (ConfigError, ExperimentConfig, config_from_mapping,
                     config_keys, load_config, parse_field_value)
from .harness import (Report, SweepSpec, emit_distribution, emit_plot_script,
                      emit_report, run_experiment, run_sweep,
                      validate_truncation)
from .idealwalk import coin_preset, run_ideal
from .lindblad import IntegrationError


# Conventional coupling-strength grid for `sweep --axis g` (MHz).
_DEFAULT_G_GRID = "10:60:5"


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="config file (key = value lines)")
    for key, field_name in config_keys().items():
        flag = "--" + key.lower().replace("_", "-")
        parser.add_argument(flag, dest=f"cfg_{field_name}", metavar="VALUE",
                            help=f"override config key {key}")


def _config_from_args(args) -> ExperimentConfig:
    base = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for field_name in config_keys().values():
        raw = getattr(args, f"cfg_{field_name}", None)
        if raw is not None:
            overrides[field_name] = parse_field_value(
                field_name, raw, where=f"--{field_name.replace('_', '-')}")
    return config_from_mapping(overrides, base)


def _parse_value_list(text: str, where: str) -> tuple[float, ...]:
    """Comma list of numbers; a:b[:c] tokens expand to inclusive ranges."""
    out: list[float] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            parts = token.split(":")
            if len(parts) not in (2, 3):
                raise ConfigError(f"{where}: bad range {token!r}")
            try:
                start, stop = float(parts[0]), float(parts[1])
                step = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise ConfigError(f"{where}: bad range {token!r}") from None
            if step <= 0 or stop < start:
                raise ConfigError(f"{where}: empty range {token!r}")
            n = int(round((stop - start) / step))
            out.extend(start + i * step for i in range(n + 1)
                       if start + i * step <= stop + 1e-9 * step)
        else:
            try:
                out.append(float(token))
            except ValueError:
                raise ConfigError(f"{where}: bad number {token!r}") from None
    if not out:
        raise ConfigError(f"{where}: no values given")
    return tuple(out)


def _emit(reports: list[Report], cfg: ExperimentConfig) -> None:
    if cfg.output:
        emit_report(reports, cfg.output, cfg.format)
    else:
        emit_report(reports, sys.stdout, cfg.format)


def _summary(rep: Report, renormalize: bool) -> str:
    if rep.error:
        return f"error: {rep.error}"
    first, second = (("S_renorm", rep.s_renorm), ("S", rep.s))
    if not renormalize:
        first, second = second, first
    return (f"{first[0]} = {first[1]:.6f} ({second[0]} = {second[1]:.6f}), "
            f"residual vacuum {rep.residual_vacuum:.3e},"
            f" cavity {rep.residual_cavity:.3e}")


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    rep = run_experiment(cfg)
    _emit([rep], cfg)
    print(_summary(rep, cfg.renormalize), file=sys.stderr)
    if args.plot_script:
        if not cfg.output:
            raise ConfigError("--plot-script needs --output to reference")
        emit_plot_script(cfg.output, args.plot_script, kind="sweep",
                         axis="n_steps")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    if args.values is None:
        if args.axis != "g":
            raise ConfigError(f"--values is required for axis {args.axis!r}")
        values = _parse_value_list(_DEFAULT_G_GRID, "--values")
    else:
        values = _parse_value_list(args.values, "--values")
    cross_axis = args.cross_axis
    cross_values = ()
    if cross_axis is not None:
        if args.cross_values is None:
            raise ConfigError("--cross-axis needs --cross-values")
        cross_values = _parse_value_list(args.cross_values, "--cross-values")
    elif args.cross_values is not None:
        raise ConfigError("--cross-values needs --cross-axis")
    spec = SweepSpec(axis=args.axis, values=values,
                     cross_axis=cross_axis, cross_values=cross_values)
    reports = run_sweep(cfg, spec, workers=args.workers)
    _emit(reports, cfg)
    failures = [r for r in reports if r.error]
    if failures:
        print(f"{len(failures)}/{len(reports)} sweep points failed",
              file=sys.stderr)
    if args.plot_script:
        if not cfg.output:
            raise ConfigError("--plot-script needs --output to reference")
        emit_plot_script(cfg.output, args.plot_script, kind="sweep",
                         axis=args.axis)
    return 0


def _cmd_dist(args) -> int:
    cfg = _config_from_args(args)
    rep = run_experiment(cfg)
    if cfg.output:
        emit_distribution(rep, cfg.output)
    else:
        emit_distribution(rep, sys.stdout)
    print(_summary(rep, cfg.renormalize), file=sys.stderr)
    if args.plot_script:
        if not cfg.output:
            raise ConfigError("--plot-script needs --output to reference")
        emit_plot_script(cfg.output, args.plot_script, kind="dist")
    return 0


def _cmd_validate(args) -> int:
    cfg = _config_from_args(args)
    rep = validate_truncation(cfg)
    print(f"distribution_deviation = {rep.distribution_deviation:.6e}")
    print(f"similarity_deviation = {rep.similarity_deviation:.6e}")
    print(f"residual_vacuum_deviation = {rep.residual_vacuum_deviation:.6e}")
    print(f"S_truncated = {rep.truncated.s:.9f}")
    print(f"S_full = {rep.full.s:.9f}")
    return 0


def _cmd_ideal(args) -> int:
    cfg = _config_from_args(args)
    p = run_ideal(cfg.n_steps, cfg.theta_rad, coin_preset(cfg.coin0))
    fh = open(cfg.output, "w", encoding="utf-8") if cfg.output else sys.stdout
    try:
        fh.write("site,P_id\n")
        for site, prob in enumerate(p, start=1):
            fh.write(f"{site},{prob:.12g}\n")
    finally:
        if cfg.output:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cqwalk",
                     description="circuit-QED discrete-time quantum walk "
                                 "simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single experiment")
    p_sweep = sub.add_parser("sweep", help="grid of experiments")
    p_dist = sub.add_parser("dist", help="per-site distribution of one run")
    p_val = sub.add_parser("validate", help="truncation cross-check")
    p_ideal = sub.add_parser("ideal", help="exact walk oracle only")

    for p in (p_run, p_sweep, p_dist, p_val, p_ideal):
        _add_config_flags(p)
    for p in (p_run, p_sweep, p_dist):
        p.add_argument("--plot-script", metavar="PATH",
                       help="write a gnuplot-style companion script")

    p_sweep.add_argument("--axis", required=True,
                         choices=("g", "omega_rabi", "n_steps", "scale"))
    p_sweep.add_argument("--values",
                         help="comma list; a:b[:c] expands to a range "
                              f"(axis g defaults to {_DEFAULT_G_GRID})")
    p_sweep.add_argument("--cross-axis",
                         choices=("g", "omega_rabi", "n_steps", "scale"))
    p_sweep.add_argument("--cross-values")
    p_sweep.add_argument("--workers", type=int, default=1,
                         help="concurrent sweep processes")

    p_run.set_defaults(func=_cmd_run)
    p_sweep.set_defaults(func=_cmd_sweep)
    p_dist.set_defaults(func=_cmd_dist)
    p_val.set_defaults(func=_cmd_validate)
    p_ideal.set_defaults(func=_cmd_ideal)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"cqwalk: config error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"cqwalk: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cqwalk: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
