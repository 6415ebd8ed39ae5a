"""Command-line entry point.

    vlasovdg run --problem weak_landau --nx 128 --nv 128 --degree 2 --tau 0.2 --tmax 60 --out runs/landau
    vlasovdg convergence --problem strong_landau --degree 1 --resolutions 16,32,64 --tau 0.1 --tmax 1 --out runs/order
    vlasovdg dump-tables --degree 1

Settings may also come from a ``key = value`` file passed with ``--config``;
command-line flags take precedence.  Exit codes: 0 success, 1 configuration
error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .diagnostics import (
    convergence_study,
    l2_error_vs_reference,
    time_convergence_study,
)
from .field import NeutralityError
from .problems import DYNAMICS, PROBLEMS, get_problem
from .projection import dump_field, load_field
from .shift import build_shift_table, format_table
from .splitting import ROTATION_SPLITS, NumericalInstability, run

MAX_DEGREE = 6
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("vlasovdg")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    problem: str
    nx: int
    nv: int
    degree: int
    tau: float
    tmax: float
    record_every: int = 1
    out: str = "."
    reference: Optional[str] = None
    dynamics: Optional[str] = None
    workers: int = 1
    rotation_split: str = "shear"

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        for name in ("nx", "nv", "record_every", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if not self.tmax >= 0:
            raise ConfigError("tmax must be non-negative")
        if not 0 <= self.degree <= MAX_DEGREE:
            raise ConfigError(f"degree must be between 0 and {MAX_DEGREE}")
        if self.dynamics is not None and self.dynamics not in DYNAMICS:
            raise ConfigError(f"unknown dynamics {self.dynamics!r}")
        if self.rotation_split not in ROTATION_SPLITS:
            raise ConfigError(f"unknown rotation split {self.rotation_split!r}")
        if self.reference is not None and not Path(self.reference).is_file():
            raise ConfigError(f"reference field {self.reference} not found")
        out = Path(self.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        return self


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _int_list(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


def _float_list(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _add_common(p):
    p.add_argument("--config", help="key = value file with defaults for any flag")
    p.add_argument("--problem", default="weak_landau", choices=sorted(PROBLEMS))
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--nv", type=int, default=64)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--out", default=".")
    p.add_argument("--dynamics", choices=DYNAMICS)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--rotation-split", default="shear", choices=ROTATION_SPLITS)


def build_parser():
    parser = _Parser(prog="vlasovdg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="integrate one problem and write diagnostics")
    _add_common(p_run)
    p_run.add_argument("--record-every", type=int, default=1)
    p_run.add_argument("--reference", help="field dump to measure the final L2 error against")

    p_conv = sub.add_parser("convergence", help="observed order in space, time, or of the projection")
    _add_common(p_conv)
    p_conv.add_argument("--mode", choices=("space", "time", "projection"), default="space")
    p_conv.add_argument("--resolutions", type=_int_list, default=[16, 32, 64])
    p_conv.add_argument("--taus", type=_float_list, default=[0.4, 0.2, 0.1])
    p_conv.add_argument("--ref-n", type=int)
    p_conv.add_argument("--ref-degree", type=int, default=2)
    p_conv.add_argument("--ref-tau", type=float)

    p_tab = sub.add_parser("dump-tables", help="print the exact shift-table polynomials")
    p_tab.add_argument("--degree", type=int, required=True)
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = getattr(args, "config", None)
    if config:
        try:
            values = read_config_file(config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in values.items():
            if key not in known or key in ("help", "config"):
                raise ConfigError(f"{config}: unknown key {key!r}")
            action = known[key]
            try:
                defaults[key] = action.type(value) if action.type else value
            except ValueError:
                raise ConfigError(f"{config}: bad value for {key}: {value!r}") from None
            if action.choices is not None and defaults[key] not in action.choices:
                raise ConfigError(f"{config}: {key} must be one of {', '.join(map(str, action.choices))}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _run_config(args):
    return RunConfig(
        problem=args.problem, nx=args.nx, nv=args.nv, degree=args.degree, tau=args.tau,
        tmax=args.tmax, record_every=getattr(args, "record_every", 1), out=args.out,
        reference=getattr(args, "reference", None), dynamics=args.dynamics, workers=args.workers,
        rotation_split=args.rotation_split,
    ).validate()


def cmd_run(cfg: RunConfig):
    problem = get_problem(cfg.problem)
    grid = problem.grid(cfg.nx, cfg.nv, cfg.degree)
    series, state = run(problem, grid, cfg.tau, cfg.tmax, cfg.record_every, cfg.workers,
                        dynamics=cfg.dynamics, rotation_split=cfg.rotation_split)
    out = Path(cfg.out)
    series.to_csv(out / "diagnostics.csv")
    dump_field(state.f, out / "field.txt")
    m = series.column("mass")
    print(f"problem {problem.name}  grid {cfg.nx}x{cfg.nv} degree {cfg.degree}  "
          f"tau {cfg.tau:g}  steps {state.steps}  t {state.time:g}")
    print(f"final electric energy {series.energy[-1]:.10e}")
    print(f"mass drift {m[-1] - m[0]:.3e}  lost mass {state.lost_mass:.3e}  "
          f"balance {m[-1] - m[0] + state.lost_mass:.3e}")
    if cfg.reference:
        err = l2_error_vs_reference(state.f, load_field(cfg.reference))
        print(f"L2 error vs reference {err:.10e}")
    print(f"wrote {out / 'diagnostics.csv'} and {out / 'field.txt'}")
    return EXIT_OK


def cmd_convergence(args, cfg: RunConfig):
    problem = get_problem(cfg.problem)
    if args.mode == "time":
        grid = problem.grid(cfg.nx, cfg.nv, cfg.degree)
        ref_tau = args.ref_tau or min(args.taus) / 4
        report = time_convergence_study(problem, grid, args.taus, cfg.tmax, ref_tau, cfg.workers)
        label = "tau"
    else:
        tmax = 0.0 if args.mode == "projection" else cfg.tmax
        report = convergence_study(problem, cfg.degree, args.resolutions, cfg.tau, tmax,
                                   ref_resolution=args.ref_n, ref_degree=args.ref_degree,
                                   ref_tau=args.ref_tau, workers=cfg.workers)
        label = "N"
    path = Path(cfg.out) / "convergence.csv"
    report.to_csv(path)
    for n, e, p in zip(report.resolutions, report.errors, report.orders):
        print(f"{label}={n:<8g} error {e:.6e}  order {p:.3f}")
    print(f"least-squares order {report.slope:.3f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_dump_tables(degree):
    if not 0 <= degree <= MAX_DEGREE:
        raise ConfigError(f"degree must be between 0 and {MAX_DEGREE}")
    print(format_table(build_shift_table(degree)))
    return EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "dump-tables":
            return cmd_dump_tables(args.degree)
        cfg = _run_config(args)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_convergence(args, cfg)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code
    except ConfigError as exc:
        print(f"vlasovdg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstability as exc:
        print(f"vlasovdg: numerical failure at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NeutralityError as exc:
        print(f"vlasovdg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
