"""
Command-line entry point.

    critnls ground-state        threshold certificate
    critnls functionals         functional report of a field or initial datum
    critnls make-data           threshold-adjacent K+/K- data
    critnls verify-variational  seeded lemma suite
    critnls evolve              one trajectory from a config file
    critnls dichotomy           sweep over eps, both signs
    critnls profiles            bubble extraction from a field CSV

Exit codes: 0 success, 1 domain error (JSON object on stderr), 2 usage error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from . import __version__, persistence
from .config import SimConfig, load_config_document
from .exceptions import UsageError, exception_to_response
from .logging_config import RunLoggingContext, configure_from_env
from .schemas import FILE_SCHEMAS, SCHEMA_VERSION, DichotomyConfigFile, SimConfigFile

logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("critnls_out"), help="Output directory")
    common.add_argument("--seed", type=int, default=None, help="Seed (recorded; drives random suites)")
    common.add_argument("--config", type=Path, default=None, help="JSON config file (schema: 1)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")
    common.add_argument(
        "--log-format", choices=["json", "text"], default=None, help="Log format on stderr"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="critnls",
        description="Radial simulator for i u_t + Δu = -|u|^4 u + |u|^2 u in 3D",
        epilog=FILE_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(
            name,
            parents=[common],
            help=help_text,
            epilog=FILE_SCHEMAS,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )

    gs = add("ground-state", "Certify the threshold m and write threshold.json")
    gs.add_argument("--r-max", type=float, default=None)
    gs.add_argument("--n", type=int, default=None)

    fn = add("functionals", "Write functionals.json for a field CSV or the config's initial datum")
    fn.add_argument("--field", type=Path, default=None, help="Field CSV (r,re,im)")

    md = add("make-data", "Manufacture threshold-adjacent data")
    md.add_argument("--eps", type=float, required=True)
    md.add_argument("--R", type=float, default=None, help="Cutoff radius (searched if omitted)")
    md.add_argument("--dilation", type=float, default=None, help="Defaults to |eps|^3")
    md.add_argument("--r-max", type=float, default=None)
    md.add_argument("--n", type=int, default=None)

    vv = add("verify-variational", "Run the seeded variational suite")
    vv.add_argument("--count", type=int, default=1000)

    ev = add("evolve", "Evolve the config's initial datum")
    ev.add_argument("--t-end", type=float, default=None)
    ev.add_argument("--dt0", type=float, default=None)
    ev.add_argument("--output-every", type=int, default=None)

    di = add("dichotomy", "Sweep eps over both signs and classify every run")
    di.add_argument("--eps-list", type=float, nargs="+", default=None)
    di.add_argument("--R", type=float, default=None)
    di.add_argument("--dilation-rule", choices=["cubic", "quadratic"], default=None)
    di.add_argument("--dilation-factor", type=float, default=None)
    di.add_argument("--workers", type=int, default=None)
    di.add_argument(
        "--absolute-units",
        action="store_true",
        help="Read lengths, times and rate_floor as absolute values for every member",
    )

    pr = add("profiles", "Extract the dominant concentration bubble of a field CSV")
    pr.add_argument("--field", type=Path, required=True)
    pr.add_argument("--reference", type=Path, default=None, help="Reference field CSV")
    return parser


# ── Config resolution ─────────────────────────────────────────────────────────


def _sim_config(args, model_cls=SimConfigFile, **overrides):
    """SimConfig from --config (if any) with flags overriding file values."""
    model = None
    if args.config is not None:
        model = model_cls.model_validate(load_config_document(args.config))
    elif model_cls is not SimConfigFile:
        model = model_cls.model_validate({"schema": SCHEMA_VERSION})
    config = SimConfig.from_dict(model.sim_fields()) if model is not None else SimConfig()
    if args.seed is not None:
        overrides["seed"] = args.seed
    return config.with_overrides(**overrides), model


def _emit(payload) -> None:
    sys.stdout.write(persistence.dumps_json(payload))


# ── Subcommands ───────────────────────────────────────────────────────────────


def cmd_ground_state(args) -> int:
    from .engine.ground_state import reference_grid, threshold_m
    from .engine.grid import make_grid

    grid = reference_grid()
    if args.r_max is not None or args.n is not None:
        grid = make_grid(args.r_max or grid.r_max, args.n or grid.n)
    certificate = threshold_m(grid)
    persistence.write_json(args.out / "threshold.json", certificate.model_dump())
    _emit(certificate.model_dump())
    return 0


def cmd_functionals(args) -> int:
    from .core import initial_field
    from .engine.functionals import functional_report

    if args.field is not None:
        if not args.field.is_file():
            raise UsageError(f"field file not found: {args.field}")
        field = persistence.read_field_csv(args.field)
    else:
        config, model = _sim_config(args)
        if model is None or model.initial is None:
            raise UsageError("functionals needs --field or a --config with an 'initial' section")
        field = initial_field(model.initial, config.make_grid())
    report = functional_report(field)
    persistence.write_json(args.out / "functionals.json", report.model_dump())
    _emit(report.model_dump())
    return 0


def cmd_make_data(args) -> int:
    from .engine.ground_state import classify, cutoff_radius, make_k_data
    from .engine.functionals import functional_report
    from .engine.grid import make_grid

    grid = None
    if args.r_max is not None or args.n is not None:
        if args.r_max is None or args.n is None:
            raise UsageError("--r-max and --n must be given together")
        grid = make_grid(args.r_max, args.n)
    field = make_k_data(args.eps, R=args.R, grid=grid, dilation=args.dilation)
    report = functional_report(field)
    payload = {
        "eps": args.eps,
        "R": cutoff_radius(field),
        "dilation": field.profile.dilation if field.profile is not None else None,
        "classification": classify(report).value,
        "grid": field.grid.to_dict(),
        "functionals": report.model_dump(),
    }
    persistence.write_field_csv(args.out / "field.csv", field)
    persistence.write_json(args.out / "report.json", payload)
    _emit(payload)
    return 0


def cmd_verify_variational(args) -> int:
    from .engine.variational import verify_variational

    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    seed = 0 if args.seed is None else args.seed
    report = verify_variational(seed, args.count)
    payload = report.model_dump()
    persistence.write_json(args.out / "variational.json", payload)
    _emit(payload)
    if not report.all_passed:
        logger.error("Variational suite failures: %s", report.failures())
        return 1
    return 0


def cmd_evolve(args) -> int:
    from .core import DichotomyLab, initial_field
    from .engine.diagnostics import write_report

    if args.config is None:
        raise UsageError("evolve needs --config")
    config, model = _sim_config(
        args, t_end=args.t_end, dt0=args.dt0, output_every=args.output_every
    )
    if model.initial is None:
        raise UsageError("config has no 'initial' section")
    field = initial_field(model.initial, config.make_grid())
    lab = DichotomyLab(config)
    record, verdict = lab.run(field)
    write_report(record, verdict, args.out)
    _emit(verdict.to_json_dict())
    return 0


def cmd_dichotomy(args) -> int:
    from .core import DichotomyLab

    config, model = _sim_config(args, DichotomyConfigFile)
    options = model.sweep_options()
    flags = {
        "R": args.R,
        "dilation_rule": args.dilation_rule,
        "dilation_factor": args.dilation_factor,
        "workers": args.workers,
    }
    options.update({k: v for k, v in flags.items() if v is not None})
    if args.absolute_units:
        options.update(
            time_in_dilation_units=False, grid_in_dilation_units=False, rate_floor_relative=False
        )
    lab = DichotomyLab(config)
    summary = lab.sweep(args.eps_list or model.eps_list, out_dir=args.out, **options)
    _emit(summary.model_dump())
    return 1 if summary.failed else 0


def cmd_profiles(args) -> int:
    from .core import DichotomyLab

    for path in filter(None, (args.field, args.reference)):
        if not path.is_file():
            raise UsageError(f"field file not found: {path}")
    field = persistence.read_field_csv(args.field)
    reference = (
        persistence.read_field_csv(args.reference, r_max=field.grid.r_max)
        if args.reference is not None
        else None
    )
    report = DichotomyLab(SimConfig()).bubble(field, reference)
    persistence.write_json(args.out / "bubble.json", report.to_dict())
    persistence.write_field_csv(args.out / "profile.csv", report.profile)
    _emit(report.to_dict())
    return 0


COMMANDS = {
    "ground-state": cmd_ground_state,
    "functionals": cmd_functionals,
    "make-data": cmd_make_data,
    "verify-variational": cmd_verify_variational,
    "evolve": cmd_evolve,
    "dichotomy": cmd_dichotomy,
    "profiles": cmd_profiles,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_from_env(args.verbose, args.log_format)

    with RunLoggingContext(args.command):
        try:
            return COMMANDS[args.command](args)
        except ValidationError as exc:
            error = {
                "error": "USAGE_ERROR",
                "message": "invalid config file",
                "exit_code": 2,
                "details": {"errors": json.loads(exc.json())},
            }
        except Exception as exc:
            error = exception_to_response(exc)
            if error["error"] == "INTERNAL_ERROR":
                logger.exception("Unexpected failure in %s", args.command)
        sys.stderr.write(json.dumps(error, sort_keys=True) + "\n")
        return int(error["exit_code"])


if __name__ == "__main__":
    sys.exit(main())
