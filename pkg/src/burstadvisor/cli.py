"""
Command-line interface.

Subcommands::

    burstadvisor fit-profile observations.csv --time-unit minutes
    burstadvisor fit-cost --memory 4GB
    burstadvisor advise --policy deadline --deadline 10 --queue-time 2 --setup-time 0.5 --price-ratio 1.8
    burstadvisor sweep --output results/ --time-unit hours
    burstadvisor sensitivity --output results/ --errors=-0.9,-0.5,0.5,0.9
    burstadvisor log-append --environment cloud --processors 16 --elapsed 0.4
    burstadvisor refit --environment cloud
    burstadvisor show-config --set memory_per_core=1GB

Machine-readable results are printed (or written with ``--output``) as JSON.

Exit statuses: 0 success, 1 usage or validation error, 2 no feasible
placement, 3 I/O error, 4 model evaluated outside its domain.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .advisor import AdviceRequest, Policy, advise, compare
from .config import (
    USER_DEFAULT_KEYS,
    default_environments,
    get_config_manager,
    load_price_table,
    memory_per_core_default,
    set_user_default,
    show_config,
)
from .cost import BillingMode, fit_alpha_report
from .coupled import ModelDomainError
from .logstore import ExecutionRecord, LogStore
from .profile import TimeUnit, convert_time, fit_profile, load_observations
from .sweep import (
    DEFAULT_ERRORS,
    SweepConfig,
    run_sensitivity,
    run_sweep,
    same_decision_fractions,
    summarize,
    write_sensitivity_outputs,
    write_sweep_outputs,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONE_FEASIBLE = 2
EXIT_IO = 3
EXIT_DOMAIN = 4

# advise flags that may also come from a --config JSON document
ADVISE_CONFIG_KEYS = (
    "policy", "deadline", "budget", "queue_time", "setup_time", "price_ratio",
    "local_profile", "cloud_profile", "prices", "memory", "local_sizes", "cloud_sizes",
    "bill_queue", "bill_setup", "hourly_billing",
)


class UsageError(ValueError):
    """Exception raised for missing or contradictory flags"""
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got '{text}'")


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got '{text}'")


def _emit(payload: Dict[str, Any], output: Optional[str]):
    text = json.dumps(payload, indent=2, sort_keys=False)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote {output}")
    else:
        print(text)


def _load_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise UsageError(f"Configuration file {path} must hold a JSON object")
    return data


def cmd_fit_profile(args) -> int:
    unit = TimeUnit.parse(args.time_unit or TimeUnit.HOURS)
    observations = load_observations(args.observations, default_unit=unit)
    profile = fit_profile(observations, unit=unit)
    _emit(profile.to_dict(), args.output)
    return EXIT_OK


def cmd_fit_cost(args) -> int:
    table = load_price_table(args.prices, args.memory or memory_per_core_default())
    report = fit_alpha_report(table)
    _emit({
        "memory_per_core": table.memory_per_core,
        "currency": table.currency,
        "alpha": report.alpha,
        "max_relative_residual": report.max_relative_residual,
        "relative_residuals": list(report.relative_residuals),
        "unconstrained_alpha": report.intercept_alpha,
        "unconstrained_beta": report.intercept_beta,
    }, args.output)
    return EXIT_OK


def _resolve_advise_args(args):
    if args.config:
        stored = _load_json(args.config)
        unknown = set(stored) - set(ADVISE_CONFIG_KEYS)
        if unknown:
            raise UsageError(f"Unknown advise configuration keys: {sorted(unknown)}")
        for key, value in stored.items():
            if getattr(args, key) is None:
                setattr(args, key, value)

    if args.policy is None:
        raise UsageError("--policy is required")
    policy = Policy.parse(args.policy)
    if policy is Policy.DEADLINE_AWARE:
        if args.deadline is None:
            raise UsageError("--policy deadline requires --deadline")
        if args.budget is not None:
            raise UsageError("--budget cannot be combined with --policy deadline")
    else:
        if args.budget is None:
            raise UsageError("--policy budget requires --budget")
        if args.deadline is not None:
            raise UsageError("--deadline cannot be combined with --policy budget")
    return policy


def cmd_advise(args) -> int:
    policy = _resolve_advise_args(args)
    unit = TimeUnit.parse(args.time_unit or TimeUnit.HOURS)

    def hours(value):
        return convert_time(float(value or 0.0), unit, TimeUnit.HOURS)

    billing = BillingMode.HOURLY if args.hourly_billing else BillingMode.CONTINUOUS
    envs = default_environments(
        memory_per_core=args.memory or memory_per_core_default(),
        price_ratio=float(args.price_ratio if args.price_ratio is not None else 1.0),
        queue_hours=hours(args.queue_time),
        setup_hours=hours(args.setup_time),
        bill_queue=bool(args.bill_queue),
        bill_setup=args.bill_setup is not False,
        billing=billing,
        local_profile=args.local_profile,
        cloud_profile=args.cloud_profile,
        price_table=args.prices,
        local_sizes=args.local_sizes,
        cloud_sizes=args.cloud_sizes,
    )
    if policy is Policy.DEADLINE_AWARE:
        request = AdviceRequest(policy, deadline_hours=hours(args.deadline))
    else:
        request = AdviceRequest(policy, budget=float(args.budget))

    rec = advise(request, envs)
    payload = rec.to_dict()
    payload["relative_to_local"] = compare(rec).value
    _emit(payload, args.output)
    if not rec.feasible:
        logger.warning(f"No feasible placement; closest is {rec.closest}")
        return EXIT_NONE_FEASIBLE
    return EXIT_OK


def _sweep_config(args) -> SweepConfig:
    config = SweepConfig.from_file(args.config) if args.config else SweepConfig.default()
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.memory:
        overrides["memory_per_core"] = args.memory
    elif not args.config:
        overrides["memory_per_core"] = memory_per_core_default()
    if args.time_unit:
        overrides["profile_time_unit"] = args.time_unit
    if args.allow_out_of_range:
        overrides["allow_out_of_range"] = True
    if overrides:
        data = config.to_dict()
        data.update(overrides)
        config = SweepConfig.from_dict(data)
    if args.grid_sizes:
        config = config.with_grid_sizes(args.grid_sizes)
    return config


def _policies(args) -> List[Policy]:
    if not args.policy:
        return [Policy.DEADLINE_AWARE, Policy.BUDGET_AWARE]
    return [Policy.parse(p) for p in args.policy]


def cmd_sweep(args) -> int:
    config = _sweep_config(args)
    policies = _policies(args)
    results = run_sweep(config, policies=policies, show_progress=args.progress)
    paths = write_sweep_outputs(results, config, args.output)
    _emit({
        "config_sha256": config.fingerprint(),
        "grid_points": config.total_points,
        "files": {k: str(v) for k, v in paths.items()},
        "summary": summarize(results),
    }, None)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    config = _sweep_config(args)
    errors = args.errors or list(DEFAULT_ERRORS)
    records = run_sensitivity(config, errors=errors, policies=_policies(args), show_progress=args.progress)
    paths = write_sensitivity_outputs(records, config, errors, args.output)
    fractions = same_decision_fractions(records)
    _emit({
        "grid_points": config.total_points,
        "files": {k: str(v) for k, v in paths.items()},
        "same_decision_fraction": {
            policy: {str(err): frac for (p, err), frac in fractions.items() if p == policy}
            for policy in dict.fromkeys(p for p, _ in fractions)
        },
    }, None)
    return EXIT_OK


def cmd_log_append(args) -> int:
    record = ExecutionRecord(
        environment=args.environment,
        processors=args.processors,
        elapsed=args.elapsed,
        unit=TimeUnit.parse(args.time_unit or TimeUnit.HOURS),
        job_tag=args.job_tag,
    )
    store = LogStore(args.log_store)
    count = store.append(record)
    _emit({"log_store": str(store.path), "records": count}, args.output)
    return EXIT_OK


def cmd_refit(args) -> int:
    store = LogStore(args.log_store)
    profile = store.refit(args.environment, unit=TimeUnit.parse(args.time_unit or TimeUnit.HOURS))
    _emit(profile.to_dict(), args.output)
    return EXIT_OK


def cmd_show_config(args) -> int:
    for assignment in args.set or ():
        key, sep, value = assignment.partition("=")
        if not sep or not value:
            raise UsageError(f"--set expects KEY=VALUE, got '{assignment}'")
        stored = set_user_default(key.strip(), value.strip())
        logger.info(f"Stored default {key.strip()}={stored}")
    if args.output:
        _emit(get_config_manager().get_config_info(), args.output)
    else:
        show_config()
    return EXIT_OK


def _add_time_unit(parser: argparse.ArgumentParser, text: str):
    parser.add_argument("--time-unit", choices=[u.value for u in TimeUnit], help=text)


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="Output file (directory for sweep and sensitivity)")
    common.add_argument("--verbose", "-v", action="count", default=0,
                        help="Increase log verbosity (-v info, -vv debug)")

    parser = _ArgumentParser(
        prog="burstadvisor",
        description="Decide whether an HPC job should run on-premise or burst to the cloud",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("fit-profile", parents=[common], help="Fit a power-law profile from timing observations")
    p.add_argument("observations", help="CSV with columns processors,elapsed[,unit]")
    _add_time_unit(p, "Unit of rows without a unit column and of the fitted profile (default: hours)")
    p.set_defaults(handler=cmd_fit_profile)

    p = sub.add_parser("fit-cost", parents=[common], help="Fit the hourly cost slope from a price table")
    p.add_argument("--prices", help="CSV with columns cores,cost_per_hour")
    p.add_argument("--memory", help="Bundled memory configuration: 1GB, 2GB or 4GB (default: stored default or 4GB)")
    p.set_defaults(handler=cmd_fit_cost)

    p = sub.add_parser("advise", parents=[common], help="Recommend local or cloud placement for one job")
    p.add_argument("--config", help="JSON document with advise flags; command-line flags override it")
    p.add_argument("--policy", help="deadline or budget")
    _add_time_unit(p, "Unit of --deadline, --queue-time and --setup-time (default: hours)")
    p.add_argument("--deadline", type=float, help="Deadline (time unit, default hours)")
    p.add_argument("--budget", type=float, help="Budget in currency units")
    p.add_argument("--queue-time", type=float, help="Expected local queue wait")
    p.add_argument("--setup-time", type=float, help="Cloud provisioning time")
    p.add_argument("--price-ratio", type=float, help="Local hourly rate as a multiple K of the cloud rate")
    p.add_argument("--local-profile", help="Local profile JSON (default: bundled)")
    p.add_argument("--cloud-profile", help="Cloud profile JSON (default: bundled)")
    p.add_argument("--prices", help="Price table CSV (default: bundled column for --memory)")
    p.add_argument("--memory", help="Bundled memory configuration (default: stored default or 4GB/proc)")
    p.add_argument("--local-sizes", help="Local processors-per-node set, e.g. 1-200")
    p.add_argument("--cloud-sizes", help="Cloud processors-per-node set, e.g. 1,2,4,8,12,16")
    p.add_argument("--bill-queue", action="store_true", default=None, help="Charge local queue time")
    p.add_argument("--no-bill-setup", dest="bill_setup", action="store_false", default=None,
                   help="Do not charge cloud setup time")
    p.add_argument("--hourly-billing", action="store_true", default=None, help="Bill whole started hours")
    p.set_defaults(handler=cmd_advise)

    for name, handler, text in (
        ("sweep", cmd_sweep, "Evaluate policies and baselines over a parameter grid"),
        ("sensitivity", cmd_sensitivity, "Measure decision changes under profile errors"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--config", help="Sweep configuration JSON (default: bundled grid); flags override it")
        p.add_argument("--seed", type=int, help="Seed of the random baseline")
        p.add_argument("--memory", help="Bundled memory configuration")
        p.add_argument("--grid-sizes", type=_int_list,
                       help="Points per axis: deadline,budget,queue,setup,price_ratio")
        p.add_argument("--policy", action="append", help="Restrict to one policy (repeatable)")
        p.add_argument("--allow-out-of-range", action="store_true",
                       help="Accept grid ranges beyond the calibrated bounds")
        p.add_argument("--progress", action="store_true", help="Show a progress bar")
        _add_time_unit(p, "Unit the profiles' coefficients are read in (default: from the sweep configuration)")
        if name == "sensitivity":
            p.add_argument("--errors", type=_float_list,
                           help="Relative profile errors, e.g. --errors=-0.9,-0.5,0.5,0.9")
        p.set_defaults(handler=handler, output_required=True)

    p = sub.add_parser("log-append", parents=[common], help="Record a finished run")
    p.add_argument("--environment", required=True)
    p.add_argument("--processors", type=int, required=True)
    p.add_argument("--elapsed", type=float, required=True)
    p.add_argument("--job-tag")
    _add_time_unit(p, "Unit of --elapsed (default: hours)")
    p.add_argument("--log-store",
                   help="Execution log path (default: $BURSTADVISOR_LOG_STORE, stored log_store default, data dir)")
    p.set_defaults(handler=cmd_log_append)

    p = sub.add_parser("refit", parents=[common], help="Refit a profile from logged runs")
    p.add_argument("--environment", required=True)
    _add_time_unit(p, "Unit of the refitted profile (default: hours)")
    p.add_argument("--log-store", help="Execution log path")
    p.set_defaults(handler=cmd_refit)

    p = sub.add_parser("show-config", parents=[common], help="Show configuration locations and defaults")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help=f"Store a default ({', '.join(USER_DEFAULT_KEYS)}); repeatable")
    p.set_defaults(handler=cmd_show_config)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    if getattr(args, "output_required", False) and not args.output:
        parser.error(f"{args.command} requires --output DIR")

    try:
        return args.handler(args)
    except ModelDomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
