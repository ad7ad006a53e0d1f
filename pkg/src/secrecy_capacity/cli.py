"""Command-line front end: ``validate``, ``sweep`` and ``condition``.

Exit status: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure at one or more sweep points.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field, replace
from typing import Optional

from . import analytic, closedform
from .config import ConfigError, ExperimentConfig, McSettings, OperatingPoint, load_config
from .model import ConstantNoise, FixedDistance
from .numerics import NumericalError
from .simulator import run_cop_trials, run_sop_trials

__all__ = [
    "Report",
    "SWEEP_COLUMNS",
    "VALIDATE_COLUMNS",
    "CONDITION_COLUMNS",
    "cmd_validate",
    "cmd_sweep",
    "cmd_condition",
    "render",
    "main",
]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEP_COLUMNS = (
    "sweep_value", "cop", "sop_lower", "sop_upper", "beta_t", "beta_e",
    "rate_t", "rate_e", "stc_lower", "stc_upper", "mc_estimate", "mc_stderr",
)
VALIDATE_COLUMNS = (
    "sweep_value", "metric", "cop", "sop_lower", "sop_upper",
    "mc_estimate", "mc_stderr", "trials", "passed",
)
CONDITION_COLUMNS = ("sweep_value", "margin", "positive", "beta_t", "beta_e", "stc_lower")

CONSTANT_NOISE_NOTE = (
    "noise is modelled as a constant power w at every location; "
    "figure-style sweeps over noise power assume this"
)
CAPACITY_LABEL_NOTE = (
    "stc_lower uses the SOP upper bound for the rate cost (capacity lower bound); "
    "some references label the same closed form with an upper-bound superscript"
)


@dataclass
class Report:
    command: str
    columns: tuple
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    failures: int = 0

    @property
    def exit_code(self) -> int:
        if self.errors:
            return EXIT_NUMERICAL
        if self.failures:
            return EXIT_FAILED
        return EXIT_OK


def _notes(config):
    notes = []
    if isinstance(config.noise, ConstantNoise):
        notes.append(CONSTANT_NOISE_NOTE)
    return notes


def _values(config, command):
    if config.sweep is None:
        raise ConfigError(f"{command} needs a sweep section", field="sweep")
    return config.sweep.values


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _sweep_row(config: ExperimentConfig, value: float):
    pt = config.point(value)
    net, noise, scheme = pt.network, pt.noise, pt.scheme
    row = dict.fromkeys(SWEEP_COLUMNS)
    row["sweep_value"] = value
    errors = []

    def attempt(label, fn):
        try:
            return fn()
        except NumericalError as exc:
            errors.append(f"sweep_value={value!r}: {label}: {exc}")
            return None

    row["cop"] = attempt("cop", lambda: analytic.cop(net, noise, scheme, pt.beta_t))
    row["sop_lower"] = attempt("sop_lower", lambda: analytic.sop_lower(net, noise, pt.beta_e))
    row["sop_upper"] = attempt("sop_upper", lambda: analytic.sop_upper(net, noise, pt.beta_e))
    tau_l = attempt("stc_lower", lambda: analytic.stc(net, noise, scheme, pt.constraints, "upper"))
    tau_u = attempt("stc_upper", lambda: analytic.stc(net, noise, scheme, pt.constraints, "lower"))
    if tau_l is not None:
        row.update(
            beta_t=tau_l.rates.beta_t,
            beta_e=tau_l.rates.beta_e,
            rate_t=tau_l.rates.rate_t,
            rate_e=tau_l.rates.rate_e,
            stc_lower=tau_l.tau,
        )
    if tau_u is not None:
        row["stc_upper"] = tau_u.tau
    return row, errors


def _mc_estimate(pt: OperatingPoint, mc: McSettings, jobs, executor):
    if mc.metric == "cop":
        return run_cop_trials(
            pt.network, pt.noise, pt.scheme, pt.beta_t, mc.trials, mc.seed,
            jobs=jobs, executor=executor,
        )
    return run_sop_trials(
        pt.network, pt.noise, pt.beta_e, mc.trials, mc.seed, jobs=jobs, executor=executor
    )


def cmd_sweep(config: ExperimentConfig, jobs: int = 1) -> Report:
    """One row of analytic metrics (plus an optional MC column) per sweep value."""
    values = _values(config, "sweep")
    report = Report("sweep", SWEEP_COLUMNS, notes=_notes(config))
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    with pool or nullcontext():
        mapper = pool.map if pool else map
        results = list(mapper(_sweep_row, [config] * len(values), values))
        for value, (row, errors) in zip(values, results):
            report.errors.extend(errors)
            if config.mc is not None:
                est = _mc_estimate(config.point(value), config.mc, jobs, pool)
                row["mc_estimate"], row["mc_stderr"] = est.estimate, est.stderr
            report.rows.append(row)
    return report


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _validate_point(config, value, executor, jobs):
    pt = config.point(value)
    mc = config.mc
    row = dict.fromkeys(VALIDATE_COLUMNS)
    row.update(sweep_value=value, metric=mc.metric)
    if mc.metric == "cop":
        analytic_value = analytic.cop(pt.network, pt.noise, pt.scheme, pt.beta_t)
        row["cop"] = analytic_value
    else:
        row["sop_lower"] = analytic.sop_lower(pt.network, pt.noise, pt.beta_e)
        row["sop_upper"] = analytic.sop_upper(pt.network, pt.noise, pt.beta_e)
    est = _mc_estimate(pt, mc, jobs, executor)
    row.update(mc_estimate=est.estimate, mc_stderr=est.stderr, trials=est.trials)
    slack = 3.0 * est.stderr
    if mc.metric == "cop":
        row["passed"] = abs(est.estimate - row["cop"]) <= slack
    else:
        row["passed"] = row["sop_lower"] - slack <= est.estimate <= row["sop_upper"] + slack
    return row


def cmd_validate(config: ExperimentConfig, jobs: int = 1) -> Report:
    """Compare Monte Carlo estimates with the analytic values at every sweep point.

    COP passes when the estimate is within three standard errors of the exact
    value; SOP passes when it lies between the two bounds widened by three
    standard errors.
    """
    values = _values(config, "validate")
    if config.mc is None:
        raise ConfigError("validate needs an mc section", field="mc")
    report = Report("validate", VALIDATE_COLUMNS, notes=_notes(config))
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    with pool or nullcontext():
        for value in values:
            try:
                row = _validate_point(config, value, pool, jobs)
            except NumericalError as exc:
                report.errors.append(f"sweep_value={value!r}: {exc}")
                row = dict.fromkeys(VALIDATE_COLUMNS)
                row.update(sweep_value=value, metric=config.mc.metric, passed=False)
            else:
                report.failures += not row["passed"]
            report.rows.append(row)
    return report


# ---------------------------------------------------------------------------
# condition
# ---------------------------------------------------------------------------


def _alpha4_params(pt: OperatingPoint):
    if pt.network.alpha != 4:
        raise ConfigError(
            "the positive-capacity condition is closed-form only for alpha = 4; "
            "use the sweep command for the general path",
            field="network.alpha",
        )
    if not isinstance(pt.noise, ConstantNoise):
        raise ConfigError(
            "the positive-capacity condition needs constant noise; use the sweep command",
            field="noise.kind",
        )
    if pt.noise.power <= 0:
        raise ConfigError(
            "the positive-capacity condition needs noise power > 0; "
            "use the sweep command for the interference-limited case",
            field="noise.power",
        )
    if not isinstance(pt.scheme, FixedDistance):
        raise ConfigError(
            "the positive-capacity condition covers fixed-distance links only; "
            "use the sweep command for nearest-receiver links",
            field="scheme.kind",
        )
    return closedform.Alpha4Params(
        pt.network.tx_density, pt.network.eve_density, pt.noise.power,
        pt.network.power, pt.scheme.distance,
    )


def cmd_condition(config: ExperimentConfig) -> Report:
    """Evaluate the closed-form positive-capacity test (alpha = 4, constant noise)."""
    if config.sweep is None:
        points = [(None, config.base_point())]
    else:
        points = [(v, config.point(v)) for v in config.sweep.values]
    params = [(v, pt, _alpha4_params(pt)) for v, pt in points]
    report = Report("condition", CONDITION_COLUMNS, notes=[CAPACITY_LABEL_NOTE])
    for value, pt, p in params:
        sigma, eps = pt.constraints.sigma, pt.constraints.epsilon
        res = closedform.stc_alpha4(p, sigma, eps)
        margin = closedform.positive_stc_margin(p, sigma, eps)
        report.rows.append(
            dict(
                sweep_value=value,
                margin=margin,
                positive=margin > 1.0,
                beta_t=res.rates.beta_t,
                beta_e=res.rates.beta_e,
                stc_lower=res.tau,
            )
        )
    return report


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(report: Report, fmt: str = "csv") -> str:
    """Serialise a report; CSV has one header row, JSON carries a schema version."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_cell(row[c]) for c in report.columns])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": report.command,
            "columns": list(report.columns),
            "rows": [{c: row[c] for c in report.columns} for row in report.rows],
            "notes": report.notes,
            "errors": report.errors,
            "exit_code": report.exit_code,
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="secrecy-capacity",
        description="Outage and secrecy transmission capacity of noisy Poisson networks.",
    )
    parser.add_argument("command", choices=("validate", "sweep", "condition"))
    parser.add_argument("--config", required=True, help="YAML experiment file")
    parser.add_argument("--seed", type=int, help="override mc.seed")
    parser.add_argument("--trials", type=int, help="override mc.trials")
    parser.add_argument("--out", help="output path (default: config output.path or stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="override output.format")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    mc = config.mc
    if args.seed is not None or args.trials is not None:
        mc = mc or McSettings()
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer", field="--seed")
            mc = replace(mc, seed=args.seed)
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("trials must be >= 1", field="--trials")
            mc = replace(mc, trials=args.trials)
    output = config.output
    if args.out is not None:
        output = replace(output, path=args.out)
    if args.format is not None:
        output = replace(output, format=args.format)
    return replace(config, mc=mc, output=output)


def main(argv: Optional[list] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = _apply_overrides(load_config(args.config), args)
        if args.command == "validate":
            report = cmd_validate(config, args.jobs)
        elif args.command == "sweep":
            report = cmd_sweep(config, args.jobs)
        else:
            report = cmd_condition(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = render(report, config.output.format)
    if config.output.path:
        with open(config.output.path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for note in report.notes:
        log.warning("note: %s", note)
    for err in report.errors:
        log.error("%s", err)
    if report.command == "validate" and report.failures:
        log.error("%d of %d points failed validation", report.failures, len(report.rows))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
