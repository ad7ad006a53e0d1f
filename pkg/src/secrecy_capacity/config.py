"""Experiment configuration files (YAML with one mapping per section).

Example::

    network:   {tx_density: 0.01, eve_density: 0.001, alpha: 4, power: 1}
    noise:     {kind: constant, power: 0.001}
    scheme:    {kind: fixed, distance: 1}
    constraints: {sigma: 0.05, epsilon: 0.1}
    thresholds:  {beta_t: 0.5, beta_e: 0.1}
    sweep:     {axis: noise_power, logspace: {start: 1e-5, stop: 1e-1, num: 20}}
    mc:        {metric: cop, trials: 100000, seed: 1}
    output:    {path: out.csv, format: csv}

``network`` also accepts ``density`` plus ``aloha_p`` instead of the two
per-role densities. ``sweep.values`` may be given explicitly instead of
``logspace`` / ``linspace``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .model import (
    ConstantNoise,
    ExponentialNoise,
    FixedDistance,
    NearestReceiver,
    NetworkParams,
    NoiseModel,
    OutageConstraints,
    TransmissionScheme,
)

__all__ = [
    "ConfigError",
    "SWEEP_AXES",
    "Sweep",
    "McSettings",
    "OutputSettings",
    "OperatingPoint",
    "ExperimentConfig",
    "load_config",
    "parse_config",
]

SWEEP_AXES = (
    "noise_power",
    "tx_density",
    "eve_density",
    "rx_density",
    "distance",
    "sigma",
    "epsilon",
    "beta_t",
    "beta_e",
    "alpha",
    "power",
)
METRICS = ("cop", "sop")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration, with the offending field and source line when known."""

    def __init__(self, message, field=None, line=None, source=None):
        self.field = field
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line:
            where += f"{line}:"
        if field:
            where += f" {field}:" if where else f"{field}:"
        super().__init__(f"{where} {message}".strip())


@dataclass(frozen=True)
class Sweep:
    axis: str
    values: tuple


@dataclass(frozen=True)
class McSettings:
    metric: str = "cop"
    trials: int = 100_000
    seed: int = 0


@dataclass(frozen=True)
class OutputSettings:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class OperatingPoint:
    """Everything the analytic and simulation paths need at one sweep value."""

    network: NetworkParams
    noise: NoiseModel
    scheme: TransmissionScheme
    constraints: OutageConstraints
    beta_t: float
    beta_e: float


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkParams
    noise: NoiseModel
    scheme: TransmissionScheme
    constraints: OutageConstraints
    beta_t: float = 0.5
    beta_e: float = 0.1
    sweep: Optional[Sweep] = None
    mc: Optional[McSettings] = None
    output: OutputSettings = field(default_factory=OutputSettings)

    def base_point(self) -> OperatingPoint:
        return OperatingPoint(
            self.network, self.noise, self.scheme, self.constraints, self.beta_t, self.beta_e
        )

    def point(self, value: float) -> OperatingPoint:
        """Operating point with the sweep axis set to ``value``."""
        if self.sweep is None:
            raise ConfigError("no sweep configured", field="sweep")
        return _apply(self.base_point(), self.sweep.axis, float(value))

    def points(self):
        return [self.point(v) for v in self.sweep.values]

    def to_mapping(self) -> dict:
        """Plain-data form; ``parse_config(cfg.to_mapping()) == cfg``."""
        net = self.network
        out: dict[str, Any] = {
            "network": {
                "tx_density": net.tx_density,
                "rx_density": net.rx_density,
                "eve_density": net.eve_density,
                "alpha": net.alpha,
                "power": net.power,
            },
            "noise": _noise_to_mapping(self.noise),
            "scheme": (
                {"kind": "fixed", "distance": self.scheme.distance}
                if isinstance(self.scheme, FixedDistance)
                else {"kind": "nearest", "rx_density": self.scheme.rx_density}
            ),
            "constraints": {"sigma": self.constraints.sigma, "epsilon": self.constraints.epsilon},
            "thresholds": {"beta_t": self.beta_t, "beta_e": self.beta_e},
        }
        if self.sweep is not None:
            out["sweep"] = {"axis": self.sweep.axis, "values": list(self.sweep.values)}
        if self.mc is not None:
            out["mc"] = {"metric": self.mc.metric, "trials": self.mc.trials, "seed": self.mc.seed}
        out["output"] = {"path": self.output.path, "format": self.output.format}
        return out

    def dump(self) -> str:
        return yaml.safe_dump(self.to_mapping(), sort_keys=False)


def _noise_to_mapping(noise):
    if isinstance(noise, ConstantNoise):
        return {"kind": "constant", "power": noise.power}
    if isinstance(noise, ExponentialNoise):
        return {"kind": "exponential", "mean": noise.mean}
    raise ConfigError(f"noise model {noise!r} cannot be written to a config file", field="noise")


def _apply(pt: OperatingPoint, axis: str, value: float) -> OperatingPoint:
    net, noise, scheme = pt.network, pt.noise, pt.scheme
    if axis == "noise_power":
        if isinstance(noise, ConstantNoise):
            return replace(pt, noise=ConstantNoise(value))
        return replace(pt, noise=ExponentialNoise(value))
    if axis in ("tx_density", "eve_density", "alpha", "power"):
        return replace(pt, network=net.with_(**{axis: value}))
    if axis == "rx_density":
        if isinstance(scheme, NearestReceiver):
            scheme = NearestReceiver(value)
        return replace(pt, network=net.with_(rx_density=value), scheme=scheme)
    if axis == "distance":
        if not isinstance(scheme, FixedDistance):
            raise ConfigError("distance sweep needs a fixed-distance scheme", field="sweep.axis")
        return replace(pt, scheme=FixedDistance(value))
    if axis == "sigma":
        return replace(pt, constraints=replace(pt.constraints, sigma=value))
    if axis == "epsilon":
        return replace(pt, constraints=replace(pt.constraints, epsilon=value))
    if axis in ("beta_t", "beta_e"):
        return replace(pt, **{axis: value})
    raise ConfigError(f"unknown sweep axis {axis!r}", field="sweep.axis")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _line_index(node, prefix=(), index=None):
    """Map key paths to 1-based source lines from a composed YAML node tree."""
    if index is None:
        index = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = prefix + (str(key_node.value),)
            index[path] = key_node.start_mark.line + 1
            _line_index(value_node, path, index)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            index[prefix + (str(i),)] = item.start_mark.line + 1
            _line_index(item, prefix + (str(i),), index)
    return index


class _Reader:
    def __init__(self, data, lines, source):
        self.data = data
        self.lines = lines
        self.source = source

    def error(self, message, *path):
        line = None
        for k in range(len(path), 0, -1):
            line = self.lines.get(tuple(path[:k]))
            if line:
                break
        return ConfigError(message, field=".".join(path) or None, line=line, source=self.source)

    def section(self, name, required=True):
        value = self.data.get(name)
        if value is None:
            if required:
                raise self.error("missing section", name)
            return None
        if not isinstance(value, dict):
            raise self.error("section must be a mapping", name)
        return value

    def number(self, sec, key, default=None, required=True):
        mapping = self.data.get(sec) or {}
        if key not in mapping:
            if default is not None or not required:
                return default
            raise self.error("missing value", sec, key)
        value = mapping[key]
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise self.error(f"expected a number, got {value!r}", sec, key)
        try:
            value = float(value)
        except ValueError:
            raise self.error(f"expected a number, got {value!r}", sec, key) from None
        if not math.isfinite(value):
            raise self.error("value must be finite", sec, key)
        return value

    def integer(self, sec, key, default):
        mapping = self.data.get(sec) or {}
        value = mapping.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(f"expected an integer, got {value!r}", sec, key)
        return value

    def choice(self, sec, key, options, default=None):
        mapping = self.data.get(sec) or {}
        value = mapping.get(key, default)
        if value not in options:
            raise self.error(f"expected one of {', '.join(options)}, got {value!r}", sec, key)
        return value

    def build(self, fn, *path):
        try:
            return fn()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise self.error(str(exc), *path) from None


def _parse_network(r):
    r.section("network")
    sec = r.data["network"]
    eve = r.number("network", "eve_density", 0.0)
    alpha = r.number("network", "alpha", 4.0)
    power = r.number("network", "power", 1.0)
    if "density" in sec or "aloha_p" in sec:
        if "tx_density" in sec:
            raise r.error("give either tx_density or density + aloha_p, not both", "network")
        density = r.number("network", "density")
        p = r.number("network", "aloha_p")
        return r.build(
            lambda: NetworkParams.from_aloha(density, p, eve, alpha, power), "network"
        )
    tx = r.number("network", "tx_density")
    rx = r.number("network", "rx_density", required=False)
    return r.build(lambda: NetworkParams(tx, eve, alpha, power, rx), "network")


def _parse_noise(r):
    r.section("noise")
    kind = r.choice("noise", "kind", ("constant", "exponential"), "constant")
    if kind == "constant":
        w = r.number("noise", "power")
        return r.build(lambda: ConstantNoise(w), "noise", "power")
    mean = r.number("noise", "mean")
    return r.build(lambda: ExponentialNoise(mean), "noise", "mean")


def _parse_scheme(r, net):
    r.section("scheme")
    kind = r.choice("scheme", "kind", ("fixed", "nearest"), "fixed")
    if kind == "fixed":
        L = r.number("scheme", "distance", 1.0)
        return r.build(lambda: FixedDistance(L), "scheme", "distance")
    lam_r = r.number("scheme", "rx_density", net.rx_density)
    return r.build(lambda: NearestReceiver(lam_r), "scheme", "rx_density")


def _parse_sweep(r):
    sec = r.section("sweep", required=False)
    if sec is None:
        return None
    axis = r.choice("sweep", "axis", SWEEP_AXES)
    given = [k for k in ("values", "logspace", "linspace") if k in sec]
    if len(given) != 1:
        raise r.error("give exactly one of values, logspace, linspace", "sweep")
    kind = given[0]
    if kind == "values":
        raw = sec["values"]
        if not isinstance(raw, list):
            raise r.error("values must be a list", "sweep", "values")
        values = []
        for i, v in enumerate(raw):
            if isinstance(v, bool) or not isinstance(v, (int, float, str)):
                raise r.error(f"expected a number, got {v!r}", "sweep", "values", str(i))
            try:
                values.append(float(v))
            except ValueError:
                raise r.error(f"expected a number, got {v!r}", "sweep", "values", str(i)) from None
    else:
        spec = sec[kind]
        if not isinstance(spec, dict) or set(spec) != {"start", "stop", "num"}:
            raise r.error("expected a mapping with start, stop, num", "sweep", kind)
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (TypeError, ValueError):
            raise r.error("start/stop must be numbers and num an integer", "sweep", kind) from None
        if num < 1:
            raise r.error("num must be >= 1", "sweep", kind)
        if kind == "logspace":
            if start <= 0 or stop <= 0:
                raise r.error("logspace bounds must be positive", "sweep", kind)
            values = np.logspace(math.log10(start), math.log10(stop), num)
        else:
            values = np.linspace(start, stop, num)
        values = [float(v) for v in values]
    if not values:
        raise r.error("sweep needs at least one value", "sweep", kind)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise r.error("sweep values must be strictly increasing", "sweep", kind)
    return Sweep(axis, tuple(values))


def _parse_mc(r):
    if r.section("mc", required=False) is None:
        return None
    metric = r.choice("mc", "metric", METRICS, "cop")
    trials = r.integer("mc", "trials", 100_000 if metric == "cop" else 10_000)
    seed = r.integer("mc", "seed", 0)
    if trials < 1:
        raise r.error("trials must be >= 1", "mc", "trials")
    if not 0 <= seed < 2**64:
        raise r.error("seed must be an unsigned 64-bit integer", "mc", "seed")
    return McSettings(metric, trials, seed)


def _parse_output(r):
    sec = r.section("output", required=False) or {}
    path = sec.get("path")
    if path is not None and not isinstance(path, str):
        raise r.error("path must be a string", "output", "path")
    fmt = r.choice("output", "format", FORMATS, "csv")
    return OutputSettings(path, fmt)


_SECTIONS = {"network", "noise", "scheme", "constraints", "thresholds", "sweep", "mc", "output"}


def parse_config(data, lines=None, source=None) -> ExperimentConfig:
    """Validate a plain mapping (as loaded from YAML) into an :class:`ExperimentConfig`."""
    r = _Reader(data if data is not None else {}, lines or {}, source)
    if not isinstance(r.data, dict):
        raise ConfigError("top level must be a mapping", source=source)
    unknown = sorted(set(r.data) - _SECTIONS)
    if unknown:
        raise r.error(f"unknown section {unknown[0]!r}", unknown[0])
    net = _parse_network(r)
    noise = _parse_noise(r)
    scheme = _parse_scheme(r, net)
    r.section("constraints")
    sigma = r.number("constraints", "sigma")
    epsilon = r.number("constraints", "epsilon")
    constraints = r.build(lambda: OutageConstraints(sigma, epsilon), "constraints")
    beta_t = r.number("thresholds", "beta_t", 0.5)
    beta_e = r.number("thresholds", "beta_e", 0.1)
    for key, value in (("beta_t", beta_t), ("beta_e", beta_e)):
        if value <= 0:
            raise r.error("threshold must be positive", "thresholds", key)
    cfg = ExperimentConfig(
        network=net,
        noise=noise,
        scheme=scheme,
        constraints=constraints,
        beta_t=beta_t,
        beta_e=beta_e,
        sweep=_parse_sweep(r),
        mc=_parse_mc(r),
        output=_parse_output(r),
    )
    if cfg.sweep is not None:
        # every swept point must itself be valid
        for i, v in enumerate(cfg.sweep.values):
            r.build(lambda v=v: cfg.point(v), "sweep", "values", str(i))
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"YAML syntax error: {problem}", line=line, source=str(path)) from None
    lines = _line_index(node) if node is not None else {}
    return parse_config(data, lines, str(path))
