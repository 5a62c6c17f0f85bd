"""Scenario files, sweep handling and result tables.

Scenarios are UTF-8 JSON with SI units only (meters, radians, watts);
decibel values appear in outputs.  Parsing errors carry the dotted path of
the offending field.  Result tables serialize as RFC-4180 CSV with a
``#``-prefixed provenance header (seed, scenario hash, tool version) or as a
JSON mirror; nothing in an output depends on wall-clock time, so reruns with
the same seed are byte-identical.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .fading import AnyChannel, BeamSpec, ChannelSpec, DirectChannelSpec, ObstructionSpec
from .geometry import JitterSpec, LinkGeometry
from .montecarlo import McConfig
from .performance import SystemSpec

SWEEP_VARIABLES = ("P_t_dBm", "eta", "N")
ESTIMATORS = ("asymptotic", "quadrature", "monte-carlo")
DEFAULT_GAMMA_TH_DB = 5.0


class ScenarioError(ValueError):
    """Configuration problem, annotated with the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _need(data: dict, key: str, path: str):
    if key not in data:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing required field")
    return data[key]


def _number(data: dict, key: str, path: str) -> float:
    value = _need(data, key, path)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioError(f"{path}.{key}", f"expected a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ScenarioError(f"{path}.{key}", "must be finite")
    return float(value)


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.variable == "N":
            return np.arange(int(self.start), int(self.stop) + 1, dtype=float)
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class Scenario:
    name: str
    channels: tuple[AnyChannel, ...]
    alphas: tuple[float, ...]
    p_t: float
    sigma_n_sq: float
    sweep: SweepSpec
    mc: McConfig
    gamma_th_db: float = DEFAULT_GAMMA_TH_DB
    outputs: tuple[str, ...] = ESTIMATORS  # estimators to include in tables

    def base_system(self) -> SystemSpec:
        return SystemSpec(
            channels=self.channels,
            alphas=self.alphas,
            p_t=self.p_t,
            sigma_n_sq=self.sigma_n_sq,
        )

    def system_at(self, value: float) -> SystemSpec:
        """System for one sweep point."""
        if self.sweep.variable == "P_t_dBm":
            p_t = 10.0 ** ((value - 30.0) / 10.0)
            return SystemSpec(self.channels, self.alphas, p_t, self.sigma_n_sq)
        if self.sweep.variable == "eta":
            channels = tuple(
                _with_eta(channel, float(value)) for channel in self.channels
            )
            return SystemSpec(channels, self.alphas, self.p_t, self.sigma_n_sq)
        count = int(round(value))
        template = self.channels[0]
        return SystemSpec(
            (template,) * count, (1.0 / count,) * count, self.p_t, self.sigma_n_sq
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "system": {
                "channels": [_channel_to_dict(c) for c in self.channels],
                "alphas": list(self.alphas),
                "p_t": self.p_t,
                "sigma_n_sq": self.sigma_n_sq,
            },
            "sweep": {
                "variable": self.sweep.variable,
                "start": self.sweep.start,
                "stop": self.sweep.stop,
                "points": self.sweep.points,
                "spacing": self.sweep.spacing,
            },
            "mc": {
                "trials": self.mc.trials,
                "seed": self.mc.seed,
                "chunk_size": self.mc.chunk_size,
                "estimator": self.mc.estimator,
            },
            "gamma_th_db": self.gamma_th_db,
            "outputs": list(self.outputs),
        }


def _with_eta(channel: AnyChannel, eta: float) -> AnyChannel:
    return dataclasses.replace(channel, obstruction=ObstructionSpec(eta))


def _channel_to_dict(channel: AnyChannel) -> dict:
    if isinstance(channel, ChannelSpec):
        return {
            "kind": "reflected",
            "w": channel.geometry.w,
            "l": channel.geometry.l,
            "incidence_angle": channel.geometry.incidence_angle,
            "sigma_theta": channel.jitter.sigma_theta,
            "sigma_beta": channel.jitter.sigma_beta,
            "aperture_radius": channel.beam.aperture_radius,
            "divergence": channel.beam.divergence,
            "eta": channel.obstruction.eta,
        }
    return {
        "kind": "direct",
        "length": channel.length,
        "sigma_theta": channel.sigma_theta,
        "aperture_radius": channel.beam.aperture_radius,
        "divergence": channel.beam.divergence,
        "eta": channel.obstruction.eta,
    }


def _parse_channel(data: dict, path: str) -> AnyChannel:
    if not isinstance(data, dict):
        raise ScenarioError(path, "expected an object")
    kind = data.get("kind", "reflected")
    beam = BeamSpec(
        aperture_radius=_number(data, "aperture_radius", path),
        divergence=_number(data, "divergence", path),
    )
    obstruction = ObstructionSpec(eta=_number(data, "eta", path))
    try:
        if kind == "reflected":
            geom = LinkGeometry(
                w=_number(data, "w", path),
                l=_number(data, "l", path),
                incidence_angle=float(data.get("incidence_angle", math.pi / 4.0)),
            )
            jitter = JitterSpec(
                sigma_theta=_number(data, "sigma_theta", path),
                sigma_beta=_number(data, "sigma_beta", path),
            )
            return ChannelSpec(geom, jitter, beam, obstruction)
        if kind == "direct":
            return DirectChannelSpec(
                length=_number(data, "length", path),
                sigma_theta=_number(data, "sigma_theta", path),
                beam=beam,
                obstruction=obstruction,
            )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from exc
    raise ScenarioError(f"{path}.kind", f"must be 'reflected' or 'direct', got {kind!r}")


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("", "scenario must be a JSON object")
    name = _need(data, "name", "")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", "must be a nonempty string")

    system = _need(data, "system", "")
    if not isinstance(system, dict):
        raise ScenarioError("system", "expected an object")
    raw_channels = _need(system, "channels", "system")
    if not isinstance(raw_channels, list) or not raw_channels:
        raise ScenarioError("system.channels", "expected a nonempty list")
    channels = tuple(
        _parse_channel(c, f"system.channels[{i}]") for i, c in enumerate(raw_channels)
    )
    raw_alphas = _need(system, "alphas", "system")
    if not isinstance(raw_alphas, list):
        raise ScenarioError("system.alphas", "expected a list")
    alphas = tuple(float(a) for a in raw_alphas)
    p_t = _number(system, "p_t", "system")
    sigma_n_sq = _number(system, "sigma_n_sq", "system")

    raw_sweep = _need(data, "sweep", "")
    if not isinstance(raw_sweep, dict):
        raise ScenarioError("sweep", "expected an object")
    variable = _need(raw_sweep, "variable", "sweep")
    if variable not in SWEEP_VARIABLES:
        raise ScenarioError("sweep.variable", f"must be one of {SWEEP_VARIABLES}")
    spacing = raw_sweep.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ScenarioError("sweep.spacing", f"must be 'linear' or 'log', got {spacing!r}")
    sweep = SweepSpec(
        variable=variable,
        start=_number(raw_sweep, "start", "sweep"),
        stop=_number(raw_sweep, "stop", "sweep"),
        points=int(_number(raw_sweep, "points", "sweep")),
        spacing=spacing,
    )
    if sweep.points < 2:
        raise ScenarioError("sweep.points", f"need at least 2 points, got {sweep.points}")
    if variable == "N":
        if len(channels) != 1:
            raise ScenarioError(
                "system.channels", "a branch-count sweep needs exactly one template channel"
            )
        expected = int(sweep.stop) - int(sweep.start) + 1
        if int(sweep.start) < 1 or expected < 2:
            raise ScenarioError("sweep.start", "branch counts must start at >= 1")
        if sweep.points != expected:
            raise ScenarioError(
                "sweep.points", f"must equal stop - start + 1 = {expected} for integer sweeps"
            )

    raw_mc = data.get("mc", {})
    if not isinstance(raw_mc, dict):
        raise ScenarioError("mc", "expected an object")
    try:
        mc = McConfig(
            trials=int(raw_mc.get("trials", 1_000_000)),
            seed=int(raw_mc.get("seed", 42)),
            chunk_size=int(raw_mc.get("chunk_size", 1 << 16)),
            estimator=raw_mc.get("estimator", "semi-analytic"),
        )
    except ValueError as exc:
        raise ScenarioError("mc", str(exc)) from exc

    gamma_th_db = float(data.get("gamma_th_db", DEFAULT_GAMMA_TH_DB))

    raw_outputs = data.get("outputs", list(ESTIMATORS))
    if not isinstance(raw_outputs, list) or not raw_outputs:
        raise ScenarioError("outputs", "expected a nonempty list of estimator names")
    for i, est in enumerate(raw_outputs):
        if est not in ESTIMATORS:
            raise ScenarioError(f"outputs[{i}]", f"must be one of {ESTIMATORS}")

    try:
        scenario = Scenario(
            name=name,
            channels=channels,
            alphas=alphas,
            p_t=p_t,
            sigma_n_sq=sigma_n_sq,
            sweep=sweep,
            mc=mc,
            gamma_th_db=gamma_th_db,
            outputs=tuple(raw_outputs),
        )
        scenario.base_system()  # run SystemSpec validation now, with a path
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("system", str(exc)) from exc
    return scenario


def scenario_hash(scenario: Scenario) -> str:
    canonical = json.dumps(scenario.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_scenario(ref: str) -> Scenario:
    """Load a scenario from a path or from the shipped set by name."""
    if os.path.exists(ref):
        with open(ref, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError("", f"invalid JSON in {ref}: {exc}") from exc
        return parse_scenario(data)
    name = ref.removesuffix(".json")
    packaged = resources.files("rislink").joinpath(f"scenarios/{name}.json")
    if packaged.is_file():
        data = json.loads(packaged.read_text(encoding="utf-8"))
        return parse_scenario(data)
    raise ScenarioError(
        "scenario", f"{ref!r} is neither a file nor a shipped scenario name"
    )


def shipped_scenarios() -> list[str]:
    root = resources.files("rislink").joinpath("scenarios")
    return sorted(p.name.removesuffix(".json") for p in root.iterdir()
                  if p.name.endswith(".json"))


# --- result tables ----------------------------------------------------------


@dataclass(frozen=True)
class ResultTable:
    """Rectangular numeric/text table plus reproducibility provenance."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    provenance: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row of width {len(row)} in a {len(self.columns)}-column table"
                )
        if not self.provenance:
            raise ValueError("provenance block must not be empty")

    def _format_cell(self, value) -> str:
        if isinstance(value, str):
            return value
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            return str(int(value))
        return repr(float(value))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.provenance:
            buf.write(f"# {key}={value}\r\n")
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(self._format_cell(v) for v in row)
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {
            "provenance": dict(self.provenance),
            "columns": list(self.columns),
            "rows": [list(row) for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2) + "\n"

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]
