"""Scenario configuration: JSON schema, defaults, validation and round-trip
serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

from .archmodel import ArchitectureKind, CommSizes, DEFAULT_BANDWIDTH_BPS, InferenceParams
from .orbits import GroundStation, ShellConfig


class Experiment(str, Enum):
    LATENCY_TABLE = "latency-table"
    TRAINING_CURVE = "training-curve"
    RTT_SCAN = "rtt-scan"


DEFAULT_STATIONS = (
    GroundStation("Paris", 48.85, 2.35),
    GroundStation("Chicago", 41.88, -87.63),
    GroundStation("Tokyo", 35.68, 139.69),
)


class ConfigError(Exception):
    """Base class; ``key`` names the offending entry when there is one."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ConfigNotFoundError(ConfigError):
    pass


class ConfigSyntaxError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


@dataclass(frozen=True)
class DatasetSettings:
    num_samples: int = 2500
    dim: int = 16
    num_classes: int = 3


@dataclass(frozen=True)
class TrainSettings:
    """Training-curve experiment: one centralized baseline plus one
    federated run per entry of ``n_clients``."""

    n_clients: tuple[int, ...] = (1, 10, 50)
    rounds: int = 200
    local_epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 0.1
    compute_ms_per_batch: float = 5.0
    ground_speedup: float = 16.0
    hidden_units: int = 0
    holdout_fraction: float = 0.2
    target_accuracy: float = 0.85
    bandwidth_bps: float = DEFAULT_BANDWIDTH_BPS
    gs_index: int = 0
    # None: as many telemetry sources as the largest federated run
    baseline_sources: int | None = None
    dataset: DatasetSettings = field(default_factory=DatasetSettings)


@dataclass(frozen=True)
class ScenarioConfig:
    experiment: Experiment
    architecture: ArchitectureKind = ArchitectureKind.CENTRALIZED
    shell: ShellConfig = field(default_factory=ShellConfig)
    stations: tuple[GroundStation, ...] = DEFAULT_STATIONS
    inference: InferenceParams = field(default_factory=InferenceParams)
    alpha_low: float = 0.1
    alpha_high: float = 0.7
    train: TrainSettings | None = None
    comm_sizes: CommSizes = field(default_factory=CommSizes)
    ns: tuple[int, ...] = (1, 10, 100)
    scan_step_s: float = 60.0
    # None: one orbital period of the shell
    scan_duration_s: float | None = None
    seam_links: bool = True
    seed: int = 0
    output_dir: str = "out"

    def with_overrides(self, **changes: Any) -> ScenarioConfig:
        return replace(self, **changes)


# --- parsing helpers -------------------------------------------------------


def _keys(obj: Any, allowed: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where or 'config'}: expected a JSON object", where or None)
    for k in obj:
        if k not in allowed:
            name = f"{where}.{k}" if where else k
            raise SchemaError(f"unknown key {name!r}", name)
    return obj


def _num(obj: dict, key: str, where: str, default, *, lo=None, hi=None, lo_open=False, integer=False):
    name = f"{where}.{key}" if where else key
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{name!r} must be a number, got {v!r}", name)
    if integer and not isinstance(v, int):
        raise SchemaError(f"{name!r} must be an integer, got {v!r}", name)
    if not math.isfinite(v):
        raise SchemaError(f"{name!r} must be finite", name)
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise SchemaError(f"{name!r} = {v} is below its allowed range", name)
    if hi is not None and v > hi:
        raise SchemaError(f"{name!r} = {v} is above its allowed range", name)
    return v


def _int_list(obj: dict, key: str, where: str, default: tuple[int, ...]) -> tuple[int, ...]:
    name = f"{where}.{key}" if where else key
    if key not in obj:
        return default
    v = obj[key]
    if not isinstance(v, list) or not v:
        raise SchemaError(f"{name!r} must be a nonempty list of integers", name)
    for x in v:
        if isinstance(x, bool) or not isinstance(x, int) or x < 1:
            raise SchemaError(f"{name!r} entries must be integers >= 1, got {x!r}", name)
    return tuple(v)


def _enum(obj: dict, key: str, enum_cls, default):
    if key not in obj:
        return default
    try:
        return enum_cls(obj[key])
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise SchemaError(f"{key!r} must be one of {allowed}, got {obj[key]!r}", key) from None


def _parse_shell(obj: Any) -> ShellConfig:
    d = _keys(obj, {"altitude_km", "inclination_deg", "num_planes", "sats_per_plane", "phasing_factor"}, "shell")
    base = ShellConfig()
    planes = _num(d, "num_planes", "shell", base.num_planes, lo=3, integer=True)
    shell = ShellConfig(
        altitude_km=_num(d, "altitude_km", "shell", base.altitude_km, lo=0, lo_open=True),
        inclination_deg=_num(d, "inclination_deg", "shell", base.inclination_deg, lo=0, hi=180),
        num_planes=planes,
        sats_per_plane=_num(d, "sats_per_plane", "shell", base.sats_per_plane, lo=3, integer=True),
        phasing_factor=_num(d, "phasing_factor", "shell", base.phasing_factor, lo=0, hi=planes - 1, integer=True),
    )
    return shell


def _parse_stations(obj: Any) -> tuple[GroundStation, ...]:
    if not isinstance(obj, list) or not obj:
        raise SchemaError("'stations' must be a nonempty list", "stations")
    out = []
    for i, st in enumerate(obj):
        where = f"stations[{i}]"
        d = _keys(st, {"name", "latitude_deg", "longitude_deg", "min_elevation_deg"}, where)
        for req in ("name", "latitude_deg", "longitude_deg"):
            if req not in d:
                raise SchemaError(f"missing required key '{where}.{req}'", f"{where}.{req}")
        if not isinstance(d["name"], str) or not d["name"]:
            raise SchemaError(f"'{where}.name' must be a nonempty string", f"{where}.name")
        out.append(
            GroundStation(
                name=d["name"],
                latitude_deg=_num(d, "latitude_deg", where, None, lo=-90, hi=90),
                longitude_deg=_num(d, "longitude_deg", where, None, lo=-180, hi=180),
                min_elevation_deg=_num(d, "min_elevation_deg", where, 25.0, lo=0, hi=89.999999),
            )
        )
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise SchemaError("station names must be unique", "stations")
    return tuple(out)


def _parse_inference(obj: Any) -> tuple[InferenceParams, float, float]:
    w = "inference"
    d = _keys(
        obj,
        {
            "rtt_ms",
            "gs_inference_latency_ms",
            "onboard_inference_latency_ms",
            "alpha",
            "alpha_low",
            "alpha_high",
            "batch_per_satellite",
        },
        w,
    )
    base = InferenceParams()
    if "alpha" in d:
        if "alpha_low" in d or "alpha_high" in d:
            raise SchemaError("'inference.alpha' cannot be combined with alpha_low/alpha_high", "inference.alpha")
        a = _num(d, "alpha", w, None, lo=0, lo_open=True, hi=1)
        lo = hi = a
    else:
        lo = _num(d, "alpha_low", w, 0.1, lo=0, lo_open=True, hi=1)
        hi = _num(d, "alpha_high", w, 0.7, lo=0, lo_open=True, hi=1)
        if lo > hi:
            raise SchemaError("'inference.alpha_low' must not exceed 'inference.alpha_high'", "inference.alpha_low")
    params = InferenceParams(
        rtt_ms=_num(d, "rtt_ms", w, base.rtt_ms, lo=0, lo_open=True),
        gs_inference_latency_ms=_num(d, "gs_inference_latency_ms", w, base.gs_inference_latency_ms, lo=0, lo_open=True),
        onboard_inference_latency_ms=_num(
            d, "onboard_inference_latency_ms", w, base.onboard_inference_latency_ms, lo=0, lo_open=True
        ),
        alpha=hi,
        batch_per_satellite=_num(d, "batch_per_satellite", w, base.batch_per_satellite, lo=1, integer=True),
    )
    return params, lo, hi


def _parse_comm(obj: Any) -> CommSizes:
    w = "comm_sizes"
    d = _keys(obj, {"telemetry_bytes", "model_bytes", "gradient_bytes"}, w)
    base = CommSizes()
    return CommSizes(
        telemetry_bytes=_num(d, "telemetry_bytes", w, base.telemetry_bytes, lo=0, integer=True),
        model_bytes=_num(d, "model_bytes", w, base.model_bytes, lo=0, integer=True),
        gradient_bytes=_num(d, "gradient_bytes", w, base.gradient_bytes, lo=0, integer=True),
    )


def _parse_train(obj: Any) -> TrainSettings:
    w = "train"
    base = TrainSettings()
    d = _keys(obj, {f for f in TrainSettings.__dataclass_fields__}, w)
    ds_obj = _keys(d.get("dataset", {}), set(DatasetSettings.__dataclass_fields__), "train.dataset")
    dsb = DatasetSettings()
    dataset = DatasetSettings(
        num_samples=_num(ds_obj, "num_samples", "train.dataset", dsb.num_samples, lo=2, integer=True),
        dim=_num(ds_obj, "dim", "train.dataset", dsb.dim, lo=1, integer=True),
        num_classes=_num(ds_obj, "num_classes", "train.dataset", dsb.num_classes, lo=1, integer=True),
    )
    if dataset.num_classes > dataset.num_samples:
        raise SchemaError("'train.dataset.num_classes' exceeds num_samples", "train.dataset.num_classes")
    baseline = d.get("baseline_sources")
    if baseline is not None:
        baseline = _num(d, "baseline_sources", w, None, lo=1, integer=True)
    return TrainSettings(
        n_clients=_int_list(d, "n_clients", w, base.n_clients),
        rounds=_num(d, "rounds", w, base.rounds, lo=0, integer=True),
        local_epochs=_num(d, "local_epochs", w, base.local_epochs, lo=1, integer=True),
        batch_size=_num(d, "batch_size", w, base.batch_size, lo=1, integer=True),
        learning_rate=_num(d, "learning_rate", w, base.learning_rate, lo=0, lo_open=True),
        compute_ms_per_batch=_num(d, "compute_ms_per_batch", w, base.compute_ms_per_batch, lo=0, lo_open=True),
        ground_speedup=_num(d, "ground_speedup", w, base.ground_speedup, lo=0, lo_open=True),
        hidden_units=_num(d, "hidden_units", w, base.hidden_units, lo=0, integer=True),
        holdout_fraction=_num(d, "holdout_fraction", w, base.holdout_fraction, lo=0, lo_open=True, hi=0.99),
        target_accuracy=_num(d, "target_accuracy", w, base.target_accuracy, lo=0, hi=1),
        bandwidth_bps=_num(d, "bandwidth_bps", w, base.bandwidth_bps, lo=0, lo_open=True),
        gs_index=_num(d, "gs_index", w, base.gs_index, lo=0, integer=True),
        baseline_sources=baseline,
        dataset=dataset,
    )


TOP_LEVEL_KEYS = {
    "experiment",
    "architecture",
    "shell",
    "stations",
    "inference",
    "train",
    "comm_sizes",
    "ns",
    "scan",
    "seam_links",
    "seed",
    "output_dir",
}


def parse_config(obj: Any) -> ScenarioConfig:
    """Validate a decoded JSON document and apply defaults."""
    d = _keys(obj, TOP_LEVEL_KEYS, "")
    if "experiment" not in d:
        raise SchemaError("missing required key 'experiment'", "experiment")
    experiment = _enum(d, "experiment", Experiment, None)
    architecture = _enum(d, "architecture", ArchitectureKind, ArchitectureKind.CENTRALIZED)
    shell = _parse_shell(d["shell"]) if "shell" in d else ShellConfig()
    stations = _parse_stations(d["stations"]) if "stations" in d else DEFAULT_STATIONS
    if "inference" in d:
        inference, alpha_low, alpha_high = _parse_inference(d["inference"])
    else:
        inference, alpha_low, alpha_high = InferenceParams(), 0.1, 0.7
    if experiment is Experiment.TRAINING_CURVE and "train" not in d:
        raise SchemaError("experiment 'training-curve' requires a 'train' section", "train")
    train = _parse_train(d["train"]) if "train" in d else None
    if train is not None:
        if train.gs_index >= len(stations):
            raise SchemaError("'train.gs_index' does not name a configured station", "train.gs_index")
        if max(train.n_clients) > shell.total:
            raise SchemaError("'train.n_clients' exceeds the number of satellites", "train.n_clients")
    comm = _parse_comm(d["comm_sizes"]) if "comm_sizes" in d else CommSizes()
    scan = _keys(d.get("scan", {}), {"step_s", "duration_s"}, "scan")
    duration = scan.get("duration_s")
    if duration is not None:
        duration = _num(scan, "duration_s", "scan", None, lo=0, lo_open=True)
    seam = d.get("seam_links", True)
    if not isinstance(seam, bool):
        raise SchemaError("'seam_links' must be true or false", "seam_links")
    out_dir = d.get("output_dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise SchemaError("'output_dir' must be a nonempty string", "output_dir")
    return ScenarioConfig(
        experiment=experiment,
        architecture=architecture,
        shell=shell,
        stations=stations,
        inference=inference,
        alpha_low=alpha_low,
        alpha_high=alpha_high,
        train=train,
        comm_sizes=comm,
        ns=_int_list(d, "ns", "", (1, 10, 100)),
        scan_step_s=_num(scan, "step_s", "scan", 60.0, lo=0, lo_open=True),
        scan_duration_s=duration,
        seam_links=seam,
        seed=_num(d, "seed", "", 0, integer=True),
        output_dir=out_dir,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigNotFoundError(f"config file not found: {path}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(obj)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    s = cfg.shell
    inf = cfg.inference
    d: dict[str, Any] = {
        "experiment": cfg.experiment.value,
        "architecture": cfg.architecture.value,
        "shell": {
            "altitude_km": s.altitude_km,
            "inclination_deg": s.inclination_deg,
            "num_planes": s.num_planes,
            "sats_per_plane": s.sats_per_plane,
            "phasing_factor": s.phasing_factor,
        },
        "stations": [
            {
                "name": g.name,
                "latitude_deg": g.latitude_deg,
                "longitude_deg": g.longitude_deg,
                "min_elevation_deg": g.min_elevation_deg,
            }
            for g in cfg.stations
        ],
        "inference": {
            "rtt_ms": inf.rtt_ms,
            "gs_inference_latency_ms": inf.gs_inference_latency_ms,
            "onboard_inference_latency_ms": inf.onboard_inference_latency_ms,
            "alpha_low": cfg.alpha_low,
            "alpha_high": cfg.alpha_high,
            "batch_per_satellite": inf.batch_per_satellite,
        },
        "comm_sizes": {
            "telemetry_bytes": cfg.comm_sizes.telemetry_bytes,
            "model_bytes": cfg.comm_sizes.model_bytes,
            "gradient_bytes": cfg.comm_sizes.gradient_bytes,
        },
        "ns": list(cfg.ns),
        "scan": {"step_s": cfg.scan_step_s},
        "seam_links": cfg.seam_links,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }
    if cfg.scan_duration_s is not None:
        d["scan"]["duration_s"] = cfg.scan_duration_s
    if cfg.train is not None:
        t = cfg.train
        train = {k: getattr(t, k) for k in TrainSettings.__dataclass_fields__ if k != "dataset"}
        train["n_clients"] = list(t.n_clients)
        if t.baseline_sources is None:
            del train["baseline_sources"]
        train["dataset"] = {
            "num_samples": t.dataset.num_samples,
            "dim": t.dataset.dim,
            "num_classes": t.dataset.num_classes,
        }
        d["train"] = train
    return d


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")
