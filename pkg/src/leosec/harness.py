"""Experiment orchestration: dispatch a scenario, write its CSV / SVG / JSON
outputs atomically, and summarise them in a :class:`Report`."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from .archmodel import ArchitectureKind, latency_rows_to_csv, latency_table
from .config import Experiment, ScenarioConfig, config_to_dict
from .fedsim import (
    CommParams,
    TargetNotReachedError,
    TrainConfig,
    TrainingTrace,
    make_synthetic,
    run_centralized,
    run_federated,
    time_to_accuracy,
)
from .svg import emit_svg_curve
from .topology import latencies_from, snapshot

log = logging.getLogger(__name__)

RTT_CSV_COLUMNS = ("t_s", "satellite", "station", "rtt_ms")


@dataclass
class Report:
    scenario: dict
    files: list[Path]
    stats: dict[str, Any]
    tool_version: str = __version__
    warnings: int = 0


class _Outputs:
    """Write-temp-then-rename file sink that can roll back what it wrote."""

    def __init__(self, directory: Path):
        self.dir = directory
        self.files: list[Path] = []

    def write(self, name: str, text: str) -> Path:
        path = self.dir / name
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text)
        tmp.replace(path)
        self.files.append(path)
        return path

    def adopt(self, path: Path) -> None:
        self.files.append(path)

    def rollback(self) -> None:
        for p in self.files:
            p.unlink(missing_ok=True)
            p.with_name(p.name + ".tmp").unlink(missing_ok=True)


def _stats(values: list[float]) -> dict[str, float | int | None]:
    if not values:
        return {"count": 0, "min": None, "max": None, "mean": None}
    return {
        "count": len(values),
        "min": round(min(values), 6),
        "max": round(max(values), 6),
        "mean": round(math.fsum(values) / len(values), 6),
    }


# --- rtt scan --------------------------------------------------------------


@dataclass
class RttScan:
    rows: list[tuple[float, int, str, float]] = field(default_factory=list)
    steps: int = 0
    steps_without_station: int = 0


def rtt_scan(cfg: ScenarioConfig) -> RttScan:
    """Per-step RTT from every satellite to its nearest (lowest-RTT) station.

    Steps run from ``t = 0`` every ``scan_step_s`` over ``scan_duration_s``
    (one orbital period by default). A step in which no station sees any
    satellite yields no rows and is counted in ``steps_without_station``.
    """
    if not cfg.stations:
        raise ValueError("rtt scan needs at least one ground station")
    duration = cfg.scan_duration_s if cfg.scan_duration_s is not None else cfg.shell.period_s()
    n_steps = math.ceil(duration / cfg.scan_step_s - 1e-9)
    result = RttScan()
    for k in range(n_steps):
        t = k * cfg.scan_step_s
        graph = snapshot(cfg.shell, cfg.stations, t, seam_links=cfg.seam_links)
        result.steps += 1
        grounds = graph.grounds()
        per_station = [latencies_from(graph, g) for g in grounds]
        if all(len(d) == 1 for d in per_station):
            result.steps_without_station += 1
            log.warning("t=%s s: no station sees any satellite", t)
            continue
        for sat in graph.satellites():
            best = None
            for gi, dist in enumerate(per_station):
                if sat in dist and (best is None or dist[sat] < best[1]):
                    best = (gi, dist[sat])
            if best is not None:
                result.rows.append((t, sat.index, cfg.stations[best[0]].name, 2.0 * best[1]))
    return result


def rtt_rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RTT_CSV_COLUMNS)
    for t, sat, station, rtt in rows:
        w.writerow([f"{t:g}", sat, station, f"{rtt:.6f}"])
    return buf.getvalue()


# --- experiments -----------------------------------------------------------


def _run_latency_table(cfg: ScenarioConfig, out: _Outputs) -> dict:
    rows = latency_table(cfg.inference, list(cfg.ns), cfg.alpha_low, cfg.alpha_high)
    out.write("latency_table.csv", latency_rows_to_csv(rows))
    central = [v for r in rows if r.architecture is ArchitectureKind.CENTRALIZED for v in (r.latency_low_ms, r.latency_high_ms)]
    return {
        "metric": "latency_ms",
        "all": _stats([v for r in rows for v in (r.latency_low_ms, r.latency_high_ms)]),
        "centralized": _stats(central),
        "federated": _stats(
            [r.latency_low_ms for r in rows if r.architecture is ArchitectureKind.FEDERATED]
        ),
    }


def _tta_entry(trace: TrainingTrace, n: int, target: float, baseline_ms: float | None) -> dict:
    try:
        t = time_to_accuracy(trace, target)
    except TargetNotReachedError as exc:
        return {
            "label": trace.label,
            "n_clients": n,
            "reached": False,
            "time_to_accuracy_ms": None,
            "rounds_to_target": None,
            "best_accuracy": exc.best_accuracy,
            "final_accuracy": trace.final_accuracy,
            "ratio_vs_baseline": None,
        }
    rounds = next(r.round for r in trace.records if r.accuracy >= target)
    ratio = t / baseline_ms if baseline_ms else None
    return {
        "label": trace.label,
        "n_clients": n,
        "reached": True,
        "time_to_accuracy_ms": round(t, 6),
        "rounds_to_target": rounds,
        "best_accuracy": trace.best_accuracy,
        "final_accuracy": trace.final_accuracy,
        "ratio_vs_baseline": None if ratio is None else round(ratio, 6),
    }


def _tta_csv(entries: list[dict], target: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["label", "n_clients", "target", "time_to_accuracy_ms", "rounds_to_target", "final_accuracy", "ratio_vs_baseline"]
    )
    for e in entries:
        w.writerow(
            [
                e["label"],
                e["n_clients"],
                target,
                "" if e["time_to_accuracy_ms"] is None else f"{e['time_to_accuracy_ms']:.6f}",
                "" if e["rounds_to_target"] is None else e["rounds_to_target"],
                f"{e['final_accuracy']:.6f}",
                "" if e["ratio_vs_baseline"] is None else f"{e['ratio_vs_baseline']:.6f}",
            ]
        )
    return buf.getvalue()


def train_configs(cfg: ScenarioConfig) -> tuple[TrainConfig, list[TrainConfig]]:
    """Baseline and per-N federated :class:`TrainConfig` objects for a
    training-curve scenario."""
    ts = cfg.train
    if ts is None:
        raise ValueError("scenario has no train section")
    comm = CommParams(
        shell=cfg.shell,
        stations=cfg.stations,
        gs_index=ts.gs_index,
        sizes=cfg.comm_sizes,
        bandwidth_bps=ts.bandwidth_bps,
    )
    common = dict(
        rounds=ts.rounds,
        local_epochs=ts.local_epochs,
        batch_size=ts.batch_size,
        learning_rate=ts.learning_rate,
        seed=cfg.seed,
        compute_ms_per_batch=ts.compute_ms_per_batch,
        ground_speedup=ts.ground_speedup,
        hidden_units=ts.hidden_units,
        holdout_fraction=ts.holdout_fraction,
        comm=comm,
    )
    base_kind = (
        cfg.architecture if cfg.architecture is not ArchitectureKind.FEDERATED else ArchitectureKind.CENTRALIZED
    )
    baseline = TrainConfig(
        n_clients=ts.baseline_sources or max(ts.n_clients), arch=base_kind, **common
    )
    federated = [TrainConfig(n_clients=n, arch=ArchitectureKind.FEDERATED, **common) for n in ts.n_clients]
    return baseline, federated


def _run_training_curve(cfg: ScenarioConfig, out: _Outputs) -> dict:
    ts = cfg.train
    ds = make_synthetic(ts.dataset.num_samples, ts.dataset.dim, ts.dataset.num_classes, cfg.seed)
    base_cfg, fl_cfgs = train_configs(cfg)
    baseline = run_centralized(ds, base_cfg)
    trace_files = [out.write(f"trace_{baseline.label}.csv", baseline.to_csv())]
    base_entry = _tta_entry(baseline, base_cfg.n_clients, ts.target_accuracy, None)
    base_ms = base_entry["time_to_accuracy_ms"]
    base_entry["ratio_vs_baseline"] = 1.0 if base_ms else None
    entries = [base_entry]
    for fc in fl_cfgs:
        trace = run_federated(ds, fc)
        trace_files.append(out.write(f"trace_{trace.label}.csv", trace.to_csv()))
        entries.append(_tta_entry(trace, fc.n_clients, ts.target_accuracy, base_ms))
    out.write("time_to_accuracy.csv", _tta_csv(entries, ts.target_accuracy))
    svg_path = out.dir / "training_curve.svg"
    out.adopt(emit_svg_curve(trace_files, svg_path))
    return {
        "metric": "accuracy",
        "final_accuracy": _stats([e["final_accuracy"] for e in entries]),
        "target_accuracy": ts.target_accuracy,
        "time_to_accuracy": entries,
    }


def _run_rtt_scan(cfg: ScenarioConfig, out: _Outputs) -> tuple[dict, int]:
    scan = rtt_scan(cfg)
    out.write("rtt_scan.csv", rtt_rows_to_csv(scan.rows))
    rtts = [r[3] for r in scan.rows]
    stats = {"metric": "rtt_ms", "rtt_ms": _stats(rtts), "steps": scan.steps, "steps_without_station": scan.steps_without_station}
    if rtts:
        stats["configured_rtt_ms"] = cfg.inference.rtt_ms
        stats["configured_rtt_in_envelope"] = min(rtts) <= cfg.inference.rtt_ms <= max(rtts)
    return stats, scan.steps_without_station


def run_scenario(cfg: ScenarioConfig) -> Report:
    """Run one scenario into ``cfg.output_dir``; on failure, remove whatever
    this run had already written and re-raise."""
    directory = Path(cfg.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    out = _Outputs(directory)
    warnings = 0
    try:
        if cfg.experiment is Experiment.LATENCY_TABLE:
            stats = _run_latency_table(cfg, out)
        elif cfg.experiment is Experiment.TRAINING_CURVE:
            stats = _run_training_curve(cfg, out)
        else:
            stats, warnings = _run_rtt_scan(cfg, out)
        scenario = config_to_dict(cfg)
        summary = {
            "tool_version": __version__,
            "scenario": scenario,
            "files": [p.name for p in out.files],
            "stats": stats,
            "warnings": warnings,
        }
        out.write("summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except BaseException:
        out.rollback()
        raise
    return Report(scenario=scenario, files=list(out.files), stats=stats, warnings=warnings)

