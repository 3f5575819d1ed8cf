import csv
import io
import json
import re

import pytest

from leosec.config import Experiment, ScenarioConfig, TrainSettings, DatasetSettings
from leosec.fedsim import RoundRecord, TrainingTrace
from leosec.harness import rtt_scan, run_scenario
from leosec.orbits import GroundStation, ShellConfig
from leosec.svg import emit_svg_curve, render_svg
from leosec.topology import SPEED_OF_LIGHT_KM_S


def _read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_latency_table_scenario(tmp_path):
    report = run_scenario(ScenarioConfig(Experiment.LATENCY_TABLE, output_dir=str(tmp_path)))
    rows = _read_csv(tmp_path / "latency_table.csv")
    central = {int(r["n_satellites"]): (float(r["latency_low_ms"]), float(r["latency_high_ms"])) for r in rows if r["architecture"] == "centralized"}
    assert central == {1: (125.64, 125.64), 10: (125.64, 134.28), 100: (138.6, 225.0)}
    assert all(p.exists() and p.stat().st_size > 0 for p in report.files)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary) >= {"tool_version", "scenario", "files", "stats"}
    assert summary["files"] == ["latency_table.csv"]
    assert summary["stats"]["centralized"]["min"] == 125.64


def test_latency_table_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_scenario(ScenarioConfig(Experiment.LATENCY_TABLE, output_dir=str(a)))
    run_scenario(ScenarioConfig(Experiment.LATENCY_TABLE, output_dir=str(b)))
    assert (a / "latency_table.csv").read_bytes() == (b / "latency_table.csv").read_bytes()


def _small_training(tmp_path, **kw):
    train = TrainSettings(
        n_clients=(1, 10, 50),
        rounds=15,
        dataset=DatasetSettings(num_samples=1000, dim=4, num_classes=3),
        **kw,
    )
    return ScenarioConfig(Experiment.TRAINING_CURVE, train=train, output_dir=str(tmp_path))


def test_training_curve_scenario(tmp_path):
    report = run_scenario(_small_training(tmp_path))
    names = sorted(p.name for p in report.files)
    for n in (1, 10, 50):
        assert f"trace_federated-n{n}.csv" in names
    assert "trace_centralized.csv" in names
    assert {"time_to_accuracy.csv", "training_curve.svg", "summary.json"} <= set(names)
    tta = _read_csv(tmp_path / "time_to_accuracy.csv")
    assert [r["label"] for r in tta] == ["centralized", "federated-n1", "federated-n10", "federated-n50"]
    for name in names:
        if name.startswith("trace_"):
            rows = _read_csv(tmp_path / name)
            assert list(rows[0]) == ["round", "accuracy", "elapsed_ms", "exposure_bytes"]
            assert len(rows) == 16


def test_training_curve_distributed_baseline(tmp_path):
    cfg = _small_training(tmp_path)
    from dataclasses import replace
    from leosec.archmodel import ArchitectureKind

    report = run_scenario(replace(cfg, architecture=ArchitectureKind.DISTRIBUTED))
    assert any(p.name == "trace_distributed.csv" for p in report.files)


def test_failure_removes_partial_outputs(tmp_path):
    # the baseline and n=2 traces get written, then n=900 cannot be
    # partitioned from 160 training samples
    cfg = ScenarioConfig(
        Experiment.TRAINING_CURVE,
        train=TrainSettings(n_clients=(2, 900), rounds=2, dataset=DatasetSettings(200, 2, 2)),
        output_dir=str(tmp_path),
    )
    with pytest.raises(ValueError, match="cannot split"):
        run_scenario(cfg)
    assert list(tmp_path.iterdir()) == []


def test_unreachable_station_is_runtime_error(tmp_path):
    cfg = ScenarioConfig(
        Experiment.TRAINING_CURVE,
        stations=(GroundStation("pole", 90.0, 0.0),),
        train=TrainSettings(n_clients=(2,), rounds=2, dataset=DatasetSettings(200, 2, 2)),
        output_dir=str(tmp_path),
    )
    with pytest.raises(LookupError):
        run_scenario(cfg)
    assert list(tmp_path.iterdir()) == []


# --- rtt scan ------------------------------------------------------------


def test_rtt_scan_rows_sorted_and_bounded(tmp_path):
    shell = ShellConfig(num_planes=12, sats_per_plane=12)
    cfg = ScenarioConfig(Experiment.RTT_SCAN, shell=shell, scan_duration_s=600.0, scan_step_s=120.0)
    scan = rtt_scan(cfg)
    assert scan.steps == 5
    keys = [(t, s) for t, s, _, _ in scan.rows]
    assert keys == sorted(keys)
    floor = 2 * 630.0 / SPEED_OF_LIGHT_KM_S * 1000.0
    assert all(r[3] >= floor for r in scan.rows)


def test_rtt_scan_reflection_symmetry():
    # station at (lat 0, lon 0): rotating by pi about the x axis maps slot
    # (p, s) to (-p, -s) and fixes the station
    shell = ShellConfig(num_planes=8, sats_per_plane=8)
    cfg = ScenarioConfig(
        Experiment.RTT_SCAN, shell=shell, stations=(GroundStation("eq", 0.0, 0.0),), scan_duration_s=1.0
    )
    rtt = {s: r for t, s, _, r in rtt_scan(cfg).rows}
    assert len(rtt) == 64
    for p in range(8):
        for s in range(8):
            mirror = ((-p) % 8) * 8 + (-s) % 8
            assert abs(rtt[p * 8 + s] - rtt[mirror]) < 1e-6


def test_rtt_scan_counts_blind_steps(tmp_path):
    cfg = ScenarioConfig(
        Experiment.RTT_SCAN,
        shell=ShellConfig(num_planes=6, sats_per_plane=6),
        stations=(GroundStation("pole", 90.0, 0.0),),
        scan_duration_s=300.0,
        output_dir=str(tmp_path),
    )
    report = run_scenario(cfg)
    assert report.warnings == report.stats["steps"] == 5
    assert (tmp_path / "rtt_scan.csv").read_text().strip() == "t_s,satellite,station,rtt_ms"


# --- svg -----------------------------------------------------------------


def _trace_file(tmp_path, name, points):
    tr = TrainingTrace(name)
    for i, (x, y) in enumerate(points):
        tr.append(RoundRecord(i, y, x, 0))
    p = tmp_path / f"{name}.csv"
    p.write_text(tr.to_csv())
    return p


def test_svg_single_two_point_trace(tmp_path):
    f = _trace_file(tmp_path, "a", [(0.0, 0.3), (10.0, 0.9)])
    svg = emit_svg_curve([f], tmp_path / "c.svg").read_text()
    polylines = re.findall(r'<polyline[^>]*points="([^"]*)"', svg)
    assert len(polylines) == 1
    assert len(polylines[0].split()) == 2
    assert "accuracy" in svg and "elapsed_ms" in svg


def test_svg_two_traces_distinct_legends(tmp_path):
    files = [_trace_file(tmp_path, "alpha", [(0, 0.1), (5, 0.5)]), _trace_file(tmp_path, "beta", [(0, 0.2), (7, 0.8)])]
    svg = emit_svg_curve(files, tmp_path / "c.svg").read_text()
    assert svg.count("<polyline") == 2
    assert ">alpha<" in svg and ">beta<" in svg
    strokes = re.findall(r'<polyline fill="none" stroke="([^"]+)"', svg)
    assert len(set(strokes)) == 2


def test_svg_deterministic(tmp_path):
    f = _trace_file(tmp_path, "a", [(0.0, 0.3), (3.3, 0.5), (10.0, 0.9)])
    a = emit_svg_curve([f], tmp_path / "1.svg").read_bytes()
    b = emit_svg_curve([f], tmp_path / "2.svg").read_bytes()
    assert a == b


def test_svg_empty_trace_diagnostic(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("round,accuracy,elapsed_ms,exposure_bytes\n")
    with pytest.raises(ValueError, match="no rows"):
        emit_svg_curve([p], tmp_path / "c.svg")
    with pytest.raises(ValueError):
        emit_svg_curve([], tmp_path / "c.svg")
    with pytest.raises(ValueError):
        render_svg([TrainingTrace("x")])
