"""Analytic workload models for the centralized, distributed and federated
security-AI architectures: inference latency, per-round training
communication time and raw-telemetry exposure."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .topology import LinkGraph, NodeId, NodeKind, NoPathError, latencies_from

DEFAULT_BANDWIDTH_BPS = 100e6


class ArchitectureKind(str, Enum):
    CENTRALIZED = "centralized"
    DISTRIBUTED = "distributed"
    FEDERATED = "federated"


@dataclass(frozen=True)
class InferenceParams:
    """Inference-latency inputs. Defaults are the measured testbed constants
    (RTT 124.2 ms, 1.44 ms GS inference, 23.75 ms on-board inference)."""

    rtt_ms: float = 124.2
    gs_inference_latency_ms: float = 1.44
    onboard_inference_latency_ms: float = 23.75
    alpha: float = 0.7
    batch_per_satellite: int = 128

    def __post_init__(self) -> None:
        for name in ("rtt_ms", "gs_inference_latency_ms", "onboard_inference_latency_ms"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.batch_per_satellite < 1:
            raise ValueError("batch_per_satellite must be >= 1")


@dataclass(frozen=True)
class CommSizes:
    telemetry_bytes: int = 1_000_000
    model_bytes: int = 1_000_000
    gradient_bytes: int = 1_000_000

    def __post_init__(self) -> None:
        for name in ("telemetry_bytes", "model_bytes", "gradient_bytes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class LatencyReport:
    architecture: ArchitectureKind
    n_satellites: int
    alpha_low: float
    alpha_high: float
    latency_low_ms: float
    latency_high_ms: float

    def __post_init__(self) -> None:
        if self.latency_low_ms > self.latency_high_ms:
            raise ValueError("latency_low_ms must not exceed latency_high_ms")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"number of satellites must be >= 1, got {n}")


def centralized_inference_latency(p: InferenceParams, n: int) -> float:
    """RTT plus the ground-model term ``gs_latency * max(1, alpha * n)``.

    A request always pays at least one full ground inference; ``alpha * n``
    scales it once concurrent load from ``n`` satellites exceeds one request.
    """
    _check_n(n)
    return p.rtt_ms + p.gs_inference_latency_ms * max(1.0, p.alpha * n)


def federated_inference_latency(p: InferenceParams, n: int) -> float:
    _check_n(n)
    return p.onboard_inference_latency_ms


def distributed_inference_latency(p: InferenceParams, n: int) -> float:
    # inference runs on board, exactly as in the federated design
    return federated_inference_latency(p, n)


_INFERENCE = {
    ArchitectureKind.CENTRALIZED: centralized_inference_latency,
    ArchitectureKind.DISTRIBUTED: distributed_inference_latency,
    ArchitectureKind.FEDERATED: federated_inference_latency,
}


def inference_latency(kind: ArchitectureKind, p: InferenceParams, n: int) -> float:
    return _INFERENCE[kind](p, n)


def latency_table(
    p: InferenceParams,
    ns: Sequence[int],
    alpha_low: float = 0.1,
    alpha_high: float = 0.7,
) -> list[LatencyReport]:
    """One row per (architecture, n), architectures in enum order."""
    if not ns:
        raise ValueError("ns must be nonempty")
    if not 0.0 < alpha_low <= alpha_high <= 1.0:
        raise ValueError(f"need 0 < alpha_low <= alpha_high <= 1, got {alpha_low}, {alpha_high}")
    lo = _with_alpha(p, alpha_low)
    hi = _with_alpha(p, alpha_high)
    rows = []
    for kind in ArchitectureKind:
        for n in ns:
            rows.append(
                LatencyReport(
                    architecture=kind,
                    n_satellites=n,
                    alpha_low=alpha_low,
                    alpha_high=alpha_high,
                    latency_low_ms=inference_latency(kind, lo, n),
                    latency_high_ms=inference_latency(kind, hi, n),
                )
            )
    return rows


def _with_alpha(p: InferenceParams, alpha: float) -> InferenceParams:
    return InferenceParams(
        rtt_ms=p.rtt_ms,
        gs_inference_latency_ms=p.gs_inference_latency_ms,
        onboard_inference_latency_ms=p.onboard_inference_latency_ms,
        alpha=alpha,
        batch_per_satellite=p.batch_per_satellite,
    )


LATENCY_CSV_COLUMNS = (
    "architecture",
    "n_satellites",
    "alpha_low",
    "alpha_high",
    "latency_low_ms",
    "latency_high_ms",
)


def latency_rows_to_csv(rows: Iterable[LatencyReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LATENCY_CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.architecture.value,
                r.n_satellites,
                repr(r.alpha_low),
                repr(r.alpha_high),
                f"{r.latency_low_ms:.6f}",
                f"{r.latency_high_ms:.6f}",
            ]
        )
    return buf.getvalue()


def latency_rows_from_csv(text: str) -> list[LatencyReport]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != LATENCY_CSV_COLUMNS:
        raise ValueError(f"unexpected latency CSV header {reader.fieldnames}")
    return [
        LatencyReport(
            architecture=ArchitectureKind(row["architecture"]),
            n_satellites=int(row["n_satellites"]),
            alpha_low=float(row["alpha_low"]),
            alpha_high=float(row["alpha_high"]),
            latency_low_ms=float(row["latency_low_ms"]),
            latency_high_ms=float(row["latency_high_ms"]),
        )
        for row in reader
    ]


class UnreachableSatelliteError(NoPathError):
    def __init__(self, sat: NodeId, gs: NodeId):
        super().__init__(gs, sat)
        self.args = (f"satellite {sat} cannot reach ground node {gs}",)
        self.satellite = sat


def transmission_ms(n_bytes: int, bandwidth_bps: float) -> float:
    return n_bytes * 8.0 / bandwidth_bps * 1000.0


def training_round_comm_ms(
    kind: ArchitectureKind,
    graph: LinkGraph,
    gs_node: NodeId,
    sizes: CommSizes,
    bandwidth_bps: float = DEFAULT_BANDWIDTH_BPS,
    satellites: Sequence[NodeId] | None = None,
) -> float:
    """Communication time of one synchronous training round.

    Every participating satellite ships its payload (telemetry, or a
    gradient for the federated design) to ``gs_node``; the round waits for
    the slowest one. The distributed and federated designs then push the
    model back down, again waiting for the slowest receiver.

    ``satellites`` restricts the participants; by default every satellite in
    the graph takes part.
    """
    if not bandwidth_bps > 0:
        raise ValueError("bandwidth_bps must be > 0")
    if gs_node not in graph.nodes:
        raise KeyError(f"{gs_node} is not in the graph")
    sats = list(satellites) if satellites is not None else graph.satellites()
    if not sats:
        raise ValueError("graph has no satellites")
    dist = latencies_from(graph, gs_node)
    one_way = []
    for sat in sats:
        if sat.kind is not NodeKind.SATELLITE:
            raise ValueError(f"{sat} is not a satellite")
        if sat not in dist:
            raise UnreachableSatelliteError(sat, gs_node)
        one_way.append(dist[sat])
    upload = sizes.gradient_bytes if kind is ArchitectureKind.FEDERATED else sizes.telemetry_bytes
    total = max(d + transmission_ms(upload, bandwidth_bps) for d in one_way)
    if kind is not ArchitectureKind.CENTRALIZED:
        total += max(d + transmission_ms(sizes.model_bytes, bandwidth_bps) for d in one_way)
    return total


def telemetry_exposure_bytes(kind: ArchitectureKind, sizes: CommSizes, n: int, rounds: int) -> int:
    """Raw telemetry bytes that leave the space segment."""
    _check_n(n)
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    if kind is ArchitectureKind.FEDERATED:
        return 0
    return n * rounds * sizes.telemetry_bytes
