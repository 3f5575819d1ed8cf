"""Desk-scale training comparison: pooled (ground) SGD against synchronous
FedAvg over IID shards, on a simulated clock that adds per-batch compute
time to the link-level communication time of each round."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .archmodel import (
    DEFAULT_BANDWIDTH_BPS,
    ArchitectureKind,
    CommSizes,
    telemetry_exposure_bytes,
    training_round_comm_ms,
)
from .orbits import EARTH, EarthModel, GroundStation, ShellConfig
from .topology import LinkGraph, latencies_from, snapshot

BLOB_SEPARATION = 3.0


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if len(self.features) != len(self.labels):
            raise ValueError("features and labels must have the same number of rows")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, idx: np.ndarray) -> Dataset:
        return Dataset(self.features[idx], self.labels[idx], self.num_classes)


def _class_means(dim: int, num_classes: int) -> np.ndarray:
    """Class centres with pairwise (or, on a line, neighbour) distance
    ``BLOB_SEPARATION``.

    When ``num_classes - 1 <= dim`` the centres form a regular simplex
    expressed in Helmert coordinates; otherwise they sit evenly spaced on the
    first axis.
    """
    K = num_classes
    means = np.zeros((K, dim))
    if K - 1 <= dim:
        # Helmert rows: orthonormal, orthogonal to the all-ones vector
        for j in range(1, K):
            h = np.zeros(K)
            h[:j] = 1.0
            h[j] = -j
            means[:, j - 1] = h / math.sqrt(j * (j + 1))
        means *= BLOB_SEPARATION / math.sqrt(2.0)
    else:
        means[:, 0] = BLOB_SEPARATION * (np.arange(K) - (K - 1) / 2.0)
    return means


def make_synthetic(num_samples: int, dim: int, num_classes: int, seed: int) -> Dataset:
    """Balanced Gaussian blobs with unit within-class variance."""
    if min(num_samples, dim, num_classes) < 1:
        raise ValueError("num_samples, dim and num_classes must be >= 1")
    if num_classes > num_samples:
        raise ValueError("num_classes must not exceed num_samples")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(num_samples) % num_classes)
    features = _class_means(dim, num_classes)[labels] + rng.standard_normal((num_samples, dim))
    return Dataset(features, labels.astype(np.int64), num_classes)


def partition_iid(ds: Dataset, n: int, seed: int) -> list[Dataset]:
    """Seeded shuffle, then round-robin deal into ``n`` shards.

    Rows inside a shard keep their original relative order, so ``n = 1``
    returns ``ds`` unchanged.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > len(ds):
        raise ValueError(f"cannot split {len(ds)} samples into {n} shards")
    perm = np.random.default_rng(seed).permutation(len(ds))
    return [ds.subset(np.sort(perm[k::n])) for k in range(n)]


def train_test_split(ds: Dataset, holdout_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError("holdout_fraction must lie in (0, 1)")
    n_test = max(1, int(round(len(ds) * holdout_fraction)))
    if n_test >= len(ds):
        raise ValueError("holdout leaves no training data")
    perm = np.random.default_rng([seed, 1]).permutation(len(ds))
    return ds.subset(np.sort(perm[n_test:])), ds.subset(np.sort(perm[:n_test]))


@dataclass(frozen=True)
class Layout:
    """Multinomial logistic regression when ``hidden_units == 0``, otherwise
    a one-hidden-layer tanh perceptron."""

    input_dim: int
    num_classes: int
    hidden_units: int = 0

    @property
    def size(self) -> int:
        d, K, H = self.input_dim, self.num_classes, self.hidden_units
        if H == 0:
            return d * K + K
        return d * H + H + H * K + K


@dataclass(frozen=True, eq=False)
class Model:
    weights: np.ndarray
    layout: Layout

    def __post_init__(self) -> None:
        if self.weights.shape != (self.layout.size,):
            raise ValueError(f"expected {self.layout.size} weights, got shape {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("model weights must be finite")


def init_model(layout: Layout, seed: int = 0) -> Model:
    if layout.hidden_units == 0:
        return Model(np.zeros(layout.size), layout)
    rng = np.random.default_rng(seed)
    return Model(rng.uniform(-0.1, 0.1, size=layout.size), layout)


def _unpack(w: np.ndarray, layout: Layout):
    d, K, H = layout.input_dim, layout.num_classes, layout.hidden_units
    if H == 0:
        return w[: d * K].reshape(d, K), w[d * K :]
    o = 0
    W1 = w[o : o + d * H].reshape(d, H)
    o += d * H
    b1 = w[o : o + H]
    o += H
    W2 = w[o : o + H * K].reshape(H, K)
    o += H * K
    return W1, b1, W2, w[o:]


def _logits(model: Model, X: np.ndarray) -> np.ndarray:
    parts = _unpack(model.weights, model.layout)
    if model.layout.hidden_units == 0:
        W, b = parts
        return X @ W + b
    W1, b1, W2, b2 = parts
    return np.tanh(X @ W1 + b1) @ W2 + b2


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _check_dim(model: Model, X: np.ndarray) -> None:
    if X.shape[1] != model.layout.input_dim:
        raise ValueError(
            f"model expects {model.layout.input_dim} features, data has {X.shape[1]}"
        )


def loss_and_grad(model: Model, X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to the flat weights."""
    _check_dim(model, X)
    layout = model.layout
    n = len(y)
    onehot = np.zeros((n, layout.num_classes))
    onehot[np.arange(n), y] = 1.0
    parts = _unpack(model.weights, layout)
    if layout.hidden_units == 0:
        W, b = parts
        P = _softmax(X @ W + b)
        G = (P - onehot) / n
        grad = np.concatenate([(X.T @ G).ravel(), G.sum(axis=0)])
    else:
        W1, b1, W2, b2 = parts
        h = np.tanh(X @ W1 + b1)
        P = _softmax(h @ W2 + b2)
        G = (P - onehot) / n
        dz = (G @ W2.T) * (1.0 - h * h)
        grad = np.concatenate(
            [(X.T @ dz).ravel(), dz.sum(axis=0), (h.T @ G).ravel(), G.sum(axis=0)]
        )
    loss = -float(np.mean(np.log(np.clip(P[np.arange(n), y], 1e-300, None))))
    return loss, grad


def loss(model: Model, ds: Dataset) -> float:
    return loss_and_grad(model, ds.features, ds.labels)[0]


def local_train(
    model: Model, shard: Dataset, epochs: int, batch_size: int, lr: float, seed: int
) -> Model:
    """Mini-batch SGD; returns a new model and leaves ``model`` untouched."""
    if len(shard) == 0:
        raise ValueError("cannot train on an empty shard")
    rng = np.random.default_rng(seed)
    w = model.weights.copy()
    n = len(shard)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            _, g = loss_and_grad(Model(w, model.layout), shard.features[idx], shard.labels[idx])
            w = w - lr * g
    return Model(w, model.layout)


def fedavg(updates: Sequence[Model], weights: Sequence[float]) -> Model:
    """Weighted element-wise mean of ``updates``, weights normalised to 1."""
    if not updates:
        raise ValueError("need at least one update")
    if len(weights) != len(updates):
        raise ValueError("weights and updates differ in length")
    layout = updates[0].layout
    if any(m.layout != layout for m in updates):
        raise ValueError("all updates must share one layout")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not w.sum() > 0:
        raise ValueError("weights must be nonnegative with a positive sum")
    w = w / w.sum()
    stack = np.stack([m.weights for m in updates])
    base = stack[0]
    # anchored form keeps identical inputs exact; clip absorbs rounding
    avg = base + w @ (stack - base)
    return Model(np.clip(avg, stack.min(axis=0), stack.max(axis=0)), layout)


def predict(model: Model, X: np.ndarray) -> np.ndarray:
    _check_dim(model, X)
    # argmax resolves ties toward the smallest class index
    return np.argmax(_logits(model, X), axis=1)


def evaluate(model: Model, ds: Dataset) -> float:
    if len(ds) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    return float(np.mean(predict(model, ds.features) == ds.labels))


@dataclass(frozen=True)
class CommParams:
    """Link-level inputs for the per-round communication time.

    Participants are the ``n_clients`` satellites with the lowest one-way
    latency to the aggregation station (ties by index) in the snapshot at
    ``t_s``.
    """

    shell: ShellConfig = field(default_factory=ShellConfig)
    stations: tuple[GroundStation, ...] = ()
    gs_index: int = 0
    t_s: float = 0.0
    sizes: CommSizes = field(default_factory=CommSizes)
    bandwidth_bps: float = DEFAULT_BANDWIDTH_BPS
    earth: EarthModel = EARTH

    def graph(self) -> LinkGraph:
        if not self.stations:
            raise ValueError("CommParams needs at least one ground station")
        return snapshot(self.shell, self.stations, self.t_s, self.earth)

    def round_comm_ms(self, kind: ArchitectureKind, n_clients: int) -> float:
        graph = self.graph()
        gs = graph.grounds()[self.gs_index]
        if n_clients > self.shell.total:
            raise ValueError(f"{n_clients} clients exceed the {self.shell.total} satellites of the shell")
        dist = latencies_from(graph, gs)
        ranked = sorted(graph.satellites(), key=lambda s: (dist.get(s, math.inf), s))
        return training_round_comm_ms(
            kind, graph, gs, self.sizes, self.bandwidth_bps, satellites=ranked[:n_clients]
        )


@dataclass(frozen=True)
class TrainConfig:
    n_clients: int = 10
    rounds: int = 30
    local_epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 0.1
    seed: int = 0
    compute_ms_per_batch: float = 5.0
    ground_speedup: float = 16.0
    hidden_units: int = 0
    holdout_fraction: float = 0.2
    arch: ArchitectureKind = ArchitectureKind.FEDERATED
    comm: CommParams | None = None

    def __post_init__(self) -> None:
        for name in ("n_clients", "local_epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not self.compute_ms_per_batch > 0 or not self.ground_speedup > 0:
            raise ValueError("compute_ms_per_batch and ground_speedup must be > 0")
        if self.hidden_units < 0:
            raise ValueError("hidden_units must be >= 0")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    accuracy: float
    elapsed_ms: float
    exposure_bytes: int


TRACE_CSV_COLUMNS = ("round", "accuracy", "elapsed_ms", "exposure_bytes")


@dataclass
class TrainingTrace:
    label: str
    records: list[RoundRecord] = field(default_factory=list)
    weights: list[np.ndarray] = field(default_factory=list, repr=False)

    def append(self, record: RoundRecord, w: np.ndarray | None = None) -> None:
        if self.records and not record.elapsed_ms > self.records[-1].elapsed_ms:
            raise ValueError("elapsed_ms must increase strictly across rounds")
        if not 0.0 <= record.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")
        self.records.append(record)
        if w is not None:
            self.weights.append(w.copy())

    @property
    def final_accuracy(self) -> float:
        return self.records[-1].accuracy

    @property
    def best_accuracy(self) -> float:
        return max(r.accuracy for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_CSV_COLUMNS)
        for r in self.records:
            writer.writerow([r.round, f"{r.accuracy:.6f}", f"{r.elapsed_ms:.6f}", r.exposure_bytes])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, label: str = "") -> TrainingTrace:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != TRACE_CSV_COLUMNS:
            raise ValueError(f"unexpected trace CSV header {reader.fieldnames}")
        records = [
            RoundRecord(
                int(row["round"]),
                float(row["accuracy"]),
                float(row["elapsed_ms"]),
                int(row["exposure_bytes"]),
            )
            for row in reader
        ]
        return cls(label, records)


class TargetNotReachedError(RuntimeError):
    def __init__(self, target: float, best_accuracy: float):
        super().__init__(f"target accuracy {target} never reached (best {best_accuracy:.4f})")
        self.target = target
        self.best_accuracy = best_accuracy


def time_to_accuracy(trace: TrainingTrace, target: float) -> float:
    """Simulated elapsed time of the first record with accuracy >= ``target``."""
    if not 0.0 <= target <= 1.0:
        raise ValueError("target must lie in [0, 1]")
    for r in trace.records:
        if r.accuracy >= target:
            return r.elapsed_ms
    raise TargetNotReachedError(target, trace.best_accuracy if trace.records else 0.0)


def _round_seed(seed: int, rnd: int, client: int) -> int:
    return int(np.random.SeedSequence([seed, rnd, client]).generate_state(1)[0])


def _prepare(ds: Dataset, cfg: TrainConfig, test: Dataset | None):
    if test is None:
        ds, test = train_test_split(ds, cfg.holdout_fraction, cfg.seed)
    layout = Layout(ds.dim, ds.num_classes, cfg.hidden_units)
    return ds, test, init_model(layout, cfg.seed)


def _batches(n: int, batch_size: int) -> int:
    return math.ceil(n / batch_size)


def run_centralized(ds: Dataset, cfg: TrainConfig, test: Dataset | None = None) -> TrainingTrace:
    """Ground-side training on the pooled dataset, one epoch per round.

    ``cfg.arch`` selects the centralized or distributed communication
    pattern (anything else falls back to centralized); ``cfg.n_clients`` is
    the number of satellites streaming telemetry.
    """
    kind = cfg.arch if cfg.arch is not ArchitectureKind.FEDERATED else ArchitectureKind.CENTRALIZED
    train, test, model = _prepare(ds, cfg, test)
    sizes = cfg.comm.sizes if cfg.comm else CommSizes()
    comm_ms = cfg.comm.round_comm_ms(kind, cfg.n_clients) if cfg.comm else 0.0
    compute_ms = _batches(len(train), cfg.batch_size) * cfg.compute_ms_per_batch / cfg.ground_speedup

    trace = TrainingTrace(kind.value)
    elapsed = 0.0
    trace.append(RoundRecord(0, evaluate(model, test), elapsed, 0), model.weights)
    for r in range(1, cfg.rounds + 1):
        model = local_train(model, train, 1, cfg.batch_size, cfg.learning_rate, _round_seed(cfg.seed, r, 0))
        elapsed += compute_ms + comm_ms
        exposure = telemetry_exposure_bytes(kind, sizes, cfg.n_clients, r)
        trace.append(RoundRecord(r, evaluate(model, test), elapsed, exposure), model.weights)
    return trace


def run_federated(ds: Dataset, cfg: TrainConfig, test: Dataset | None = None) -> TrainingTrace:
    """Synchronous FedAvg over static IID shards, one shard per satellite."""
    train, test, model = _prepare(ds, cfg, test)
    shards = partition_iid(train, cfg.n_clients, cfg.seed)
    sizes = [len(s) for s in shards]
    comm_ms = cfg.comm.round_comm_ms(ArchitectureKind.FEDERATED, cfg.n_clients) if cfg.comm else 0.0
    compute_ms = max(
        _batches(n, cfg.batch_size) * cfg.local_epochs * cfg.compute_ms_per_batch for n in sizes
    )

    trace = TrainingTrace(f"federated-n{cfg.n_clients}")
    elapsed = 0.0
    trace.append(RoundRecord(0, evaluate(model, test), elapsed, 0), model.weights)
    for r in range(1, cfg.rounds + 1):
        updates = [
            local_train(
                model, shard, cfg.local_epochs, cfg.batch_size, cfg.learning_rate, _round_seed(cfg.seed, r, k)
            )
            for k, shard in enumerate(shards)
        ]
        model = fedavg(updates, sizes)
        elapsed += compute_ms + comm_ms
        exposure = telemetry_exposure_bytes(ArchitectureKind.FEDERATED, CommSizes(), cfg.n_clients, r)
        trace.append(RoundRecord(r, evaluate(model, test), elapsed, exposure), model.weights)
    return trace
