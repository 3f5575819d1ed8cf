"""Centralized baseline vs FedAvg for a sweep of constellation sizes.

Writes traces, the time-to-accuracy table and an SVG chart, then prints the
time-to-accuracy ratio of each federated run against the baseline.
"""

import argparse
from dataclasses import replace

from leosec.config import Experiment, ScenarioConfig, TrainSettings
from leosec.harness import run_scenario

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--n", type=int, nargs="+", default=[1, 10, 50])
parser.add_argument("--rounds", type=int, default=200)
parser.add_argument("--target", type=float, default=0.85)
parser.add_argument("--local-epochs", type=int, default=1)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="out/training_scaling")
args = parser.parse_args()

train = replace(
    TrainSettings(),
    n_clients=tuple(args.n),
    rounds=args.rounds,
    target_accuracy=args.target,
    local_epochs=args.local_epochs,
)
cfg = ScenarioConfig(Experiment.TRAINING_CURVE, train=train, seed=args.seed, output_dir=args.out)
report = run_scenario(cfg)

print(f"{'run':<16} {'TTA ms':>10} {'rounds':>6} {'final':>6} {'ratio':>7}")
for e in report.stats["time_to_accuracy"]:
    tta = "-" if e["time_to_accuracy_ms"] is None else f"{e['time_to_accuracy_ms']:.1f}"
    ratio = "-" if e["ratio_vs_baseline"] is None else f"{e['ratio_vs_baseline']:.2f}"
    print(f"{e['label']:<16} {tta:>10} {str(e['rounds_to_target']):>6} {e['final_accuracy']:>6.3f} {ratio:>7}")
print(f"outputs in {args.out}")
