"""Print the inference-latency table for the three architectures."""

import argparse

from leosec.archmodel import InferenceParams, latency_table

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--ns", type=int, nargs="+", default=[1, 10, 100])
parser.add_argument("--alpha-low", type=float, default=0.1)
parser.add_argument("--alpha-high", type=float, default=0.7)
args = parser.parse_args()

print(f"{'arch':<12} {'N':>6}  latency_ms")
for row in latency_table(InferenceParams(), args.ns, args.alpha_low, args.alpha_high):
    span = (
        f"{row.latency_low_ms:.2f}"
        if row.latency_low_ms == row.latency_high_ms
        else f"{row.latency_low_ms:.2f} -- {row.latency_high_ms:.2f}"
    )
    print(f"{row.architecture.value:<12} {row.n_satellites:>6}  {span}")
