"""Scan simulated satellite-to-ground RTTs over one orbit and compare the
envelope with the measured 124.2 ms figure."""

import argparse
import statistics
from dataclasses import replace

from leosec.config import Experiment, ScenarioConfig
from leosec.harness import rtt_scan
from leosec.orbits import ShellConfig

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--planes", type=int, default=34)
parser.add_argument("--slots", type=int, default=34)
parser.add_argument("--step", type=float, default=60.0)
args = parser.parse_args()

cfg = ScenarioConfig(Experiment.RTT_SCAN, shell=ShellConfig(num_planes=args.planes, sats_per_plane=args.slots))
cfg = replace(cfg, scan_step_s=args.step)
scan = rtt_scan(cfg)
rtts = [r[3] for r in scan.rows]
print(f"steps {scan.steps} (blind {scan.steps_without_station}), rows {len(rtts)}")
print(f"rtt min {min(rtts):.3f}  median {statistics.median(rtts):.3f}  max {max(rtts):.3f} ms")
print(f"fraction of satellites above 124.2 ms: {sum(r > 124.2 for r in rtts) / len(rtts):.3f}")
