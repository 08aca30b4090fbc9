#!/usr/bin/env python3
"""Perceptual deadband coding: how much haptic traffic disappears.

Synthesizes the three contact activities, encodes each force stream with a
range of just-noticeable-difference constants, and prints the packet-rate
reduction plus the worst-case zero-order-hold reconstruction error.
"""

import numpy as np

from tactisim.deadband import DeadbandConfig, decode_zoh, encode_trace
from tactisim.traces import synth_trace

TS = 1e-3
LENGTH = 20000

print("Deadband packet reduction on 20 s synthetic activities")
print(f"{'activity':<8} {'c':>5} {'sent':>6} {'reduction':>10} {'max err N':>10}")
for profile in ("push", "tap", "press"):
    trace = synth_trace(0.5, 0.8, TS, LENGTH, profile, seed=3)
    for c in (0.05, 0.10, 0.20):
        cfg = DeadbandConfig(c=c, floor_eps=1e-3)
        mask, reduction = encode_trace(trace.forces, cfg)
        recon = decode_zoh(mask, trace.forces[mask])
        err = np.linalg.norm(recon - trace.forces, axis=1).max()
        print(f"{profile:<8} {c:>5.2f} {int(mask.sum()):>6} "
              f"{reduction:>10.3f} {err:>10.4f}")
    print()

print("A 10% JND on the press-hold activity removes ~99% of samples; the")
print("held value stays within the perceptual threshold by construction.")
