#!/usr/bin/env python3
"""The exponential payoff of relaxing a queueing delay bound.

Evaluates the closed-form delay-violation probability across utilizations
and bounds, then cross-checks one operating point against the Monte-Carlo
M/M/1 queue.
"""

import numpy as np

from tactisim.netsim import run_mm1_mode
from tactisim.queueing import QueueModel, delay_violation_probability, required_dmax

MU = 1000.0  # packets/s, ~1 RB opportunity per ms

print("P(queueing delay > D) for an M/M/1 approximation, service rate 1000/s")
print(f"{'rho':>5} " + " ".join(f"{d:>8.0f}ms" for d in (1, 2, 5, 10, 20)))
for rho in (0.3, 0.5, 0.7, 0.9):
    model = QueueModel(rho * MU, MU)
    row = [delay_violation_probability(model, d * 1e-3)
           for d in (1, 2, 5, 10, 20)]
    print(f"{rho:>5.1f} " + " ".join(f"{p:>10.2e}" for p in row))

print("\nbound needed for five-nines reliability (violation 1e-5):")
for rho in (0.3, 0.5, 0.7, 0.9):
    d = required_dmax(QueueModel(rho * MU, MU), 1e-5)
    print(f"  rho {rho:.1f}: D_max = {d * 1e3:7.2f} ms")

print("\nMonte-Carlo cross-check at rho = 0.5 (1e6 packets):")
model = QueueModel(500, MU)
for d_ms in (1, 2, 5, 10):
    emp = run_mm1_mode(500, MU, d_ms * 1e-3, n_packets=1_000_000, seed=1)
    closed = delay_violation_probability(model, d_ms * 1e-3)
    print(f"  D_max {d_ms:>2} ms: empirical {emp:.5f}  closed form {closed:.5f}"
          f"  ({abs(emp - closed) / closed:.2%} apart)")

print("\nEach extra millisecond of tolerated delay multiplies reliability;")
print("that is the headroom the force estimator's horizon buys.")
