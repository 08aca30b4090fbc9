#!/usr/bin/env python3
"""Autoregressive force estimation versus the trivial baselines.

Uses the trained benchmark model and its validation trace from the
companion trainer when present; otherwise falls back to random weights on a
synthetic pushing trace (errors will then be large, but the mechanics are
the same).
"""

import os

import numpy as np

from tactisim.estimator import (Mode, ModelConfig, baseline_linear,
                                baseline_zoh, load_weights,
                                max_horizon_for_threshold, random_weights,
                                rollout)
from tactisim.traces import load_trace, synth_trace

ART = os.path.join(os.path.dirname(__file__), "..", "trainer", "artifacts")
TRAINED = os.path.join(ART, "bench_multimodal.json")
TRACE = os.path.join(ART, "bench_trace.csv")

if os.path.exists(TRAINED) and os.path.exists(TRACE):
    weights = load_weights(TRAINED)
    trace = load_trace(TRACE, 1e-3)
    print(f"trained weights on their held-out trace: "
          f"{os.path.normpath(TRAINED)}")
else:
    weights = random_weights(ModelConfig(), Mode.MULTI_MODAL, seed=0)
    trace = synth_trace(0.5, 0.8, 1e-3, 12000, "push", seed=21)
    print("no trained weights found; using random initialization")

window = weights.config.window_len
horizon = 20
starts = list(range(window - 1, len(trace) - horizon - 1, 200))

err_model = np.zeros(horizon)
err_zoh = np.zeros(horizon)
err_lin = np.zeros(horizon)
for t in starts:
    err_model += rollout(trace, t, horizon, weights).per_step_error
    err_zoh += baseline_zoh(trace, t, horizon).per_step_error
    err_lin += baseline_linear(trace, t, horizon).per_step_error
n = len(starts)
err_model /= n
err_zoh /= n
err_lin /= n

print(f"\nmean Euclidean force error over {n} rollout starts")
print(f"{'horizon ms':>10} {'model':>10} {'zoh':>10} {'linear':>10}")
for k in (1, 2, 5, 10, 15, 20):
    print(f"{k:>10} {err_model[k - 1]:>10.4f} {err_zoh[k - 1]:>10.4f} "
          f"{err_lin[k - 1]:>10.4f}")

threshold = 0.05 * float(np.ptp(trace.forces))
usable = max_horizon_for_threshold(err_model, threshold)
print(f"\nwith an error budget of {threshold:.3f} N (5% of force range), the")
print(f"model's usable prediction horizon is {usable} ms: haptic packets may")
print(f"wait up to that long without perceptible estimation error.")
