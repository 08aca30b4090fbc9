"""Autoregressive multi-step force prediction and reference baselines.

Each rollout step slides the window forward one tick: the oldest row is
discarded, the model's force prediction is appended in the newest force
slot, and the true operator command for that tick fills the command slot.
Commands stay ground truth throughout; only forces are fed back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..traces import HapticTrace, build_window
from .model import predict_next
from .weights import ModelWeights


@dataclass
class RolloutResult:
    predictions: np.ndarray              # (K, 3) forces, newtons
    per_step_error: np.ndarray | None    # (K,) Euclidean error vs. the trace


def _errors(trace: HapticTrace, t: int, preds: np.ndarray) -> np.ndarray:
    truth = trace.forces[t + 1:t + 1 + preds.shape[0]]
    return np.linalg.norm(preds - truth, axis=1)


def rollout(trace: HapticTrace, t: int, horizon: int,
            weights: ModelWeights | None = None, *, predict_fn=None,
            window_len: int | None = None, with_error: bool = True) -> RolloutResult:
    """Predict ``horizon`` future force samples starting after tick ``t``.

    ``predict_fn`` (window -> 3-vector) may replace the model for baselines
    or tests; otherwise ``weights`` drives :func:`predict_next`.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if predict_fn is None:
        if weights is None:
            raise ValueError("either weights or predict_fn is required")
        window_len = weights.config.window_len
        predict_fn = lambda win: predict_next(win, weights)
    elif window_len is None:
        raise ValueError("window_len is required with a custom predict_fn")
    if t + horizon >= len(trace):
        raise ValueError(
            f"rollout to tick {t + horizon} needs commands beyond the trace "
            f"(length {len(trace)})")
    window = build_window(trace, t, window_len)
    channels = trace.channels()
    preds = np.empty((horizon, 3))
    for k in range(1, horizon + 1):
        preds[k - 1] = predict_fn(window)
        if k < horizon:
            next_row = np.concatenate([preds[k - 1], channels[t + k, 3:]])
            window = np.vstack([window[1:], next_row])
    return RolloutResult(predictions=preds,
                         per_step_error=_errors(trace, t, preds) if with_error else None)


def baseline_zoh(trace: HapticTrace, t: int, horizon: int,
                 with_error: bool = True) -> RolloutResult:
    """Hold the last observed force for every future step."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if t < 0 or t + horizon >= len(trace):
        raise ValueError("horizon extends beyond the trace")
    preds = np.tile(trace.forces[t], (horizon, 1))
    return RolloutResult(predictions=preds,
                         per_step_error=_errors(trace, t, preds) if with_error else None)


def baseline_linear(trace: HapticTrace, t: int, horizon: int,
                    with_error: bool = True) -> RolloutResult:
    """Extrapolate the last observed force slope: f_t + k * (f_t - f_{t-1})."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if t < 1:
        raise ValueError("linear extrapolation needs two past samples")
    if t + horizon >= len(trace):
        raise ValueError("horizon extends beyond the trace")
    slope = trace.forces[t] - trace.forces[t - 1]
    ks = np.arange(1, horizon + 1)[:, None]
    preds = trace.forces[t] + ks * slope
    return RolloutResult(predictions=preds,
                         per_step_error=_errors(trace, t, preds) if with_error else None)
