"""Evaluation metrics for force predictions."""

from __future__ import annotations

import numpy as np

from ..errors import SchemaError


def mse_per_axis(true, pred):
    """Mean squared error along each force axis plus the mean over axes.

    Returns ``(per_axis, overall)`` where ``per_axis`` has shape (3,).
    """
    true = np.asarray(true, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if true.shape != pred.shape:
        raise SchemaError(f"shape mismatch: {true.shape} vs {pred.shape}")
    if true.ndim != 2 or true.shape[1] != 3:
        raise SchemaError(f"expected (K, 3) sequences, got {true.shape}")
    if true.shape[0] < 1:
        raise ValueError("sequences must contain at least one sample")
    per_axis = np.mean((true - pred) ** 2, axis=0)
    return per_axis, float(per_axis.mean())


def max_horizon_for_threshold(error_profile, eps_th: float) -> int:
    """Largest horizon K such that every step 1..K stays within ``eps_th``.

    The rule is prefix-based: the first step above the threshold ends the
    usable horizon even if later steps dip back below it.
    """
    profile = np.asarray(error_profile, dtype=np.float64)
    if profile.ndim != 1 or profile.size == 0:
        raise ValueError("error profile must be a non-empty 1-D sequence")
    above = profile > eps_th
    if not above.any():
        return int(profile.size)
    return int(np.argmax(above))
