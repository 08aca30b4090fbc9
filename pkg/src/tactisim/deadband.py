"""Weber-law perceptual deadband codec for 3-axis force streams.

A sample is transmitted only when it differs from the last transmitted value
by more than the just-noticeable-difference fraction ``c`` of that value's
magnitude.  The relative rule is applied to the Euclidean norm of the
3-vector change; an absolute floor keeps behavior sane near zero force.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError


@dataclass(frozen=True)
class DeadbandConfig:
    c: float = 0.1            # JND fraction
    floor_eps: float = 1e-3   # absolute threshold, newtons

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ValueError(f"JND fraction must lie in (0, 1), got {self.c}")
        if self.floor_eps < 0:
            raise ValueError("floor_eps must be non-negative")


@dataclass
class DeadbandState:
    """Most recent transmitted value for one force stream."""

    last_transmitted: np.ndarray = field(default_factory=lambda: np.zeros(3))
    initialized: bool = False

    def mark_transmitted(self, sample) -> None:
        self.last_transmitted = np.asarray(sample, dtype=np.float64).copy()
        self.initialized = True


def should_transmit(state: DeadbandState, sample, cfg: DeadbandConfig) -> bool:
    """True when the change versus the last transmitted value is perceivable.

    The first sample of a stream always transmits.  On True the caller is
    responsible for calling ``state.mark_transmitted(sample)``.
    """
    if not state.initialized:
        return True
    sample = np.asarray(sample, dtype=np.float64)
    change = np.linalg.norm(sample - state.last_transmitted)
    threshold = max(cfg.c * np.linalg.norm(state.last_transmitted), cfg.floor_eps)
    return change > threshold


def encode_trace(forces, cfg: DeadbandConfig):
    """Deadband-filter a force sequence.

    Returns ``(mask, reduction_ratio)`` where ``mask[i]`` is True for
    transmitted samples and ``reduction_ratio = 1 - sent/total``.
    """
    forces = np.asarray(forces, dtype=np.float64)
    if forces.ndim != 2 or forces.shape[1] != 3:
        raise SchemaError(f"expected an (N, 3) force sequence, got {forces.shape}")
    if forces.shape[0] == 0:
        raise ValueError("cannot encode an empty sequence")
    n = forces.shape[0]
    mask = np.zeros(n, dtype=bool)
    state = DeadbandState()
    for i in range(n):
        if should_transmit(state, forces[i], cfg):
            mask[i] = True
            state.mark_transmitted(forces[i])
    reduction = 1.0 - mask.sum() / n
    return mask, reduction


def decode_zoh(mask, transmitted) -> np.ndarray:
    """Zero-order-hold reconstruction of a deadband-coded stream."""
    mask = np.asarray(mask, dtype=bool)
    transmitted = np.asarray(transmitted, dtype=np.float64)
    if transmitted.ndim != 2 or transmitted.shape[1] != 3:
        raise SchemaError(f"expected (M, 3) transmitted values, got {transmitted.shape}")
    if int(mask.sum()) != transmitted.shape[0]:
        raise SchemaError(
            f"mask marks {int(mask.sum())} transmissions but {transmitted.shape[0]} "
            "values were supplied")
    if mask.size == 0 or not mask[0]:
        raise SchemaError("mask must mark the first sample as transmitted")
    hold_index = np.cumsum(mask) - 1
    return transmitted[hold_index]
