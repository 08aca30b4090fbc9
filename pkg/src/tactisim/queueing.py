"""Closed-form queueing-delay model and batch-size feasibility.

For a single-server queue with Poisson arrivals at rate ``lam`` and
exponential service at rate ``mu``, the probability that a packet's
queueing delay exceeds ``d_max`` decays exponentially:
``exp(-mu * (1 - rho) * d_max)`` with utilization ``rho = lam / mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import StabilityError

# floor() guard against values like 9.999999999 that represent exactly 10
_FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class QueueModel:
    arrival_rate: float   # packets / second
    service_rate: float   # packets / second

    def __post_init__(self):
        if self.arrival_rate < 0:
            raise ValueError("arrival rate must be non-negative")
        if self.service_rate <= 0:
            raise ValueError("service rate must be positive")

    @property
    def utilization(self) -> float:
        return self.arrival_rate / self.service_rate


@dataclass(frozen=True)
class BatchPlan:
    """How many fixed-size packets fit one transmission window and one RB."""

    window_s: float       # relaxed delay bound
    sample_period_s: float
    packet_bytes: int
    rb_payload_bytes: int
    batch_size: int       # floor(window / sample period)
    feasible: bool        # batch_size packets fit a single resource block
    rb_limited_size: int  # largest packet count one RB can carry


def delay_violation_probability(model: QueueModel, d_max: float) -> float:
    """P(queueing delay > d_max); requires a stable queue (rho < 1)."""
    rho = model.utilization
    if rho >= 1:
        raise StabilityError(f"utilization {rho:.4g} >= 1: queue is unstable")
    if d_max < 0:
        raise ValueError("d_max must be non-negative")
    p = math.exp(-model.service_rate * (1.0 - rho) * d_max)
    return min(1.0, max(0.0, p))


def required_dmax(model: QueueModel, target: float) -> float:
    """Smallest delay bound whose violation probability is ``target``.

    Accepts targets in (0, 1]; target 1 maps to a zero bound.
    """
    rho = model.utilization
    if rho >= 1:
        raise StabilityError(f"utilization {rho:.4g} >= 1: queue is unstable")
    if not 0 < target <= 1:
        raise ValueError(f"target probability must lie in (0, 1], got {target}")
    return -math.log(target) / (model.service_rate * (1.0 - rho))


def plan_batch(window_s: float, sample_period_s: float, packet_bytes: int,
               rb_payload_bytes: int) -> BatchPlan:
    """Size a packet batch for a relaxed delay bound.

    ``batch_size = floor(window / sample_period)``; the plan is feasible when
    that many packets fit a single resource block.  Infeasible plans still
    report the largest RB-fitting count so callers can degrade gracefully.
    """
    if sample_period_s <= 0:
        raise ValueError("sample period must be positive")
    if window_s < sample_period_s:
        raise ValueError(
            f"window {window_s} shorter than the sample period {sample_period_s}: "
            "no batching possible")
    if packet_bytes <= 0:
        raise ValueError("packet size must be positive")
    batch = int(math.floor(window_s / sample_period_s + _FLOOR_SLACK))
    rb_limited = rb_payload_bytes // packet_bytes
    return BatchPlan(window_s=window_s, sample_period_s=sample_period_s,
                     packet_bytes=packet_bytes, rb_payload_bytes=rb_payload_bytes,
                     batch_size=batch, feasible=batch * packet_bytes <= rb_payload_bytes,
                     rb_limited_size=rb_limited)
