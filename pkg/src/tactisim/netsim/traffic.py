"""Traffic sources: deadband-filtered haptic samples, batch packing, video.

Haptic generation is resolved before the scheduler loop runs: every user's
deadband transmit mask is computed over the run, then the surviving sample
ticks are grouped into batch emissions.  A batch leaves the accumulation
buffer and enters the downlink queue when either the configured maximum
sample count is reached or the oldest pending sample is one sampling period
away from the relaxation window; its queueing deadline is the enqueue tick
plus the window.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..queueing import plan_batch
from ..traces import HapticTrace
from .channel import ChannelProfile, rb_payload, rb_payload_at_cap
from .config import SimConfig

logger = logging.getLogger(__name__)

_VIDEO_STREAM_TAG = 0x56444F  # distinguishes video RNG streams from others


class PacketKind(enum.Enum):
    HAPTIC_BATCH = "haptic"
    VIDEO_CHUNK = "video"


@dataclass
class Packet:
    owner: int
    kind: PacketKind
    size: int           # bytes
    created: int        # enqueue tick
    deadline: int       # first tick at which the packet counts as expired
    n_samples: int = 1  # haptic samples carried (1 for video chunks)

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("packet size must be positive")
        if self.deadline < self.created:
            raise ValueError("deadline precedes creation")


def user_trace_offsets(cfg: SimConfig, trace_len: int) -> np.ndarray:
    """Per-user cyclic start offsets into the shared trace."""
    if not cfg.desync:
        return np.zeros(cfg.users, dtype=np.int64)
    rng = np.random.default_rng([cfg.seed, 0x0FF5E7])
    return rng.integers(0, trace_len, cfg.users)


def deadband_masks(trace: HapticTrace, cfg: SimConfig,
                   offsets: np.ndarray) -> np.ndarray:
    """Transmit masks, shape (users, n_ttis); all-True when the deadband is off.

    Runs every user's stream through the same rule as
    :func:`tactisim.deadband.encode_trace`, vectorized across users.  Streams
    wrap cyclically when the run outlasts the trace.
    """
    n_ticks = cfg.n_ttis
    n_users = cfg.users
    if n_ticks > len(trace):
        logger.info("run of %d ticks wraps the %d-sample trace cyclically",
                    n_ticks, len(trace))
    if cfg.jnd_c is None:
        return np.ones((n_users, n_ticks), dtype=bool)
    forces = trace.forces
    length = len(trace)
    mask = np.zeros((n_users, n_ticks), dtype=bool)
    last = np.zeros((n_users, 3))
    have = np.zeros(n_users, dtype=bool)
    idx = offsets.copy()
    for t in range(n_ticks):
        f = forces[idx]
        change = np.linalg.norm(f - last, axis=1)
        threshold = np.maximum(cfg.jnd_c * np.linalg.norm(last, axis=1),
                               cfg.floor_eps_n)
        send = ~have | (change > threshold)
        mask[:, t] = send
        last[send] = f[send]
        have |= send
        idx += 1
        idx[idx == length] = 0
    return mask


def gen_haptic_traffic(trace: HapticTrace, cfg: SimConfig, user: int,
                       offsets: np.ndarray | None = None) -> np.ndarray:
    """Ticks at which one user emits a deadband-surviving haptic sample."""
    if offsets is None:
        offsets = user_trace_offsets(cfg, len(trace))
    mask = deadband_masks(trace, cfg, offsets[user:user + 1])
    return np.flatnonzero(mask[0])


def effective_batch_limit(cfg: SimConfig, profile: ChannelProfile) -> int:
    """Batch sample limit after the single-RB feasibility check.

    The relaxation window allows ``floor(tw/ts)`` samples per batch; if that
    many packets cannot fit the best-case RB payload, fall back to the
    largest count that can (at least 1 so oversized lone packets still move,
    spanning several RBs).
    """
    if cfg.tw_ticks <= 1:
        return 1
    plan = plan_batch(cfg.tw_s, cfg.ts_s, cfg.s_p_bytes, rb_payload_at_cap(profile, cfg))
    if plan.feasible:
        return plan.batch_size
    limit = max(1, plan.rb_limited_size)
    logger.info("batch size %d infeasible for one RB; capping at %d",
                plan.batch_size, limit)
    return limit


def plan_batches(sample_ticks, batch_limit: int, window_ticks: int,
                 n_ttis: int):
    """Group one user's sample ticks into batch emissions.

    Returns ``(batches, n_pending)`` where each batch is
    ``(enqueue_tick, n_samples)`` and ``n_pending`` counts samples still in
    the accumulation buffer when the run ends.  A batch closes at the tick
    its ``batch_limit``-th sample arrives, or when the oldest sample's age
    reaches ``window_ticks - 1``, whichever is earlier.
    """
    ticks = np.asarray(sample_ticks, dtype=np.int64)
    if batch_limit < 1 or window_ticks < 1:
        raise ConfigError("batch limit and window must be at least 1 tick")
    batches = []
    j = 0
    n = ticks.size
    while j < n:
        close_by_age = int(ticks[j]) + window_ticks - 1
        full_at = j + batch_limit - 1
        if full_at < n and ticks[full_at] <= close_by_age:
            emit = int(ticks[full_at])
            m = full_at
        else:
            emit = close_by_age
            m = int(np.searchsorted(ticks, emit, side="right")) - 1
        if emit >= n_ttis:
            break
        batches.append((emit, m - j + 1))
        j = m + 1
    return batches, n - j


def haptic_packets(trace: HapticTrace, cfg: SimConfig,
                   profile: ChannelProfile):
    """All haptic batch packets for a run, plus per-user bookkeeping.

    Returns ``(packets, generated, pending)``: per-user packet lists sorted
    by enqueue tick, deadband-surviving sample counts, and samples never
    batched before the run ended.
    """
    offsets = user_trace_offsets(cfg, len(trace))
    masks = deadband_masks(trace, cfg, offsets)
    limit = effective_batch_limit(cfg, profile)
    window = cfg.tw_ticks
    deadline = cfg.deadline_ticks
    packets = []
    generated = np.zeros(cfg.users, dtype=np.int64)
    pending = np.zeros(cfg.users, dtype=np.int64)
    for user in range(cfg.users):
        ticks = np.flatnonzero(masks[user])
        generated[user] = ticks.size
        batches, left = plan_batches(ticks, limit, window, cfg.n_ttis)
        pending[user] = left
        packets.append([
            Packet(owner=user, kind=PacketKind.HAPTIC_BATCH,
                   size=n * cfg.s_p_bytes, created=emit,
                   deadline=emit + deadline, n_samples=n)
            for emit, n in batches])
    return packets, generated, pending


def _truncated_normal(rng, mean: float, sd: float, n: int) -> np.ndarray:
    """Normal draws re-sampled into [mean - 3 sd, mean + 3 sd]."""
    if sd == 0:
        return np.full(n, mean)
    out = rng.normal(mean, sd, n)
    lo, hi = mean - 3 * sd, mean + 3 * sd
    bad = (out < lo) | (out > hi)
    while bad.any():
        out[bad] = rng.normal(mean, sd, int(bad.sum()))
        bad = (out < lo) | (out > hi)
    return out


def gen_video_traffic(cfg: SimConfig, user: int, profile: ChannelProfile):
    """Video chunk packets for one user, sorted by creation tick.

    Frames arrive every 1/fps with a per-user phase, sized by a truncated
    normal around the mean frame size, and are fragmented into chunks no
    larger than the RB payload at the creation TTI (so a chunk normally
    occupies exactly one RB).
    """
    vm = cfg.video
    if vm is None:
        return []
    rng = np.random.default_rng([cfg.seed, _VIDEO_STREAM_TAG, user])
    interval = max(1, int(round(1.0 / (vm.fps * cfg.tti_s))))
    phase = int(rng.integers(0, interval))
    frame_ticks = np.arange(phase, cfg.n_ttis, interval)
    mean = vm.mean_frame_bytes
    sizes = _truncated_normal(rng, mean, vm.frame_cv * mean, frame_ticks.size)
    sizes = np.maximum(1, np.rint(sizes).astype(np.int64))
    deadline = max(1, int(vm.deadline_s / cfg.tti_s + 1e-9))
    fallback = rb_payload_at_cap(profile, cfg)
    packets = []
    for tick, frame_bytes in zip(frame_ticks.tolist(), sizes.tolist()):
        chunk_cap = rb_payload(profile, user, tick, cfg) or fallback
        remaining = frame_bytes
        while remaining > 0:
            size = min(chunk_cap, remaining)
            packets.append(Packet(owner=user, kind=PacketKind.VIDEO_CHUNK,
                                  size=size, created=tick,
                                  deadline=tick + deadline))
            remaining -= size
    return packets
