"""Deterministic TTI-stepped downlink simulator with two RB pools.

Every TTI the scheduler first expires queued packets whose deadline has
arrived, then serves each pool independently with rotating round robin: the
start user advances by one each TTI, and a user's head-of-line packet is
granted as many consecutive RBs as its size needs at the user's current
spectral efficiency.  Packets never straddle TTIs; if the head packet cannot
fit the remaining pool, the user is skipped this pass.  Haptic drop counts
are kept in samples (not batches) so dropout rates are comparable between
the baseline and batched modes.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..traces import HapticTrace, load_trace, synth_trace
from .channel import ChannelProfile, load_channel_csv, rb_payload, synth_channel
from .config import SimConfig
from .traffic import PacketKind, gen_video_traffic, haptic_packets

logger = logging.getLogger(__name__)

_POOLS = (PacketKind.HAPTIC_BATCH, PacketKind.VIDEO_CHUNK)


@dataclass
class SimMetrics:
    """Per-user counters and aggregates for one run.

    Haptic accounting is in samples; a user's generated samples always split
    into sent + dropped + queued-at-end + still-pending (conservation).
    """

    n_generated: np.ndarray
    n_dropped: np.ndarray
    n_sent: np.ndarray
    n_queued_end: np.ndarray
    n_pending_end: np.ndarray
    dropout: np.ndarray
    aggregate_dropout: float
    delay_hist: np.ndarray          # haptic queueing delays, counts by TTIs waited
    rb_used: dict
    rb_capacity: dict
    video_generated: np.ndarray     # chunks
    video_sent: np.ndarray
    video_dropped: np.ndarray
    video_queued_end: np.ndarray
    n_ttis: int

    def satisfied(self, threshold: float) -> np.ndarray:
        """Users meeting the dropout reliability target (idle users count)."""
        with np.errstate(invalid="ignore"):
            ok = ~(self.dropout > threshold)
        return ok


def resolve_trace(cfg: SimConfig) -> HapticTrace:
    spec = cfg.trace
    if spec.path is not None:
        return load_trace(spec.path, cfg.ts_s)
    return synth_trace(spec.b, spec.stiffness_fraction, cfg.ts_s, spec.length,
                       spec.profile, spec.seed, amplitude=spec.amplitude,
                       wall=spec.wall, jitter=spec.jitter)


def resolve_channel(cfg: SimConfig) -> ChannelProfile:
    spec = cfg.channel
    if spec.type == "file":
        return load_channel_csv(spec.path, se_cap=spec.se_cap)
    if spec.type == "constant":
        return ChannelProfile.constant(spec.se, cfg.users, cfg.n_ttis,
                                       se_cap=spec.se_cap)
    return synth_channel(cfg.users, cfg.duration_s, cfg.tti_s, cfg.seed,
                         mean_snr_db_range=spec.mean_snr_db_range,
                         rician_k=spec.rician_k,
                         shadowing_sigma_db=spec.shadowing_sigma_db,
                         se_cap=spec.se_cap,
                         shadow_block_ttis=spec.shadow_block_ttis)


@dataclass
class _Pool:
    size: int
    queues: list                       # per-user deques
    active: set = field(default_factory=set)
    rb_used: int = 0

    def enqueue(self, packet) -> None:
        self.queues[packet.owner].append(packet)
        self.active.add(packet.owner)


class SimState:
    """Queues, counters, and the per-TTI scheduling step."""

    def __init__(self, cfg: SimConfig, channel: ChannelProfile):
        if channel.n_users < cfg.users or channel.n_ttis < cfg.n_ttis:
            raise ConfigError(
                f"channel profile covers {channel.n_users} users x "
                f"{channel.n_ttis} ttis; run needs {cfg.users} x {cfg.n_ttis}")
        self.cfg = cfg
        self.channel = channel
        self.pools = {
            PacketKind.HAPTIC_BATCH: _Pool(cfg.haptic_pool,
                                           [deque() for _ in range(cfg.users)]),
            PacketKind.VIDEO_CHUNK: _Pool(cfg.video_pool,
                                          [deque() for _ in range(cfg.users)]),
        }
        u = cfg.users
        self.haptic_sent = np.zeros(u, dtype=np.int64)
        self.haptic_dropped = np.zeros(u, dtype=np.int64)
        self.video_sent = np.zeros(u, dtype=np.int64)
        self.video_dropped = np.zeros(u, dtype=np.int64)
        self.delay_hist = np.zeros(max(cfg.deadline_ticks, 1), dtype=np.int64)

    def idle(self) -> bool:
        return not (self.pools[PacketKind.HAPTIC_BATCH].active
                    or self.pools[PacketKind.VIDEO_CHUNK].active)

    def enqueue(self, packet) -> None:
        self.pools[packet.kind].enqueue(packet)

    def _expire(self, pool: _Pool, tti: int) -> None:
        for user in list(pool.active):
            q = pool.queues[user]
            while q and q[0].deadline <= tti:
                pkt = q.popleft()
                if pkt.kind is PacketKind.HAPTIC_BATCH:
                    self.haptic_dropped[user] += pkt.n_samples
                else:
                    self.video_dropped[user] += 1
            if not q:
                pool.active.discard(user)

    def _allocate(self, pool: _Pool, tti: int) -> None:
        cfg = self.cfg
        rb_left = pool.size
        offset = tti % cfg.users
        while rb_left > 0 and pool.active:
            progress = False
            order = sorted(pool.active, key=lambda u: (u - offset) % cfg.users)
            for user in order:
                if rb_left <= 0:
                    break
                q = pool.queues[user]
                if not q:
                    continue
                payload = rb_payload(self.channel, user, tti, cfg)
                if payload <= 0:
                    continue  # skip zero-payload RBs entirely
                head = q[0]
                needed = -(-head.size // payload)
                if needed > rb_left:
                    continue  # whole packet must fit this TTI
                q.popleft()
                if not q:
                    pool.active.discard(user)
                rb_left -= needed
                progress = True
                if head.kind is PacketKind.HAPTIC_BATCH:
                    self.haptic_sent[user] += head.n_samples
                    self.delay_hist[tti - head.created] += 1
                else:
                    self.video_sent[user] += 1
            if not progress:
                break
        used = pool.size - rb_left
        assert 0 <= used <= pool.size
        pool.rb_used += used

    def schedule_tti(self, tti: int) -> None:
        """Expire overdue packets, then serve both pools for one TTI."""
        for kind in _POOLS:
            self._expire(self.pools[kind], tti)
        for kind in _POOLS:
            self._allocate(self.pools[kind], tti)


def run_sim(cfg: SimConfig, trace: HapticTrace | None = None,
            channel: ChannelProfile | None = None) -> SimMetrics:
    """Run one deterministic simulation and return its metrics."""
    if trace is None:
        trace = resolve_trace(cfg)
    if channel is None:
        channel = resolve_channel(cfg)
    h_packets, generated, pending = haptic_packets(trace, cfg, channel)

    arrivals = []
    video_generated = np.zeros(cfg.users, dtype=np.int64)
    for user in range(cfg.users):
        for pkt in h_packets[user]:
            arrivals.append(pkt)
        for pkt in gen_video_traffic(cfg, user, channel):
            video_generated[user] += 1
            arrivals.append(pkt)
    arrivals.sort(key=lambda p: (p.created, p.kind is PacketKind.VIDEO_CHUNK,
                                 p.owner))

    state = SimState(cfg, channel)
    n_ttis = cfg.n_ttis
    i = 0
    n_arrivals = len(arrivals)
    tti = 0
    while tti < n_ttis:
        if state.idle():
            if i >= n_arrivals:
                break
            tti = max(tti, arrivals[i].created)  # fast-forward idle gaps
            if tti >= n_ttis:
                break
        while i < n_arrivals and arrivals[i].created <= tti:
            state.enqueue(arrivals[i])
            i += 1
        state.schedule_tti(tti)
        tti += 1

    pools = state.pools
    queued = np.zeros(cfg.users, dtype=np.int64)
    video_queued = np.zeros(cfg.users, dtype=np.int64)
    for user in range(cfg.users):
        queued[user] = sum(p.n_samples for p in pools[PacketKind.HAPTIC_BATCH].queues[user])
        video_queued[user] = len(pools[PacketKind.VIDEO_CHUNK].queues[user])

    with np.errstate(divide="ignore", invalid="ignore"):
        dropout = np.where(generated > 0, state.haptic_dropped / generated, np.nan)
    has_traffic = generated > 0
    if has_traffic.any():
        aggregate = float(np.mean(dropout[has_traffic]))
    else:
        logger.warning("no user generated haptic traffic; dropout undefined")
        aggregate = 0.0
    if (~has_traffic).any():
        logger.info("users %s generated no haptic packets; excluded from the "
                    "average", np.flatnonzero(~has_traffic).tolist())

    balance = state.haptic_sent + state.haptic_dropped + queued + pending
    assert (balance == generated).all(), "haptic sample conservation violated"

    return SimMetrics(
        n_generated=generated, n_dropped=state.haptic_dropped.copy(),
        n_sent=state.haptic_sent.copy(), n_queued_end=queued,
        n_pending_end=pending, dropout=dropout, aggregate_dropout=aggregate,
        delay_hist=state.delay_hist.copy(),
        rb_used={k.value: pools[k].rb_used for k in _POOLS},
        rb_capacity={k.value: pools[k].size * n_ttis for k in _POOLS},
        video_generated=video_generated, video_sent=state.video_sent.copy(),
        video_dropped=state.video_dropped.copy(), video_queued_end=video_queued,
        n_ttis=n_ttis)
