"""Discrete-TTI downlink simulator: traffic, channel, scheduler, capacity."""

from .capacity import CapacityResult, capacity_search
from .channel import (DEFAULT_SE_CAP, ChannelProfile, load_channel_csv,
                      rb_payload, rb_payload_at_cap, save_channel_csv,
                      synth_channel)
from .config import ChannelSpec, SimConfig, TraceSpec, VideoModel
from .engine import SimMetrics, SimState, resolve_channel, resolve_trace, run_sim
from .mm1 import run_mm1_mode
from .traffic import (Packet, PacketKind, deadband_masks, effective_batch_limit,
                      gen_haptic_traffic, gen_video_traffic, haptic_packets,
                      plan_batches, user_trace_offsets)

__all__ = [
    "CapacityResult", "capacity_search", "DEFAULT_SE_CAP", "ChannelProfile",
    "load_channel_csv", "rb_payload", "rb_payload_at_cap", "save_channel_csv",
    "synth_channel", "ChannelSpec", "SimConfig", "TraceSpec", "VideoModel",
    "SimMetrics", "SimState", "resolve_channel", "resolve_trace", "run_sim",
    "run_mm1_mode", "Packet", "PacketKind", "deadband_masks",
    "effective_batch_limit", "gen_haptic_traffic", "gen_video_traffic",
    "haptic_packets", "plan_batches", "user_trace_offsets",
]
