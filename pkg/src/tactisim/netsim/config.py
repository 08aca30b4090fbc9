"""Experiment configuration for the downlink teleoperation simulator."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from ..errors import ConfigError

_FLOOR_SLACK = 1e-9


def _check_keys(data: dict, allowed, where: str) -> None:
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass(frozen=True)
class VideoModel:
    """Statistical downlink video source: fixed frame rate, noisy frame size."""

    fps: float = 60.0
    mean_bitrate_bps: float = 2e6
    frame_cv: float = 0.15          # coefficient of variation of frame size
    deadline_s: float = 0.016

    def __post_init__(self):
        if self.fps <= 0 or self.mean_bitrate_bps <= 0:
            raise ConfigError("video fps and bitrate must be positive")
        if self.frame_cv < 0:
            raise ConfigError("frame_cv must be non-negative")
        if self.deadline_s <= 0:
            raise ConfigError("video deadline must be positive")

    @property
    def mean_frame_bytes(self) -> float:
        return self.mean_bitrate_bps / self.fps / 8.0

    @classmethod
    def from_dict(cls, data: dict) -> "VideoModel":
        _check_keys(data, [f.name for f in fields(cls)], "video")
        return cls(**data)


@dataclass(frozen=True)
class TraceSpec:
    """Where a run's haptic trace comes from: a CSV file or the synthesizer."""

    path: str | None = None
    profile: str = "push"
    b: float = 0.5
    stiffness_fraction: float = 0.8
    length: int = 20000
    seed: int = 1
    amplitude: float = 0.03
    wall: float = 0.01
    jitter: float = 5e-4

    @classmethod
    def from_dict(cls, data: dict) -> "TraceSpec":
        _check_keys(data, [f.name for f in fields(cls)], "trace")
        return cls(**data)


@dataclass(frozen=True)
class ChannelSpec:
    """Channel profile source: synthetic fading, a CSV file, or a constant."""

    type: str = "synthetic"          # synthetic | file | constant
    path: str | None = None
    se: float = 4.0                  # constant profiles only
    mean_snr_db_range: tuple = (5.0, 20.0)
    rician_k: float = 10.0
    shadowing_sigma_db: float = 4.0
    se_cap: float = 7.4
    shadow_block_ttis: int = 100

    def __post_init__(self):
        if self.type not in ("synthetic", "file", "constant"):
            raise ConfigError(f"unknown channel type {self.type!r}")
        if self.type == "file" and not self.path:
            raise ConfigError("file channel requires a path")
        if self.se_cap <= 0:
            raise ConfigError("se_cap must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelSpec":
        _check_keys(data, [f.name for f in fields(cls)], "channel")
        if "mean_snr_db_range" in data:
            data = dict(data, mean_snr_db_range=tuple(data["mean_snr_db_range"]))
        return cls(**data)


@dataclass(frozen=True)
class SimConfig:
    """Full description of one simulation run."""

    users: int
    duration_s: float = 10.0
    bandwidth_hz: float = 1e7
    n_rb: int = 100
    tti_s: float = 1e-3
    video_pool_frac: float = 0.9     # share of RBs reserved for video
    ts_s: float = 1e-3               # haptic sampling period
    tw_s: float = 1e-3               # relaxed delay bound (= ts for baseline)
    d_max_s: float | None = None     # queueing deadline; defaults to tw_s
    s_p_bytes: int = 32
    jnd_c: float | None = 0.1        # None disables the deadband
    floor_eps_n: float = 1e-3
    satisfaction_threshold: float = 1e-5
    seed: int = 0
    desync: bool = True              # per-user random trace offsets
    video: VideoModel | None = field(default_factory=VideoModel)
    trace: TraceSpec = field(default_factory=TraceSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)

    def __post_init__(self):
        if self.users < 1:
            raise ConfigError("need at least one user pair")
        if not 0 < self.video_pool_frac < 1:
            raise ConfigError("video_pool_frac must lie strictly between 0 and 1")
        if self.haptic_pool < 1:
            raise ConfigError("haptic pool must contain at least one RB")
        if self.tti_s <= 0 or self.ts_s <= 0 or self.duration_s <= 0:
            raise ConfigError("tti, ts, and duration must be positive")
        if abs(self.ts_s - self.tti_s) > 1e-12:
            raise ConfigError(
                "the scheduler requires the haptic sampling period to equal "
                f"the TTI (got ts={self.ts_s}, tti={self.tti_s})")
        if self.tw_s < self.ts_s - 1e-12:
            raise ConfigError("tw_s must be at least the sampling period")
        if self.s_p_bytes <= 0:
            raise ConfigError("haptic packet size must be positive")
        if self.jnd_c is not None and not 0 < self.jnd_c < 1:
            raise ConfigError("jnd_c must lie in (0, 1), or be null to disable")

    @property
    def haptic_pool(self) -> int:
        return round((1.0 - self.video_pool_frac) * self.n_rb)

    @property
    def video_pool(self) -> int:
        return self.n_rb - self.haptic_pool

    @property
    def n_ttis(self) -> int:
        return int(round(self.duration_s / self.tti_s))

    @property
    def tw_ticks(self) -> int:
        return int((self.tw_s / self.ts_s) + _FLOOR_SLACK)

    @property
    def deadline_ticks(self) -> int:
        d = self.tw_s if self.d_max_s is None else self.d_max_s
        return max(1, int((d / self.tti_s) + _FLOOR_SLACK))

    @property
    def rb_bandwidth_hz(self) -> float:
        return self.bandwidth_hz / self.n_rb

    def with_users(self, users: int) -> "SimConfig":
        return replace(self, users=users)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        _check_keys(data, [f.name for f in fields(cls)], "sim")
        data = dict(data)
        if "video" in data:
            data["video"] = (VideoModel.from_dict(data["video"])
                             if data["video"] is not None else None)
        if "trace" in data:
            data["trace"] = TraceSpec.from_dict(data["trace"])
        if "channel" in data:
            data["channel"] = ChannelSpec.from_dict(data["channel"])
        return cls(**data)
