"""Haptic trace handling: load, validate, synthesize, and window force/command data.

A trace pairs a 3-axis contact force stream with the operator's command
stream (3-axis position, 3-axis velocity), sampled on a fixed period.
Channel order everywhere in this library is
``[fx, fy, fz, px, py, pz, vx, vy, vz]``.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, SchemaError, StabilityError

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("t", "fx", "fy", "fz", "px", "py", "pz", "vx", "vy", "vz")
N_CHANNELS = 9


class Activity(enum.Enum):
    DYNAMIC_PUSHING = "push"
    DYNAMIC_TAPPING = "tap"
    RIGID_PRESS_HOLD = "press"
    SYNTHETIC = "synthetic"


@dataclass
class HapticTrace:
    """Equispaced force + command samples; tick ``i`` is time ``i * ts``."""

    ts: float
    forces: np.ndarray      # (N, 3) newtons
    positions: np.ndarray   # (N, 3) meters
    velocities: np.ndarray  # (N, 3) meters/second
    activity: Activity = Activity.SYNTHETIC
    _channels: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.ts <= 0:
            raise ValueError(f"sampling period must be positive, got {self.ts}")
        self.forces = np.asarray(self.forces, dtype=np.float64)
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.velocities = np.asarray(self.velocities, dtype=np.float64)
        for name, arr in (("forces", self.forces), ("positions", self.positions),
                          ("velocities", self.velocities)):
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise SchemaError(f"{name} must have shape (N, 3), got {arr.shape}")
            if not np.isfinite(arr).all():
                raise SchemaError(f"{name} contains non-finite values")
        n = self.forces.shape[0]
        if self.positions.shape[0] != n or self.velocities.shape[0] != n:
            raise SchemaError(
                "force and command streams must have equal length: "
                f"{n}, {self.positions.shape[0]}, {self.velocities.shape[0]}")
        if n == 0:
            raise SchemaError("trace must contain at least one sample")

    def __len__(self) -> int:
        return self.forces.shape[0]

    def channels(self) -> np.ndarray:
        """All nine channels as one (N, 9) array, forces first."""
        if self._channels is None:
            self._channels = np.hstack([self.forces, self.positions, self.velocities])
        return self._channels


@dataclass
class NormStats:
    """Per-channel z-score statistics over the 9 trace channels.

    ``std`` holds the population standard deviation with 1.0 substituted on
    channels flagged constant, so it is always safe to divide by.
    """

    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # bool mask of flagged channels

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std

    def denormalize_force(self, values: np.ndarray) -> np.ndarray:
        return values * self.std[:3] + self.mean[:3]


def load_trace(path, ts: float, activity: Activity = Activity.SYNTHETIC) -> HapticTrace:
    """Read a trace CSV (header ``t,fx,...,vz``) and validate every row."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        if [h.strip() for h in header] != list(TRACE_COLUMNS):
            raise SchemaError(
                f"{path}: bad header {header!r}, expected {','.join(TRACE_COLUMNS)}")
        ticks = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate a trailing blank line
            if len(row) != len(TRACE_COLUMNS):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(TRACE_COLUMNS)} fields, got {len(row)}")
            try:
                values = [float(x) for x in row]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-numeric field ({exc})") from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError(f"{path}:{lineno}: non-finite value")
            ticks.append(values[0])
            rows.append(values[1:])
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    if any(b <= a for a, b in zip(ticks, ticks[1:])):
        raise SchemaError(f"{path}: tick column must be strictly increasing")
    data = np.asarray(rows, dtype=np.float64)
    return HapticTrace(ts=ts, forces=data[:, 0:3], positions=data[:, 3:6],
                       velocities=data[:, 6:9], activity=activity)


def save_trace(trace: HapticTrace, path) -> None:
    """Write a trace in the CSV schema used by :func:`load_trace` (LF, UTF-8)."""
    data = trace.channels()
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(TRACE_COLUMNS) + "\n")
        for i in range(len(trace)):
            f.write(str(i) + "," + ",".join(repr(float(v)) for v in data[i]) + "\n")


def trim_trace(trace: HapticTrace, head: int, tail: int) -> HapticTrace:
    """Drop ``head`` leading and ``tail`` trailing samples; ticks restart at 0."""
    if head < 0 or tail < 0:
        raise ValueError("head and tail must be non-negative")
    if head + tail >= len(trace):
        raise ValueError(
            f"cannot trim {head}+{tail} samples from a trace of length {len(trace)}")
    stop = len(trace) - tail
    return HapticTrace(ts=trace.ts,
                       forces=trace.forces[head:stop].copy(),
                       positions=trace.positions[head:stop].copy(),
                       velocities=trace.velocities[head:stop].copy(),
                       activity=trace.activity)


# Motion-profile defaults: sinusoidal push, pulse-train tap, ramp-hold press.
_PROFILE_FREQ_HZ = {Activity.DYNAMIC_PUSHING: 0.5, Activity.DYNAMIC_TAPPING: 2.0}
# Secondary axes reuse the axis-0 profile scaled and phase-shifted so all
# three force channels carry signal.
_AXIS_SCALE = (1.0, 0.6, 0.35)
_AXIS_PHASE = (0.0, 0.9, 2.1)


def _resolve_profile(motion_profile) -> Activity:
    if isinstance(motion_profile, Activity):
        profile = motion_profile
    else:
        try:
            profile = Activity(motion_profile)
        except ValueError:
            raise ValueError(f"unknown motion profile {motion_profile!r}") from None
    if profile is Activity.SYNTHETIC:
        raise ValueError("motion profile must be push, tap, or press")
    return profile


def synth_trace(b: float, stiffness_fraction: float, ts: float, length: int,
                motion_profile, seed: int, *, amplitude: float = 0.03,
                wall: float = 0.01, frequency: float | None = None,
                jitter: float = 5e-4) -> HapticTrace:
    """Simulate a per-axis spring-damper contact against a virtual wall.

    The rendered stiffness is ``stiffness_fraction * b / ts``; fractions above
    1 are rejected because a stiffness beyond ``b / ts`` cannot be rendered
    stably at this sampling period.  The operator position follows the chosen
    motion profile plus smoothed seeded jitter; contact force is
    ``-(k * penetration + b * penetration_rate)`` while penetrating, else 0.
    Command velocity is the backward difference of position (first sample 0).
    """
    if b <= 0 or ts <= 0:
        raise ValueError("damping and sampling period must be positive")
    if length < 2:
        raise ValueError("length must be at least 2")
    if not 0 < stiffness_fraction <= 1:
        if stiffness_fraction > 1:
            raise StabilityError(
                f"stiffness_fraction {stiffness_fraction} yields k = "
                f"{stiffness_fraction * b / ts:.6g} N/m above the renderable "
                f"limit b/ts = {b / ts:.6g} N/m (k*ts must not exceed b)")
        raise ValueError("stiffness_fraction must lie in (0, 1]")
    profile = _resolve_profile(motion_profile)
    k = stiffness_fraction * b / ts

    rng = np.random.default_rng(seed)
    t = np.arange(length) * ts
    positions = np.empty((length, 3))
    for axis in range(3):
        a = amplitude * _AXIS_SCALE[axis]
        phase = _AXIS_PHASE[axis]
        if profile is Activity.DYNAMIC_PUSHING:
            freq = frequency if frequency is not None else _PROFILE_FREQ_HZ[profile]
            x = a * np.sin(2 * np.pi * freq * t + phase)
        elif profile is Activity.DYNAMIC_TAPPING:
            freq = frequency if frequency is not None else _PROFILE_FREQ_HZ[profile]
            # narrow positive pulses -> brief contacts
            x = a * np.maximum(0.0, np.sin(2 * np.pi * freq * t + phase)) ** 4
        else:  # ramp up then hold against the wall
            ramp_s = min(1.0, 0.25 * length * ts)
            x = np.where(t < ramp_s, -a + 2 * a * (t / ramp_s), a)
        if jitter > 0:
            noise = rng.normal(0.0, jitter, length)
            win = np.hanning(25)
            x = x + np.convolve(noise, win / win.sum(), mode="same")
        positions[:, axis] = x

    velocities = np.zeros_like(positions)
    velocities[1:] = np.diff(positions, axis=0) / ts

    penetration = np.maximum(0.0, positions - wall)
    pen_rate = np.zeros_like(penetration)
    pen_rate[1:] = np.diff(penetration, axis=0) / ts
    forces = np.where(penetration > 0, -(k * penetration + b * pen_rate), 0.0)

    return HapticTrace(ts=ts, forces=forces, positions=positions,
                       velocities=velocities, activity=profile)


def build_window(trace: HapticTrace, t: int, window_len: int) -> np.ndarray:
    """Return the (window_len, 9) input slab ending at tick ``t``, oldest row first."""
    if window_len < 1:
        raise ValueError("window length must be at least 1")
    if t >= len(trace):
        raise ValueError(f"tick {t} beyond trace of length {len(trace)}")
    if t < window_len - 1:
        raise ValueError(
            f"insufficient history: tick {t} supports at most {t + 1} rows, "
            f"need {window_len}")
    return trace.channels()[t - window_len + 1:t + 1].copy()


def compute_norm_stats(trace: HapticTrace) -> NormStats:
    """Per-channel mean and population std; constant channels get std 1."""
    if len(trace) < 2:
        raise ValueError("need at least 2 samples to compute statistics")
    data = trace.channels()
    mean = data.mean(axis=0)
    std = data.std(axis=0)
    constant = std == 0.0
    if constant.any():
        logger.info("constant channels %s: substituting std 1.0",
                    np.flatnonzero(constant).tolist())
    std = np.where(constant, 1.0, std)
    return NormStats(mean=mean, std=std, constant=constant)
