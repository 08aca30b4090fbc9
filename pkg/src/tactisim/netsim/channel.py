"""Per-user, per-TTI spectral-efficiency profiles and RB payload math.

Profiles either come from a CSV file (columns ``user,tti,se``) or from a
synthetic block-fading generator: each user draws a mean SNR, every TTI a
Rician fading gain, and every ``shadow_block`` TTIs a new log-normal
shadowing factor; spectral efficiency is ``log2(1 + snr)`` capped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ParseError

DEFAULT_SE_CAP = 7.4


@dataclass
class ChannelProfile:
    se: np.ndarray          # (n_users, n_ttis) bits/s/Hz
    se_cap: float = DEFAULT_SE_CAP

    def __post_init__(self):
        self.se = np.asarray(self.se, dtype=np.float64)
        if self.se.ndim != 2:
            raise ConfigError(f"profile must be 2-D (users x ttis), got {self.se.shape}")

    @property
    def n_users(self) -> int:
        return self.se.shape[0]

    @property
    def n_ttis(self) -> int:
        return self.se.shape[1]

    def lookup(self, user: int, tti: int) -> float:
        if not (0 <= user < self.n_users and 0 <= tti < self.n_ttis):
            raise ConfigError(
                f"channel profile undefined at user {user}, tti {tti} "
                f"(profile covers {self.n_users} x {self.n_ttis})")
        value = self.se[user, tti]
        if math.isnan(value):
            raise ConfigError(f"channel profile undefined at user {user}, tti {tti}")
        return float(value)

    @classmethod
    def constant(cls, se: float, n_users: int, n_ttis: int,
                 se_cap: float = DEFAULT_SE_CAP) -> "ChannelProfile":
        if not 0 < se <= se_cap:
            raise ConfigError(f"constant se must lie in (0, {se_cap}], got {se}")
        return cls(se=np.full((n_users, n_ttis), se), se_cap=se_cap)


def synth_channel(n_users: int, duration_s: float, tti_s: float, seed: int, *,
                  mean_snr_db_range=(5.0, 20.0), rician_k: float = 10.0,
                  shadowing_sigma_db: float = 4.0, se_cap: float = DEFAULT_SE_CAP,
                  shadow_block_ttis: int = 100) -> ChannelProfile:
    """Deterministic synthetic fading profile; user streams are independent
    of ``n_users`` so capacity sweeps keep each user's channel stable."""
    lo, hi = mean_snr_db_range
    if not (n_users >= 1 and duration_s > 0 and tti_s > 0):
        raise ConfigError("n_users, duration, and tti must be positive")
    if rician_k < 0 or shadowing_sigma_db < 0 or lo > hi:
        raise ConfigError("bad fading parameters")
    n_ttis = int(round(duration_s / tti_s))
    se = np.empty((n_users, n_ttis))
    los = math.sqrt(rician_k / (rician_k + 1.0))
    scatter_std = math.sqrt(1.0 / (2.0 * (rician_k + 1.0)))
    for user in range(n_users):
        rng = np.random.default_rng([seed, user])
        mean_snr = 10.0 ** (rng.uniform(lo, hi) / 10.0)
        re = los + rng.normal(0.0, scatter_std, n_ttis)
        im = rng.normal(0.0, scatter_std, n_ttis)
        gain = re * re + im * im
        n_blocks = -(-n_ttis // shadow_block_ttis)
        shadow_db = rng.normal(0.0, shadowing_sigma_db, n_blocks)
        shadow = np.repeat(10.0 ** (shadow_db / 10.0), shadow_block_ttis)[:n_ttis]
        snr = mean_snr * gain * shadow
        se[user] = np.minimum(np.log2(1.0 + snr), se_cap)
    return ChannelProfile(se=se, se_cap=se_cap)


def load_channel_csv(path, se_cap: float = DEFAULT_SE_CAP) -> ChannelProfile:
    """Read a ``user,tti,se`` CSV; unlisted (user, tti) points stay undefined."""
    entries = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["user", "tti", "se"]:
            raise ParseError(f"{path}: expected header 'user,tti,se'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                user, tti, se = int(row[0]), int(row[1]), float(row[2])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if not 0 < se <= se_cap:
                raise ParseError(
                    f"{path}:{lineno}: se {se} outside (0, {se_cap}]")
            entries.append((user, tti, se))
    if not entries:
        raise ParseError(f"{path}: no data rows")
    n_users = max(e[0] for e in entries) + 1
    n_ttis = max(e[1] for e in entries) + 1
    se = np.full((n_users, n_ttis), np.nan)
    for user, tti, value in entries:
        se[user, tti] = value
    return ChannelProfile(se=se, se_cap=se_cap)


def save_channel_csv(profile: ChannelProfile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("user,tti,se\n")
        for user in range(profile.n_users):
            row = profile.se[user]
            for tti in range(profile.n_ttis):
                f.write(f"{user},{tti},{float(row[tti])!r}\n")


def rb_payload(profile: ChannelProfile, user: int, tti: int, cfg) -> int:
    """Bytes one resource block carries for this user in this TTI."""
    se = profile.lookup(user, tti)
    return int(se * cfg.rb_bandwidth_hz * cfg.tti_s / 8.0)


def rb_payload_at_cap(profile: ChannelProfile, cfg) -> int:
    """Best-case RB payload, used to size batch limits conservatively."""
    return int(profile.se_cap * cfg.rb_bandwidth_hz * cfg.tti_s / 8.0)
