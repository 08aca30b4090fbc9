"""Architecture hyperparameters for the dual-branch force estimator."""

from __future__ import annotations

import enum
from dataclasses import dataclass, asdict


class Mode(enum.Enum):
    MULTI_MODAL = "multi_modal"   # force branch + command branch
    FORCE_ONLY = "force_only"     # force branch alone


@dataclass(frozen=True)
class ModelConfig:
    window_len: int = 100     # input history length, samples
    conv_width: int = 5
    conv_filters: int = 64
    lstm_units: int = 128
    d_model: int = 128        # token embedding width
    n_heads: int = 8
    d_head: int = 16
    ffn_hidden: int = 256
    fuse_hidden: int = 32
    n_force: int = 3
    n_command: int = 6

    def __post_init__(self):
        for name in ("window_len", "conv_width", "conv_filters", "lstm_units",
                     "d_model", "n_heads", "d_head", "ffn_hidden", "fuse_hidden",
                     "n_force", "n_command"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive count")
        if self.d_model != self.n_heads * self.d_head:
            raise ValueError(
                f"d_model ({self.d_model}) must equal n_heads * d_head "
                f"({self.n_heads} * {self.d_head})")
        if self.n_tokens < 1:
            raise ValueError(
                f"window_len {self.window_len} too short for conv width "
                f"{self.conv_width}")

    @property
    def n_tokens(self) -> int:
        # valid convolution shortens the window once; the second conv pads
        return self.window_len - self.conv_width + 1

    @property
    def n_channels(self) -> int:
        return self.n_force + self.n_command

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)
