"""Forward pass of the dual-branch force estimator.

The force branch sees the 3 force channels of the input window, the command
branch the 6 position/velocity channels.  Each branch runs
conv(valid) -> conv(same) -> LSTM -> optional token projection -> one
transformer encoder layer, and contributes the final token.  The branch
outputs are fused through a ReLU layer and an affine head into the next
force sample.
"""

from __future__ import annotations

import numpy as np

from .config import Mode
from .layers import conv1d_forward, lstm_forward, relu, transformer_encoder_forward
from .weights import BranchWeights, ModelWeights


def branch_forward(window_cols: np.ndarray, branch: BranchWeights,
                   collect: dict | None = None) -> np.ndarray:
    """Run one branch over its (window_len, C) normalized input columns.

    Returns the final encoder token (d_model,).  When ``collect`` is given,
    stores the post-conv stack, last LSTM token, and last encoder token.
    """
    h = conv1d_forward(window_cols, branch.conv1_kernel, branch.conv1_bias, "valid")
    h = conv1d_forward(h, branch.conv2_kernel, branch.conv2_bias, "same")
    if collect is not None:
        collect["post_conv"] = h
    tokens = lstm_forward(h, branch.lstm)
    if collect is not None:
        collect["post_lstm_last"] = tokens[-1]
    if branch.proj_weight is not None:
        tokens = tokens @ branch.proj_weight.T + branch.proj_bias
    encoded = transformer_encoder_forward(tokens, branch.encoder)
    if collect is not None:
        collect["post_encoder_last"] = encoded[-1]
    return encoded[-1]


def _check_window(window: np.ndarray, weights: ModelWeights) -> np.ndarray:
    window = np.asarray(window, dtype=np.float64)
    cfg = weights.config
    if window.shape != (cfg.window_len, cfg.n_channels):
        raise ValueError(
            f"window shape {window.shape} does not match the model's "
            f"({cfg.window_len}, {cfg.n_channels})")
    return window


def predict_next(window: np.ndarray, weights: ModelWeights,
                 collect: dict | None = None) -> np.ndarray:
    """Predict the force sample following a raw (window_len, 9) history window.

    Normalization and denormalization use the statistics stored with the
    weights, so callers pass physical units in and get newtons back.  In
    force-only mode the command columns are ignored entirely.
    """
    window = _check_window(window, weights)
    cfg = weights.config
    normed = weights.norm.normalize(window)
    top_out = branch_forward(normed[:, :cfg.n_force], weights.top, collect)
    if weights.mode is Mode.MULTI_MODAL:
        op_out = branch_forward(normed[:, cfg.n_force:], weights.op)
        fused_in = np.concatenate([top_out, op_out])
    else:
        fused_in = top_out
    hidden = relu(weights.fuse_weight @ fused_in + weights.fuse_bias)
    pred = weights.head_weight @ hidden + weights.head_bias
    if collect is not None:
        collect["output"] = weights.norm.denormalize_force(pred)
        return collect["output"]
    return weights.norm.denormalize_force(pred)


def forward_with_intermediates(window: np.ndarray, weights: ModelWeights) -> dict:
    """Prediction plus force-branch intermediates, for conformance checks.

    Keys: ``post_conv`` (n_tokens, conv_filters), ``post_lstm_last``
    (lstm_units,), ``post_encoder_last`` (d_model,), ``output`` (n_force,).
    """
    collect: dict = {}
    predict_next(window, weights, collect)
    return collect
