"""Numpy building blocks for the estimator: conv, LSTM, attention encoder.

All operations are pure float64 functions of (input, parameters); there is
no training machinery here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN_EPS = 1e-5


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    # stable piecewise form, avoids overflow warnings for large |x|
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(x, axis=-1):
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def layer_norm(x, scale, offset):
    """Normalize the last axis to zero mean / unit variance, then affine."""
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + LN_EPS) * scale + offset


def conv1d_forward(inputs, kernel, bias, padding="valid"):
    """1-D convolution along the first axis followed by ReLU.

    ``inputs`` is (L, C_in), ``kernel`` is (width, C_in, C_out), stride 1.
    ``valid`` yields L - width + 1 rows; ``same`` zero-pads to preserve L,
    putting the extra zero on the right when the deficit is odd.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if inputs.ndim != 2 or kernel.ndim != 3:
        raise ValueError(f"bad ranks: inputs {inputs.shape}, kernel {kernel.shape}")
    width, c_in, c_out = kernel.shape
    if inputs.shape[1] != c_in:
        raise ValueError(
            f"input has {inputs.shape[1]} channels, kernel expects {c_in}")
    if padding == "same":
        left = (width - 1) // 2
        inputs = np.pad(inputs, ((left, width - 1 - left), (0, 0)))
    elif padding != "valid":
        raise ValueError(f"unknown padding {padding!r}")
    length = inputs.shape[0]
    if length < width:
        raise ValueError(
            f"input length {length} shorter than filter width {width}")
    windows = np.lib.stride_tricks.sliding_window_view(inputs, width, axis=0)
    # windows: (L', C_in, width) -> (L', width * C_in), matching kernel layout
    flat = windows.transpose(0, 2, 1).reshape(length - width + 1, width * c_in)
    pre = flat @ kernel.reshape(width * c_in, c_out) + bias
    return relu(pre)


@dataclass
class LSTMParams:
    """Per-gate weights; w_* map inputs, u_* map the previous hidden state."""

    w_i: np.ndarray
    w_f: np.ndarray
    w_g: np.ndarray
    w_o: np.ndarray
    u_i: np.ndarray
    u_f: np.ndarray
    u_g: np.ndarray
    u_o: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_g: np.ndarray
    b_o: np.ndarray

    @property
    def hidden(self) -> int:
        return self.w_i.shape[0]


def lstm_forward(tokens, params: LSTMParams) -> np.ndarray:
    """Run the standard LSTM recurrence from zero state over (L, C) tokens.

    Gates use sigmoid, candidate and output squashing use tanh; returns the
    hidden state at every step, shape (L, hidden).
    """
    tokens = np.asarray(tokens, dtype=np.float64)
    hid = params.hidden
    w = np.concatenate([params.w_i, params.w_f, params.w_g, params.w_o], axis=0)
    u = np.concatenate([params.u_i, params.u_f, params.u_g, params.u_o], axis=0)
    b = np.concatenate([params.b_i, params.b_f, params.b_g, params.b_o])
    x_part = tokens @ w.T + b  # (L, 4H), input contribution precomputed
    h = np.zeros(hid)
    c = np.zeros(hid)
    out = np.empty((tokens.shape[0], hid))
    for step in range(tokens.shape[0]):
        z = x_part[step] + u @ h
        i = sigmoid(z[:hid])
        f = sigmoid(z[hid:2 * hid])
        g = np.tanh(z[2 * hid:3 * hid])
        o = sigmoid(z[3 * hid:])
        c = f * c + i * g
        h = o * np.tanh(c)
        out[step] = h
    return out


@dataclass
class EncoderParams:
    """One post-layer-norm transformer encoder layer (attention + FFN)."""

    n_heads: int
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    bq: np.ndarray
    bk: np.ndarray
    bv: np.ndarray
    bo: np.ndarray
    ln1_scale: np.ndarray
    ln1_offset: np.ndarray
    ffn_w1: np.ndarray
    ffn_b1: np.ndarray
    ffn_w2: np.ndarray
    ffn_b2: np.ndarray
    ln2_scale: np.ndarray
    ln2_offset: np.ndarray


def attention_weights(tokens, params: EncoderParams) -> np.ndarray:
    """Per-head softmax attention matrix, shape (n_heads, N, N)."""
    tokens = np.asarray(tokens, dtype=np.float64)
    n, d = tokens.shape
    d_head = d // params.n_heads
    q = tokens @ params.wq.T + params.bq
    k = tokens @ params.wk.T + params.bk
    qh = q.reshape(n, params.n_heads, d_head).transpose(1, 0, 2)
    kh = k.reshape(n, params.n_heads, d_head).transpose(1, 0, 2)
    scores = qh @ kh.transpose(0, 2, 1) / math.sqrt(d_head)
    return softmax(scores, axis=-1)


def transformer_encoder_forward(tokens, params: EncoderParams,
                                return_attn: bool = False):
    """Self-attention over all tokens (no mask, no positional encoding),
    residual + layer norm, position-wise ReLU FFN, residual + layer norm."""
    tokens = np.asarray(tokens, dtype=np.float64)
    n, d = tokens.shape
    if d % params.n_heads:
        raise ValueError(f"token width {d} not divisible by {params.n_heads} heads")
    d_head = d // params.n_heads
    attn = attention_weights(tokens, params)
    v = tokens @ params.wv.T + params.bv
    vh = v.reshape(n, params.n_heads, d_head).transpose(1, 0, 2)
    ctx = attn @ vh                                   # (heads, N, d_head)
    merged = ctx.transpose(1, 0, 2).reshape(n, d)
    attn_out = merged @ params.wo.T + params.bo
    x = layer_norm(tokens + attn_out, params.ln1_scale, params.ln1_offset)
    ffn = relu(x @ params.ffn_w1.T + params.ffn_b1) @ params.ffn_w2.T + params.ffn_b2
    out = layer_norm(x + ffn, params.ln2_scale, params.ln2_offset)
    if return_attn:
        return out, attn
    return out
