"""Portable estimator weights: in-memory container plus JSON (de)serialization.

The file format is a single JSON document::

    {"schema_version": 1,
     "mode": "multi_modal" | "force_only",
     "config": {"window_len": 100, ...},
     "norm_stats": {"mean": [9 floats], "std": [9 floats]},
     "tensors": {"top.conv1.kernel": {"shape": [5, 3, 64], "data": [...]}, ...}}

Tensor data is row-major float64 written as JSON numbers.  The full tensor
name list lives in docs/weights_schema.md.  Linear weights use the
(out, in) convention: ``y = W @ x + b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import SchemaError, VersionError
from ..traces import NormStats
from .config import Mode, ModelConfig
from .layers import EncoderParams, LSTMParams

SCHEMA_VERSION = 1

_LSTM_GATES = ("i", "f", "g", "o")


@dataclass
class BranchWeights:
    conv1_kernel: np.ndarray
    conv1_bias: np.ndarray
    conv2_kernel: np.ndarray
    conv2_bias: np.ndarray
    lstm: LSTMParams
    proj_weight: np.ndarray | None
    proj_bias: np.ndarray | None
    encoder: EncoderParams


@dataclass
class ModelWeights:
    config: ModelConfig
    mode: Mode
    norm: NormStats
    top: BranchWeights                 # force branch
    op: BranchWeights | None           # command branch (multi-modal only)
    fuse_weight: np.ndarray
    fuse_bias: np.ndarray
    head_weight: np.ndarray
    head_bias: np.ndarray


def _branch_shapes(cfg: ModelConfig, branch: str) -> dict:
    c_in = cfg.n_force if branch == "top" else cfg.n_command
    shapes = {
        f"{branch}.conv1.kernel": (cfg.conv_width, c_in, cfg.conv_filters),
        f"{branch}.conv1.bias": (cfg.conv_filters,),
        f"{branch}.conv2.kernel": (cfg.conv_width, cfg.conv_filters, cfg.conv_filters),
        f"{branch}.conv2.bias": (cfg.conv_filters,),
    }
    for gate in _LSTM_GATES:
        shapes[f"{branch}.lstm.w_{gate}"] = (cfg.lstm_units, cfg.conv_filters)
        shapes[f"{branch}.lstm.u_{gate}"] = (cfg.lstm_units, cfg.lstm_units)
        shapes[f"{branch}.lstm.b_{gate}"] = (cfg.lstm_units,)
    if cfg.lstm_units != cfg.d_model:
        shapes[f"{branch}.proj.weight"] = (cfg.d_model, cfg.lstm_units)
        shapes[f"{branch}.proj.bias"] = (cfg.d_model,)
    for name in ("wq", "wk", "wv", "wo"):
        shapes[f"{branch}.attn.{name}"] = (cfg.d_model, cfg.d_model)
    for name in ("bq", "bk", "bv", "bo"):
        shapes[f"{branch}.attn.{name}"] = (cfg.d_model,)
    for ln in ("ln1", "ln2"):
        shapes[f"{branch}.{ln}.scale"] = (cfg.d_model,)
        shapes[f"{branch}.{ln}.offset"] = (cfg.d_model,)
    shapes[f"{branch}.ffn.w1"] = (cfg.ffn_hidden, cfg.d_model)
    shapes[f"{branch}.ffn.b1"] = (cfg.ffn_hidden,)
    shapes[f"{branch}.ffn.w2"] = (cfg.d_model, cfg.ffn_hidden)
    shapes[f"{branch}.ffn.b2"] = (cfg.d_model,)
    return shapes


def expected_shapes(cfg: ModelConfig, mode: Mode) -> dict:
    """Tensor name -> shape table for one model configuration."""
    shapes = _branch_shapes(cfg, "top")
    fuse_in = cfg.d_model
    if mode is Mode.MULTI_MODAL:
        shapes.update(_branch_shapes(cfg, "op"))
        fuse_in = 2 * cfg.d_model
    shapes["fuse.weight"] = (cfg.fuse_hidden, fuse_in)
    shapes["fuse.bias"] = (cfg.fuse_hidden,)
    shapes["head.weight"] = (cfg.n_force, cfg.fuse_hidden)
    shapes["head.bias"] = (cfg.n_force,)
    return shapes


def _branch_from_tensors(t: dict, cfg: ModelConfig, branch: str) -> BranchWeights:
    lstm = LSTMParams(
        **{f"w_{g}": t[f"{branch}.lstm.w_{g}"] for g in _LSTM_GATES},
        **{f"u_{g}": t[f"{branch}.lstm.u_{g}"] for g in _LSTM_GATES},
        **{f"b_{g}": t[f"{branch}.lstm.b_{g}"] for g in _LSTM_GATES})
    encoder = EncoderParams(
        n_heads=cfg.n_heads,
        wq=t[f"{branch}.attn.wq"], wk=t[f"{branch}.attn.wk"],
        wv=t[f"{branch}.attn.wv"], wo=t[f"{branch}.attn.wo"],
        bq=t[f"{branch}.attn.bq"], bk=t[f"{branch}.attn.bk"],
        bv=t[f"{branch}.attn.bv"], bo=t[f"{branch}.attn.bo"],
        ln1_scale=t[f"{branch}.ln1.scale"], ln1_offset=t[f"{branch}.ln1.offset"],
        ffn_w1=t[f"{branch}.ffn.w1"], ffn_b1=t[f"{branch}.ffn.b1"],
        ffn_w2=t[f"{branch}.ffn.w2"], ffn_b2=t[f"{branch}.ffn.b2"],
        ln2_scale=t[f"{branch}.ln2.scale"], ln2_offset=t[f"{branch}.ln2.offset"])
    has_proj = cfg.lstm_units != cfg.d_model
    return BranchWeights(
        conv1_kernel=t[f"{branch}.conv1.kernel"], conv1_bias=t[f"{branch}.conv1.bias"],
        conv2_kernel=t[f"{branch}.conv2.kernel"], conv2_bias=t[f"{branch}.conv2.bias"],
        lstm=lstm,
        proj_weight=t[f"{branch}.proj.weight"] if has_proj else None,
        proj_bias=t[f"{branch}.proj.bias"] if has_proj else None,
        encoder=encoder)


def weights_from_tensors(tensors: dict, cfg: ModelConfig, mode: Mode,
                         norm: NormStats) -> ModelWeights:
    """Assemble a ModelWeights from a validated name -> array mapping."""
    shapes = expected_shapes(cfg, mode)
    missing = set(shapes) - set(tensors)
    if missing:
        raise SchemaError(f"missing tensors: {sorted(missing)[:5]}")
    extra = set(tensors) - set(shapes)
    if extra:
        raise SchemaError(f"unexpected tensors: {sorted(extra)[:5]}")
    arrays = {}
    for name, shape in shapes.items():
        arr = np.asarray(tensors[name], dtype=np.float64)
        if arr.shape != shape:
            raise SchemaError(
                f"tensor {name!r} has shape {arr.shape}, expected {shape}")
        if not np.isfinite(arr).all():
            raise SchemaError(f"tensor {name!r} contains non-finite values")
        arrays[name] = arr
    top = _branch_from_tensors(arrays, cfg, "top")
    op = _branch_from_tensors(arrays, cfg, "op") if mode is Mode.MULTI_MODAL else None
    return ModelWeights(config=cfg, mode=mode, norm=norm, top=top, op=op,
                        fuse_weight=arrays["fuse.weight"], fuse_bias=arrays["fuse.bias"],
                        head_weight=arrays["head.weight"], head_bias=arrays["head.bias"])


def _branch_to_tensors(br: BranchWeights, branch: str) -> dict:
    t = {
        f"{branch}.conv1.kernel": br.conv1_kernel, f"{branch}.conv1.bias": br.conv1_bias,
        f"{branch}.conv2.kernel": br.conv2_kernel, f"{branch}.conv2.bias": br.conv2_bias,
    }
    for gate in _LSTM_GATES:
        t[f"{branch}.lstm.w_{gate}"] = getattr(br.lstm, f"w_{gate}")
        t[f"{branch}.lstm.u_{gate}"] = getattr(br.lstm, f"u_{gate}")
        t[f"{branch}.lstm.b_{gate}"] = getattr(br.lstm, f"b_{gate}")
    if br.proj_weight is not None:
        t[f"{branch}.proj.weight"] = br.proj_weight
        t[f"{branch}.proj.bias"] = br.proj_bias
    enc = br.encoder
    t.update({
        f"{branch}.attn.wq": enc.wq, f"{branch}.attn.wk": enc.wk,
        f"{branch}.attn.wv": enc.wv, f"{branch}.attn.wo": enc.wo,
        f"{branch}.attn.bq": enc.bq, f"{branch}.attn.bk": enc.bk,
        f"{branch}.attn.bv": enc.bv, f"{branch}.attn.bo": enc.bo,
        f"{branch}.ln1.scale": enc.ln1_scale, f"{branch}.ln1.offset": enc.ln1_offset,
        f"{branch}.ffn.w1": enc.ffn_w1, f"{branch}.ffn.b1": enc.ffn_b1,
        f"{branch}.ffn.w2": enc.ffn_w2, f"{branch}.ffn.b2": enc.ffn_b2,
        f"{branch}.ln2.scale": enc.ln2_scale, f"{branch}.ln2.offset": enc.ln2_offset,
    })
    return t


def weights_to_tensors(weights: ModelWeights) -> dict:
    tensors = _branch_to_tensors(weights.top, "top")
    if weights.op is not None:
        tensors.update(_branch_to_tensors(weights.op, "op"))
    tensors["fuse.weight"] = weights.fuse_weight
    tensors["fuse.bias"] = weights.fuse_bias
    tensors["head.weight"] = weights.head_weight
    tensors["head.bias"] = weights.head_bias
    return tensors


def save_weights(weights: ModelWeights, path) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": weights.mode.value,
        "config": weights.config.to_dict(),
        "norm_stats": {"mean": weights.norm.mean.tolist(),
                       "std": weights.norm.std.tolist()},
        "tensors": {name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
                    for name, arr in weights_to_tensors(weights).items()},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)


def load_weights(path) -> ModelWeights:
    """Read and shape-validate a weights file; the embedded config wins."""
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported weights schema version {version!r}")
    try:
        cfg = ModelConfig.from_dict(doc["config"])
        mode = Mode(doc["mode"])
        raw_norm = doc["norm_stats"]
        raw_tensors = doc["tensors"]
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"malformed weights file: {exc}") from None
    mean = np.asarray(raw_norm["mean"], dtype=np.float64)
    std = np.asarray(raw_norm["std"], dtype=np.float64)
    n_ch = cfg.n_channels
    if mean.shape != (n_ch,) or std.shape != (n_ch,):
        raise SchemaError(
            f"norm_stats must hold {n_ch} means and stds, got {mean.shape}, {std.shape}")
    if not (np.isfinite(mean).all() and np.isfinite(std).all() and (std > 0).all()):
        raise SchemaError("norm_stats must be finite with positive stds")
    norm = NormStats(mean=mean, std=std, constant=np.zeros(n_ch, dtype=bool))
    tensors = {}
    for name, entry in raw_tensors.items():
        try:
            arr = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"tensor {name!r}: {exc}") from None
        tensors[name] = arr
    return weights_from_tensors(tensors, cfg, mode, norm)


def random_weights(cfg: ModelConfig, mode: Mode, seed: int,
                   norm: NormStats | None = None) -> ModelWeights:
    """Seeded random initialization (1/sqrt(fan_in) scaling, unit layer norms).

    Used by tests and demos when no trained weights are available.
    """
    rng = np.random.default_rng(seed)
    if norm is None:
        norm = NormStats(mean=np.zeros(cfg.n_channels), std=np.ones(cfg.n_channels),
                         constant=np.zeros(cfg.n_channels, dtype=bool))
    tensors = {}
    for name, shape in expected_shapes(cfg, mode).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf in ("scale",):
            tensors[name] = np.ones(shape)
        elif leaf in ("offset",) or leaf.startswith("b") or leaf == "bias":
            tensors[name] = np.zeros(shape)
        else:
            fan_in = shape[-1] if len(shape) == 2 else shape[0] * shape[1]
            tensors[name] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), shape)
    return weights_from_tensors(tensors, cfg, mode, norm)
