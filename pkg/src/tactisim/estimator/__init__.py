"""Force-estimation inference engine: layers, model, rollout, metrics."""

from .config import Mode, ModelConfig
from .layers import (LN_EPS, EncoderParams, LSTMParams, attention_weights,
                     conv1d_forward, layer_norm, lstm_forward, relu, sigmoid,
                     softmax, transformer_encoder_forward)
from .metrics import max_horizon_for_threshold, mse_per_axis
from .model import branch_forward, forward_with_intermediates, predict_next
from .rollout import RolloutResult, baseline_linear, baseline_zoh, rollout
from .weights import (SCHEMA_VERSION, BranchWeights, ModelWeights,
                      expected_shapes, load_weights, random_weights,
                      save_weights, weights_from_tensors, weights_to_tensors)

__all__ = [
    "Mode", "ModelConfig", "LN_EPS", "EncoderParams", "LSTMParams",
    "attention_weights", "conv1d_forward", "layer_norm", "lstm_forward",
    "relu", "sigmoid", "softmax", "transformer_encoder_forward",
    "max_horizon_for_threshold", "mse_per_axis", "branch_forward",
    "forward_with_intermediates", "predict_next", "RolloutResult",
    "baseline_linear", "baseline_zoh", "rollout", "SCHEMA_VERSION",
    "BranchWeights", "ModelWeights", "expected_shapes", "load_weights",
    "random_weights", "save_weights", "weights_from_tensors",
    "weights_to_tensors",
]
