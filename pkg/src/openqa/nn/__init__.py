"""Double-precision neural kernel: tensors are numpy float64 arrays,
parameters live in named, seed-recorded collections, and every layer has
a hand-written backward pass verified by finite differences."""

from .ops import (
    cosine,
    cosine_backward,
    cross_entropy,
    matmul,
    sigmoid,
    softmax,
    softmax_backward,
    softmax_cross_entropy,
)
from .params import Grads, ModelParameters, accumulate, grad_check, sgd_step
from .layers import (
    attention,
    attention_backward,
    bidirectional_backward,
    bidirectional_encode,
    conv1d_backward,
    conv1d_forward,
    embedding_backward,
    embedding_lookup,
    gru_step,
    gru_step_backward,
    init_bidirectional,
    init_gru,
    init_lstm,
    init_transformer_layer,
    layer_norm,
    layer_norm_backward,
    linear_backward,
    linear_forward,
    lstm_step,
    lstm_step_backward,
    transformer_encoder_layer,
    transformer_encoder_layer_backward,
)

__all__ = [
    "Grads", "ModelParameters", "accumulate", "grad_check", "sgd_step",
    "matmul", "softmax", "softmax_backward", "softmax_cross_entropy",
    "cross_entropy", "cosine", "cosine_backward", "sigmoid",
    "linear_forward", "linear_backward",
    "embedding_lookup", "embedding_backward",
    "conv1d_forward", "conv1d_backward",
    "gru_step", "gru_step_backward", "lstm_step", "lstm_step_backward",
    "init_gru", "init_lstm", "init_bidirectional",
    "bidirectional_encode", "bidirectional_backward",
    "attention", "attention_backward",
    "layer_norm", "layer_norm_backward",
    "init_transformer_layer", "transformer_encoder_layer",
    "transformer_encoder_layer_backward",
]
