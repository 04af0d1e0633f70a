"""Minimal tensor/layer substrate with exact reverse-mode gradients."""

from crossaec.nn.tensor import (
    Tensor,
    add,
    constant,
    cross_entropy,
    embedding_lookup,
    layer_norm,
    masked_softmax,
    matmul,
    mul,
    no_grad,
    relu,
    reshape,
    scale,
    sub,
    swapaxes,
    tanh,
    tensor_sum,
)
from crossaec.nn.params import ParameterStore
from crossaec.nn.config import ModelConfig, OptimizerConfig
from crossaec.nn.optim import AdamOptimizer, adam_step
from crossaec.nn.layers import (
    Decoder,
    Embedding,
    Encoder,
    FeedForward,
    LayerNorm,
    Linear,
    MultiHeadAttention,
    cross_entropy_loss,
    scaled_dot_attention,
    sinusoidal_positions,
)
from crossaec.nn.gradcheck import gradient_check

__all__ = [
    "AdamOptimizer",
    "Decoder",
    "Embedding",
    "Encoder",
    "FeedForward",
    "LayerNorm",
    "Linear",
    "ModelConfig",
    "MultiHeadAttention",
    "OptimizerConfig",
    "ParameterStore",
    "Tensor",
    "adam_step",
    "add",
    "constant",
    "cross_entropy",
    "cross_entropy_loss",
    "embedding_lookup",
    "gradient_check",
    "layer_norm",
    "masked_softmax",
    "matmul",
    "mul",
    "no_grad",
    "relu",
    "reshape",
    "scale",
    "scaled_dot_attention",
    "sinusoidal_positions",
    "sub",
    "swapaxes",
    "tanh",
    "tensor_sum",
]
