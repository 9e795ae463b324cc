"""Numeric substrate: 1-D layers, losses, optimizers and gradient checking."""

from .functional import (
    SELU_ALPHA,
    SELU_LAMBDA,
    batchnorm1d_backward,
    batchnorm1d_forward,
    conv1d_backward,
    conv1d_forward,
    conv1d_output_length,
    conv1d_transpose_backward,
    conv1d_transpose_forward,
    conv1d_transpose_output_length,
    dense_backward,
    dense_forward,
    maxpool1d_backward,
    maxpool1d_forward,
    pool1d_output_length,
    selu,
    selu_grad,
    softmax,
)
from .gradcheck import GradCheckReport, gradient_check, relative_error
from .layers import (
    Activation,
    BatchNorm1d,
    Conv1d,
    ConvTranspose1d,
    Dense,
    LayerSpec,
    MaxPool1d,
    Sequential,
    build_layer,
)
from .losses import cross_entropy_loss, mse_loss
from .optim import OptimizerConfig, optimizer_step
from .params import Param, ParamStore

__all__ = [
    "SELU_ALPHA", "SELU_LAMBDA", "Activation", "BatchNorm1d", "Conv1d",
    "ConvTranspose1d", "Dense", "GradCheckReport", "LayerSpec", "MaxPool1d",
    "OptimizerConfig", "Param", "ParamStore", "Sequential", "batchnorm1d_backward",
    "batchnorm1d_forward", "build_layer", "conv1d_backward", "conv1d_forward",
    "conv1d_output_length", "conv1d_transpose_backward", "conv1d_transpose_forward",
    "conv1d_transpose_output_length", "cross_entropy_loss", "dense_backward",
    "dense_forward", "gradient_check", "maxpool1d_backward", "maxpool1d_forward",
    "mse_loss", "optimizer_step", "pool1d_output_length", "relative_error", "selu",
    "selu_grad", "softmax",
]
