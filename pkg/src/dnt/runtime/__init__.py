"""Minimal differentiable runtime: layers, LSTM, loss, SGD and gradient checking."""

from .gradcheck import GradCheckReport, check_scalar_function, gradient_check, relative_error
from .layers import (BatchNorm, Conv2d, Dense, Dropout, GlobalAvgPool, Layer, MaxPool2,
                     Parameter, ReLU, global_average_pool)
from .loss import softmax, softmax_cross_entropy
from .lstm import LSTMCell, lstm_sequence
from .optim import sgd_step, zero_grads
from .resize import BilinearResize, bilinear_resize, interp_matrix

__all__ = [
    "BatchNorm", "BilinearResize", "Conv2d", "Dense", "Dropout", "GlobalAvgPool", "GradCheckReport",
    "LSTMCell", "Layer", "MaxPool2", "Parameter", "ReLU", "bilinear_resize", "check_scalar_function",
    "global_average_pool", "gradient_check", "interp_matrix", "lstm_sequence", "relative_error",
    "sgd_step", "softmax", "softmax_cross_entropy", "zero_grads",
]
