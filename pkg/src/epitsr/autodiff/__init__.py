from .tensor import (
    Tensor,
    Tape,
    Gradients,
    backward,
    precision,
    default_dtype,
    detect_anomaly,
    active_tape,
    record_kinks,
)
from .functional import (
    add,
    sub,
    mul,
    scale,
    matmul,
    linear,
    rearrange,
    sum_all,
    mean,
    softmax_last,
    layer_norm,
    leaky_relu,
    conv2d,
    pixel_shuffle,
    pixel_unshuffle,
    l1_loss,
)
from .gradcheck import GradCheckResult, check_gradients, central_difference, relative_error, results_frame


__all__ = [
    "Tensor",
    "Tape",
    "Gradients",
    "backward",
    "precision",
    "default_dtype",
    "detect_anomaly",
    "active_tape",
    "record_kinks",
    "add",
    "sub",
    "mul",
    "scale",
    "matmul",
    "linear",
    "rearrange",
    "sum_all",
    "mean",
    "softmax_last",
    "layer_norm",
    "leaky_relu",
    "conv2d",
    "pixel_shuffle",
    "pixel_unshuffle",
    "l1_loss",
    "GradCheckResult",
    "check_gradients",
    "central_difference",
    "relative_error",
    "results_frame",
]
