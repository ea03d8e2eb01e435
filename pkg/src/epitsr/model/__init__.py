from .weights import (
    EpitWeights,
    BasicTransformerWeights,
    BlockWeights,
    build_weights,
    xavier_init,
    named_parameters,
    parameter_arrays,
    param_count,
    param_breakdown,
)
from .layers import spatial_conv, attention_scores, basic_transformer, non_local_block, asr_upsample
from .epit import EpitModel, AttentionCapture, epit_forward
from .checkpoint import save_checkpoint, load_checkpoint
from .diagnostics import op_suite, micro_suite, run_gradcheck, all_passed


__all__ = [
    "EpitWeights",
    "BasicTransformerWeights",
    "BlockWeights",
    "build_weights",
    "xavier_init",
    "named_parameters",
    "parameter_arrays",
    "param_count",
    "param_breakdown",
    "spatial_conv",
    "attention_scores",
    "basic_transformer",
    "non_local_block",
    "asr_upsample",
    "EpitModel",
    "AttentionCapture",
    "epit_forward",
    "save_checkpoint",
    "load_checkpoint",
    "op_suite",
    "micro_suite",
    "run_gradcheck",
    "all_passed",
]
