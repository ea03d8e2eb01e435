from .patches import PatchPair, make_patches, make_asr_pairs
from .augment import AugmentDraw, draw_augment, augment, augment_lf
from .optim import AdamState, adam_step, lr_at
from .trainer import TrainResult, TRACE_COLUMNS, train_loop, build_pairs, loss_and_grads
from .overfit import OverfitReport, overfit_check


__all__ = [
    "PatchPair",
    "make_patches",
    "make_asr_pairs",
    "AugmentDraw",
    "draw_augment",
    "augment",
    "augment_lf",
    "AdamState",
    "adam_step",
    "lr_at",
    "TrainResult",
    "TRACE_COLUMNS",
    "train_loop",
    "build_pairs",
    "loss_and_grads",
    "OverfitReport",
    "overfit_check",
]
