from dataclasses import dataclass, field
from typing import Literal


@dataclass
class TrainConfig:
    r"""
    Arguments for training.
    """

    scale: int = field(
        default=2,
        metadata={"help": "Spatial upscale factor; HR patches are downscaled by it."}
    )

    hr_patch: int = field(
        default=64,
        metadata={"help": "Side of the HR training patches (64 for 2x, 128 for 4x)."}
    )

    batch_size: int = field(
        default=4,
        metadata={"help": "Patch pairs per optimizer step."}
    )

    epochs: int = field(
        default=80,
        metadata={"help": "Passes over the patch set."}
    )

    lr0: float = field(
        default=2e-4,
        metadata={"help": "Initial learning rate."}
    )

    lr_halve_every: int = field(
        default=15,
        metadata={"help": "The learning rate halves after this many schedule units."}
    )

    schedule_unit: Literal["epoch", "step"] = field(
        default="epoch",
        metadata={"help": "Unit counted by `lr_halve_every`."}
    )

    adam_beta1: float = field(
        default=0.9,
        metadata={"help": "Adam first-moment decay."}
    )

    adam_beta2: float = field(
        default=0.999,
        metadata={"help": "Adam second-moment decay."}
    )

    adam_eps: float = field(
        default=1e-8,
        metadata={"help": "Adam denominator epsilon."}
    )

    seed: int = field(
        default=0,
        metadata={"help": "Seed of initialization, shuffling and augmentation."}
    )

    augment_hflip: bool = field(
        default=True,
        metadata={"help": "Randomly flip w together with the v view order."}
    )

    augment_vflip: bool = field(
        default=True,
        metadata={"help": "Randomly flip h together with the u view order."}
    )

    augment_rot90: bool = field(
        default=True,
        metadata={"help": "Randomly rotate spatial axes and the angular grid by 90 degrees."}
    )

    random_crop: bool = field(
        default=False,
        metadata={"help": "Sample random crops instead of the non-overlapping patch grid."}
    )

    patches_per_scene: int = field(
        default=8,
        metadata={"help": "Crops drawn per scene when `random_crop` is set."}
    )

    save_every: int = field(
        default=0,
        metadata={"help": "Write a checkpoint every N epochs (0 writes only the final one)."}
    )

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("`scale` should be positive.")
        if self.hr_patch < 1 or self.hr_patch % self.scale:
            raise ValueError("`hr_patch` must be a positive multiple of `scale`.")
        if self.epochs < 1:
            raise ValueError("`epochs` should be at least 1.")
        if self.batch_size < 1:
            raise ValueError("`batch_size` should be positive.")
        if self.lr0 < 0:
            raise ValueError("`lr0` should not be negative.")
        if self.lr_halve_every < 1:
            raise ValueError("`lr_halve_every` should be positive.")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ValueError("`adam_beta1` and `adam_beta2` must lie in [0, 1).")
        if self.patches_per_scene < 1:
            raise ValueError("`patches_per_scene` should be positive.")
        if self.save_every < 0:
            raise ValueError("`save_every` should not be negative.")
