from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Literal

from ..lightfield import Orientation


SCALES = (2, 4)


@dataclass
class EpitConfig:
    r"""
    Arguments for the EPIT network. Every ablation variant is a flag.
    """

    in_channels: int = field(
        default=1,
        metadata={"help": "Channels of the input light field."}
    )

    out_channels: int = field(
        default=1,
        metadata={"help": "Channels of the reconstructed light field (1 for luma, 3 for RGB)."}
    )

    channels: int = field(
        default=32,
        metadata={"help": "Feature channels C of the convolutional path."}
    )

    embed_dim: int = field(
        default=32,
        metadata={"help": "Token width D inside the Basic-Transformer units."}
    )

    num_blocks: int = field(
        default=5,
        metadata={"help": "Number of Non-Local Cascading blocks."}
    )

    mlp_hidden_ratio: int = field(
        default=2,
        metadata={"help": "Hidden width of the transformer MLP as a multiple of D."}
    )

    scale: int = field(
        default=2,
        metadata={"help": "Spatial upscale factor (2 or 4)."}
    )

    leaky_slope: float = field(
        default=0.1,
        metadata={"help": "Negative slope of every LeakyReLU."}
    )

    use_horizontal: bool = field(
        default=True,
        metadata={"help": "Run the horizontal-EPI stage of each block."}
    )

    use_vertical: bool = field(
        default=True,
        metadata={"help": "Run the vertical-EPI stage of each block."}
    )

    share_weights: bool = field(
        default=True,
        metadata={"help": "Share one Basic-Transformer between the two stages of a block."}
    )

    use_spatial_conv: bool = field(
        default=True,
        metadata={"help": "Apply the SpatialConv layer after each block stage."}
    )

    use_transformer: bool = field(
        default=True,
        metadata={"help": "Use Basic-Transformer units; when false, cascaded EPI convolutions replace them."}
    )

    mode: Literal["spatial_sr", "angular_sr"] = field(
        default="spatial_sr",
        metadata={"help": "Spatial super-resolution or 2x2 -> 7x7 angular super-resolution."}
    )

    stage_order: Literal["hv", "vh"] = field(
        default="hv",
        metadata={"help": "Order of the horizontal (h) and vertical (v) stages inside a block."}
    )

    block_residual: bool = field(
        default=True,
        metadata={"help": "Add the block input to the output of each stage."}
    )

    global_skip: bool = field(
        default=False,
        metadata={"help": "Add the bicubic-upsampled input to the reconstruction."}
    )

    asr_in_views: int = field(
        default=2,
        metadata={"help": "Angular extent of the angular-SR input grid."}
    )

    asr_out_views: int = field(
        default=7,
        metadata={"help": "Angular extent of the angular-SR output grid."}
    )

    def __post_init__(self):
        for name in ("in_channels", "out_channels", "channels", "embed_dim", "mlp_hidden_ratio"):
            if getattr(self, name) < 1:
                raise ValueError(f"`{name}` should be positive.")
        if self.num_blocks < 0:
            raise ValueError("`num_blocks` should not be negative.")
        if self.mode == "spatial_sr" and self.scale not in SCALES:
            raise ValueError("`scale` must be one of `2` and `4`.")
        if not (self.use_horizontal or self.use_vertical):
            raise ValueError("At least one of `use_horizontal` and `use_vertical` must be enabled.")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ValueError("`leaky_slope` must lie in (0, 1).")
        if self.global_skip and self.in_channels != self.out_channels:
            raise ValueError("`global_skip` requires `in_channels` == `out_channels`.")
        if self.global_skip and self.mode != "spatial_sr":
            raise ValueError("`global_skip` is only defined for `spatial_sr`.")
        if self.asr_in_views < 1 or self.asr_out_views < 1:
            raise ValueError("`asr_in_views` and `asr_out_views` should be positive.")

    @classmethod
    def full_preset(cls, **overrides) -> "EpitConfig":
        r"""C = D = 64, about 0.83M parameters with five blocks."""
        return cls(**{"channels": 64, "embed_dim": 64, **overrides})

    @classmethod
    def micro(cls, **overrides) -> "EpitConfig":
        r"""C = D = 8 with a single block, used by gradient checks and overfit runs."""
        return cls(**{"channels": 8, "embed_dim": 8, "num_blocks": 1, **overrides})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def stage_orientations(self) -> List[Orientation]:
        enabled = {Orientation.HORIZONTAL: self.use_horizontal, Orientation.VERTICAL: self.use_vertical}
        order = [Orientation(letter) for letter in self.stage_order]
        return [orientation for orientation in order if enabled[orientation]]
