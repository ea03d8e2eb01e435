from dataclasses import dataclass, field
from typing import Literal


@dataclass
class SynthArguments:
    r"""
    Arguments for generating a synthetic light-field dataset.
    """

    num_scenes: int = field(
        default=4,
        metadata={"help": "Number of scenes to generate."}
    )

    u_views: int = field(
        default=5,
        metadata={"help": "Angular extent U of every scene."}
    )

    v_views: int = field(
        default=5,
        metadata={"help": "Angular extent V of every scene."}
    )

    height: int = field(
        default=64,
        metadata={"help": "View height H in pixels."}
    )

    width: int = field(
        default=64,
        metadata={"help": "View width W in pixels."}
    )

    channels: int = field(
        default=1,
        metadata={"help": "Channels per view (1 or 3)."}
    )

    disparity_min: int = field(
        default=-2,
        metadata={"help": "Smallest integer disparity drawn for a scene."}
    )

    disparity_max: int = field(
        default=2,
        metadata={"help": "Largest integer disparity drawn for a scene."}
    )

    smoothness: int = field(
        default=4,
        metadata={"help": "Upsampling factor of the random texture; larger is smoother."}
    )

    format: Literal["lf4d", "png"] = field(
        default="lf4d",
        metadata={"help": "Write scenes as `.lf4d` files or PNG view directories."}
    )

    def __post_init__(self):
        for name in ("num_scenes", "u_views", "v_views", "height", "width", "smoothness"):
            if getattr(self, name) < 1:
                raise ValueError(f"`{name}` should be positive.")
        if self.channels not in (1, 3):
            raise ValueError("`channels` must be one of `1` and `3`.")
        if self.disparity_min > self.disparity_max:
            raise ValueError("`disparity_min` must not exceed `disparity_max`.")
