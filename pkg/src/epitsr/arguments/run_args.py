from dataclasses import dataclass, field
from typing import Optional


@dataclass
class RunArguments:
    r"""
    Arguments shared by every epitsr-cli subcommand.
    """

    config: Optional[str] = field(
        default=None,
        metadata={"help": "Flat `key=value` or YAML file providing values for any field of the subcommand.", "hashed": False}
    )

    seed: int = field(
        default=0,
        metadata={"help": "Seed controlling every random draw of the run."}
    )

    input: Optional[str] = field(
        default=None,
        metadata={"aliases": ["--in"], "help": "Input light field, scene directory or dataset directory."}
    )

    out: Optional[str] = field(
        default=None,
        metadata={"help": "Output file or directory.", "hashed": False}
    )

    model: Optional[str] = field(
        default=None,
        metadata={"help": "Checkpoint (`.eptw`) to load, or `bicubic` for the interpolation baseline."}
    )

    threads: int = field(
        default=1,
        metadata={"help": "Worker processes used to evaluate scenes.", "hashed": False}
    )

    def __post_init__(self):
        if self.threads <= 0:
            raise ValueError("`threads` should be positive.")
