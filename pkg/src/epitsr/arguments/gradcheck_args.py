from dataclasses import dataclass, field
from typing import Literal


@dataclass
class GradCheckArguments:
    r"""
    Arguments for the finite-difference gradient suites.
    """

    mode: Literal["micro", "ops"] = field(
        default="micro",
        metadata={"help": "`ops` checks every primitive, `micro` the end-to-end micro EPIT."}
    )

    h: float = field(
        default=1e-5,
        metadata={"help": "Central-difference step."}
    )

    rtol: float = field(
        default=1e-4,
        metadata={"help": "Largest accepted elementwise relative error."}
    )

    max_entries: int = field(
        default=0,
        metadata={"help": "Entries sampled per parameter tensor (0 checks all)."}
    )

    def __post_init__(self):
        if self.h <= 0 or self.rtol <= 0:
            raise ValueError("`h` and `rtol` should be positive.")
        if self.max_entries < 0:
            raise ValueError("`max_entries` should not be negative.")
