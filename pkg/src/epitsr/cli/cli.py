import sys
from enum import Enum, unique
from typing import List, Optional

from loguru import logger

from .. import VERSION
from ..errors import EpitError
from .util import (
    run_attn_dump,
    run_eval,
    run_gen_synth,
    run_gradcheck,
    run_param_count,
    run_shear_sweep,
    run_sr,
    run_train,
)


USAGE = (
    "-" * 70
    + "\n"
    + "| Usage:                                                             |\n"
    + "|   epitsr-cli gen-synth -h: generate a synthetic light-field set    |\n"
    + "|   epitsr-cli train -h: train EPIT on a light-field set             |\n"
    + "|   epitsr-cli sr -h: super-resolve one light field                  |\n"
    + "|   epitsr-cli eval -h: PSNR/SSIM over a light-field set             |\n"
    + "|   epitsr-cli shear-sweep -h: disparity robustness sweep            |\n"
    + "|   epitsr-cli attn-dump -h: dump a cross-view attention map         |\n"
    + "|   epitsr-cli gradcheck -h: finite-difference gradient suites       |\n"
    + "|   epitsr-cli param-count -h: parameter count per component         |\n"
    + "|   epitsr-cli version: show version info                            |\n"
    + "-" * 70
)


WELCOME = (
    "-" * 58
    + "\n"
    + "| Welcome to epitsr, version {}".format(VERSION)
    + " " * (28 - len(VERSION))
    + "|\n|"
    + " " * 56
    + "|\n"
    + "| EPI-Transformer light-field super-resolution toolkit   |\n"
    + "-" * 58
)


@unique
class Command(str, Enum):
    GEN_SYNTH = "gen-synth"
    TRAIN = "train"
    SR = "sr"
    EVAL = "eval"
    SHEAR_SWEEP = "shear-sweep"
    ATTN_DUMP = "attn-dump"
    GRADCHECK = "gradcheck"
    PARAM_COUNT = "param-count"
    VERSION = "version"
    HELP = "help"


_RUNNERS = {
    Command.GEN_SYNTH: run_gen_synth,
    Command.TRAIN: run_train,
    Command.SR: run_sr,
    Command.EVAL: run_eval,
    Command.SHEAR_SWEEP: run_shear_sweep,
    Command.ATTN_DUMP: run_attn_dump,
    Command.GRADCHECK: run_gradcheck,
    Command.PARAM_COUNT: run_param_count,
}


def dispatch(argv: List[str]) -> int:
    r"""
    Run one subcommand and return its exit code: 0 on success, 1 for usage or
    configuration errors, 2 for data errors, 3 for numeric aborts.
    """
    argv = list(argv)
    command = argv.pop(0) if argv else Command.HELP
    if command in (Command.HELP, "-h", "--help"):
        print(USAGE)
        return 0
    if command == Command.VERSION:
        print(WELCOME)
        return 0
    if command not in _RUNNERS:
        logger.error(f"Unknown command `{command}`.")
        print(USAGE)
        return 1
    try:
        return _RUNNERS[Command(command)](argv)
    except EpitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except SystemExit as e:
        # argparse exits after printing `--help`.
        return e.code if isinstance(e.code, int) else 0


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))
