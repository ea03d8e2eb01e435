import dataclasses
import hashlib
import json
import sys
from typing import Any, Dict, List, Optional, Tuple

from .argparser import DataclassArgumentParser

from .run_args import RunArguments
from .model_args import EpitConfig
from .train_args import TrainConfig
from .synth_args import SynthArguments
from .eval_args import EvalArguments, SweepArguments, AttentionArguments, SRArguments
from .gradcheck_args import GradCheckArguments


_SYNTH_ARGS = [RunArguments, SynthArguments]
_SYNTH_CLS = Tuple[RunArguments, SynthArguments]
_TRAIN_ARGS = [RunArguments, EpitConfig, TrainConfig]
_TRAIN_CLS = Tuple[RunArguments, EpitConfig, TrainConfig]
_SR_ARGS = [RunArguments, SRArguments]
_SR_CLS = Tuple[RunArguments, SRArguments]
_EVAL_ARGS = [RunArguments, EvalArguments]
_EVAL_CLS = Tuple[RunArguments, EvalArguments]
_SWEEP_ARGS = [RunArguments, EvalArguments, SweepArguments]
_SWEEP_CLS = Tuple[RunArguments, EvalArguments, SweepArguments]
_ATTENTION_ARGS = [RunArguments, AttentionArguments]
_ATTENTION_CLS = Tuple[RunArguments, AttentionArguments]
_GRADCHECK_ARGS = [RunArguments, GradCheckArguments]
_GRADCHECK_CLS = Tuple[RunArguments, GradCheckArguments]
_PARAM_COUNT_ARGS = [RunArguments, EpitConfig]
_PARAM_COUNT_CLS = Tuple[RunArguments, EpitConfig]


def _parse_args(
    parser: "DataclassArgumentParser",
    args: Optional[Dict[str, Any]] = None,
    argv: Optional[List[str]] = None,
) -> Tuple[Any]:
    if args is not None:
        return parser.parse_dict(args)

    argv = sys.argv[1:] if argv is None else argv
    if len(argv) == 1 and argv[0].endswith((".yaml", ".yml")):
        return parser.parse_yaml_file(argv[0])

    return parser.parse_argv(argv)


def _make_parser(command: str, dataclass_types) -> "DataclassArgumentParser":
    return DataclassArgumentParser(dataclass_types, prog=f"epitsr-cli {command}")


def get_synth_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _SYNTH_CLS:
    return _parse_args(_make_parser("gen-synth", _SYNTH_ARGS), args, argv)


def get_train_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _TRAIN_CLS:
    return _parse_args(_make_parser("train", _TRAIN_ARGS), args, argv)


def get_sr_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _SR_CLS:
    return _parse_args(_make_parser("sr", _SR_ARGS), args, argv)


def get_eval_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _EVAL_CLS:
    return _parse_args(_make_parser("eval", _EVAL_ARGS), args, argv)


def get_sweep_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _SWEEP_CLS:
    return _parse_args(_make_parser("shear-sweep", _SWEEP_ARGS), args, argv)


def get_attention_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _ATTENTION_CLS:
    return _parse_args(_make_parser("attn-dump", _ATTENTION_ARGS), args, argv)


def get_gradcheck_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _GRADCHECK_CLS:
    return _parse_args(_make_parser("gradcheck", _GRADCHECK_ARGS), args, argv)


def get_param_count_args(args: Optional[Dict[str, Any]] = None, argv: Optional[List[str]] = None) -> _PARAM_COUNT_CLS:
    return _parse_args(_make_parser("param-count", _PARAM_COUNT_ARGS), args, argv)


def config_hash(*configs: Any) -> str:
    r"""
    SHA-256 of the merged configuration. Fields marked `hashed: False` (output paths,
    worker counts, the config file path itself) do not change the hash.
    """
    payload = {}
    for config in configs:
        payload[type(config).__name__] = {
            f.name: getattr(config, f.name)
            for f in dataclasses.fields(config)
            if f.metadata.get("hashed", True)
        }
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
