from .run_args import RunArguments
from .model_args import EpitConfig, SCALES
from .train_args import TrainConfig
from .synth_args import SynthArguments
from .eval_args import EvalArguments, SweepArguments, AttentionArguments, SRArguments, parse_shear_range
from .gradcheck_args import GradCheckArguments
from .argparser import DataclassArgumentParser, load_config_file
from .parser import (
    get_synth_args,
    get_train_args,
    get_sr_args,
    get_eval_args,
    get_sweep_args,
    get_attention_args,
    get_gradcheck_args,
    get_param_count_args,
    config_hash,
)


__all__ = [
    "RunArguments",
    "EpitConfig",
    "SCALES",
    "TrainConfig",
    "SynthArguments",
    "EvalArguments",
    "SweepArguments",
    "AttentionArguments",
    "SRArguments",
    "parse_shear_range",
    "GradCheckArguments",
    "DataclassArgumentParser",
    "load_config_file",
    "get_synth_args",
    "get_train_args",
    "get_sr_args",
    "get_eval_args",
    "get_sweep_args",
    "get_attention_args",
    "get_gradcheck_args",
    "get_param_count_args",
    "config_hash",
]
