from typing import List

from loguru import logger

from ..arguments import (
    config_hash,
    get_attention_args,
    get_eval_args,
    get_gradcheck_args,
    get_param_count_args,
    get_sr_args,
    get_sweep_args,
    get_synth_args,
    get_train_args,
)
from ..core import Core
from ..model import all_passed


def run_gen_synth(argv: List[str]) -> int:
    run_args, synth_args = get_synth_args(argv=argv)
    Core(run_args).generate_synthetic(synth_args, config_hash(run_args, synth_args))
    return 0


def run_train(argv: List[str]) -> int:
    run_args, model_config, train_config = get_train_args(argv=argv)
    Core(run_args).train(model_config, train_config, config_hash(run_args, model_config, train_config))
    return 0


def run_sr(argv: List[str]) -> int:
    run_args, sr_args = get_sr_args(argv=argv)
    Core(run_args).super_resolve(sr_args, config_hash(run_args, sr_args))
    return 0


def run_eval(argv: List[str]) -> int:
    run_args, eval_args = get_eval_args(argv=argv)
    Core(run_args).evaluate(eval_args, config_hash(run_args, eval_args))
    return 0


def run_shear_sweep(argv: List[str]) -> int:
    run_args, eval_args, sweep_args = get_sweep_args(argv=argv)
    Core(run_args).shear_sweep(eval_args, sweep_args, config_hash(run_args, eval_args, sweep_args))
    return 0


def run_attn_dump(argv: List[str]) -> int:
    run_args, attention_args = get_attention_args(argv=argv)
    Core(run_args).attention_dump(attention_args, config_hash(run_args, attention_args))
    return 0


def run_gradcheck(argv: List[str]) -> int:
    run_args, gradcheck_args = get_gradcheck_args(argv=argv)
    frame = Core(run_args).gradient_check(gradcheck_args, config_hash(run_args, gradcheck_args))
    logger.info("\n" + frame.to_string(index=False))
    if all_passed(frame):
        logger.success(f"Gradient suite `{gradcheck_args.mode}` passed.")
        return 0
    logger.error(f"Gradient suite `{gradcheck_args.mode}` failed.")
    return 3


def run_param_count(argv: List[str]) -> int:
    run_args, model_config = get_param_count_args(argv=argv)
    frame = Core(run_args).param_count(model_config, config_hash(run_args, model_config))
    logger.info("\n" + frame.to_string(index=False))
    return 0
