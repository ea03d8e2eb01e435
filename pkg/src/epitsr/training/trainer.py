from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from ..arguments import EpitConfig, TrainConfig
from ..autodiff import Tape, Tensor, backward, l1_loss
from ..errors import ConfigError, DivergenceError
from ..lightfield import LightField
from ..model import EpitModel, save_checkpoint
from .augment import augment, draw_augment
from .optim import AdamState, adam_step, lr_at
from .patches import PatchPair, make_asr_pairs, make_patches


TRACE_COLUMNS = ["epoch", "step", "lr", "loss"]


@dataclass
class TrainResult:
    model: EpitModel
    trace: pd.DataFrame
    checkpoints: List[Path] = field(default_factory=list)

    @property
    def initial_loss(self) -> float:
        return float(self.trace["loss"].iloc[0])

    @property
    def final_loss(self) -> float:
        return float(self.trace["loss"].iloc[-1])


def build_pairs(
    scenes: Sequence[LightField],
    model_config: EpitConfig,
    train_config: TrainConfig,
    rng: np.random.Generator,
) -> List[PatchPair]:
    pairs: List[PatchPair] = []
    for scene in scenes:
        if model_config.mode == "angular_sr":
            pairs.extend(make_asr_pairs(scene, train_config, model_config, rng))
        else:
            pairs.extend(make_patches(scene, train_config, rng))
    return pairs


def _stack(batch: Sequence[PatchPair]) -> Tuple[np.ndarray, np.ndarray]:
    return np.stack([pair.lr.data for pair in batch]), np.stack([pair.hr.data for pair in batch])


def loss_and_grads(model: EpitModel, lr_batch: np.ndarray, hr_batch: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    r"""L1 loss of one batch and its gradient for every model parameter, in `parameters()` order."""
    with Tape() as tape:
        loss = l1_loss(model.forward(Tensor(lr_batch)), hr_batch)
    grads = backward(tape, loss)
    return float(loss.data), [grads[tensor] for _, tensor in model.parameters()]


def _check_config(scenes: Sequence[LightField], model_config: EpitConfig, train_config: TrainConfig) -> None:
    if model_config.mode == "spatial_sr" and model_config.scale != train_config.scale:
        raise ConfigError(
            f"Model `scale`={model_config.scale} differs from training `scale`={train_config.scale}."
        )
    if train_config.augment_rot90 and any(scene.u_views != scene.v_views for scene in scenes):
        raise ConfigError("`augment_rot90` needs square view grids; disable it with `--no_augment_rot90`.")


def train_loop(
    dataset: Iterable[LightField],
    model_config: EpitConfig,
    train_config: TrainConfig,
    out_dir: Optional[Union[str, Path]] = None,
    config_hash: Optional[str] = None,
    model: Optional[EpitModel] = None,
) -> TrainResult:
    r"""
    Train EPIT with L1 loss and Adam.

    Every random choice (initialization, patch order, augmentation, random crops)
    comes from generators seeded by `train_config.seed`, so identical inputs yield
    bit-identical loss traces. With `out_dir`, checkpoints are written every
    `save_every` epochs and after the last one.
    """
    scenes = list(dataset)
    if not scenes:
        raise ConfigError("Training needs a non-empty dataset.")
    _check_config(scenes, model_config, train_config)

    rng = np.random.default_rng(train_config.seed)
    pairs = build_pairs(scenes, model_config, train_config, rng)
    if not pairs:
        raise ConfigError("The dataset yields no training pairs.")
    if model is None:
        model = EpitModel(model_config, seed=train_config.seed)
    names = [name for name, _ in model.parameters()]
    state = AdamState.zeros_like([tensor.data for _, tensor in model.parameters()])
    betas = (train_config.adam_beta1, train_config.adam_beta2)
    logger.info(
        f"Training `{model.name}` ({model.param_count()} parameters) on {len(pairs)} pairs "
        f"from {len(scenes)} scene(s), {train_config.epochs} epoch(s)."
    )

    rows, checkpoints, step = [], [], 0
    for epoch in tqdm(range(train_config.epochs), desc="Train"):
        order = rng.permutation(len(pairs))
        epoch_losses = []
        for start in range(0, len(order), train_config.batch_size):
            batch = [augment(pairs[i], draw_augment(rng, train_config)) for i in order[start:start + train_config.batch_size]]
            lr = lr_at(epoch if train_config.schedule_unit == "epoch" else step, train_config)
            loss, grads = loss_and_grads(model, *_stack(batch))
            if not np.isfinite(loss):
                raise DivergenceError(f"Loss became non-finite ({loss}) at epoch {epoch}, step {step}.")
            arrays, state = adam_step(
                [tensor.data for _, tensor in model.parameters()], grads, state, lr, betas, train_config.adam_eps
            )
            model = model.with_arrays(dict(zip(names, arrays)))
            rows.append({"epoch": epoch, "step": step, "lr": lr, "loss": loss})
            epoch_losses.append(loss)
            step += 1
        logger.debug(f"Epoch {epoch}: mean L1 {np.mean(epoch_losses):.6f}.")

        last = epoch + 1 == train_config.epochs
        periodic = train_config.save_every and (epoch + 1) % train_config.save_every == 0
        if out_dir is not None and (last or periodic):
            meta = {"epoch": epoch + 1, "step": step, "config_sha256": config_hash, "train": asdict(train_config)}
            path = save_checkpoint(model, Path(out_dir, f"epit_epoch{epoch + 1:03d}.eptw"), meta)
            checkpoints.append(path)

    trace = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    logger.success(f"Training finished: L1 {trace['loss'].iloc[0]:.6f} -> {trace['loss'].iloc[-1]:.6f}.")
    return TrainResult(model=model, trace=trace, checkpoints=checkpoints)
