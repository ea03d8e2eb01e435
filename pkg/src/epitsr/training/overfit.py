from dataclasses import dataclass

from loguru import logger

from ..arguments import EpitConfig, TrainConfig
from ..evaluator import BicubicUpsampler, evaluate_scene
from ..lightfield import random_texture, synth_lf
from .trainer import TrainResult, train_loop


@dataclass
class OverfitReport:
    initial_loss: float
    final_loss: float
    model_psnr: float
    bicubic_psnr: float
    result: TrainResult

    @property
    def loss_ratio(self) -> float:
        return self.final_loss / self.initial_loss

    @property
    def psnr_gain(self) -> float:
        return self.model_psnr - self.bicubic_psnr


def overfit_check(
    steps: int = 500,
    seed: int = 0,
    lr0: float = 1e-3,
    halve_every: int = 150,
    disparity: int = 2,
    views: int = 2,
    patch: int = 16,
) -> OverfitReport:
    r"""
    Train the micro EPIT on one synthetic 2x scene for `steps` Adam steps (learning
    rate halved every `halve_every` steps), then compare it with bicubic
    interpolation on a held-out window of the same texture.

    The model predicts a residual over its own bicubic upsampling (`global_skip`),
    so what it fits on the training window carries over to the held-out one.
    """
    texture = random_texture(4 * patch, 4 * patch, seed=seed)
    extents = (views, views, patch, patch)
    train_scene = synth_lf(texture[: 2 * patch], disparity, extents)
    held_out = synth_lf(texture[2 * patch:], disparity, extents)

    model_config = EpitConfig.micro(scale=2, global_skip=True)
    train_config = TrainConfig(
        scale=2,
        hr_patch=patch,
        batch_size=1,
        epochs=steps,
        lr0=lr0,
        lr_halve_every=halve_every,
        schedule_unit="step",
        seed=seed,
        augment_hflip=False,
        augment_vflip=False,
        augment_rot90=False,
    )
    result = train_loop([train_scene], model_config, train_config)
    model_psnr = evaluate_scene(result.model, held_out, 2, scene="held_out").per_dataset["psnr"]
    bicubic_psnr = evaluate_scene(BicubicUpsampler(2), held_out, 2, scene="held_out").per_dataset["psnr"]
    report = OverfitReport(result.initial_loss, result.final_loss, model_psnr, bicubic_psnr, result)
    logger.info(
        f"Overfit: L1 ratio {report.loss_ratio:.4f}, held-out PSNR {model_psnr:.3f} dB "
        f"vs bicubic {bicubic_psnr:.3f} dB."
    )
    return report
