import json
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from ..arguments import (
    AttentionArguments,
    EpitConfig,
    EvalArguments,
    GradCheckArguments,
    RunArguments,
    SRArguments,
    SweepArguments,
    SynthArguments,
    TrainConfig,
)
from ..dataset import LightFieldDataset
from ..errors import ConfigError
from ..evaluator import (
    AttentionDump,
    BicubicUpsampler,
    MetricReport,
    attn_dump,
    evaluate_dataset,
    shear_sweep,
    write_csv,
)
from ..lightfield import LightField, load_lf, random_texture, required_texture_size, save_lf, synth_lf
from ..model import EpitModel, build_weights, load_checkpoint, param_breakdown, run_gradcheck
from ..training import TrainResult, train_loop


PathLike = Union[str, Path]


def write_provenance(path: PathLike, config_hash: Optional[str], command: str, **extra: Any) -> Path:
    r"""Write `<artifact>.provenance.json` next to a binary or image artifact."""
    path = Path(path)
    sidecar = path.with_name(path.name + ".provenance.json")
    payload = {"artifact": path.name, "command": command, "config_sha256": config_hash, **extra}
    sidecar.write_text(json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n", encoding="utf-8")
    return sidecar


class Core:
    r"""
    Runs every epitsr pipeline from parsed arguments: dataset generation, training,
    super-resolution, evaluation, the shear sweep, attention dumps, gradient checks
    and parameter counts.
    """

    def __init__(self, run_args: "RunArguments") -> None:
        self.run_args = run_args

    def _require(self, name: str) -> str:
        value = getattr(self.run_args, name)
        if not value:
            raise ConfigError(f"`--{name}` is required for this command.")
        return value

    def load_model(self, scale: Optional[int] = None):
        r"""Load the checkpoint named by `--model`, or the bicubic baseline for `bicubic`."""
        source = self._require("model")
        if source == "bicubic":
            return BicubicUpsampler(scale or 2)
        model, _ = load_checkpoint(source)
        logger.info(f"Loaded model `{model.name}` ({model.param_count()} parameters) from `{source}`.")
        if scale is not None and model.config.mode == "spatial_sr" and model.scale != scale:
            raise ConfigError(f"Checkpoint `{source}` upscales by {model.scale}, but `scale`={scale} was requested.")
        return model

    def load_scenes(self) -> List[Tuple[str, LightField]]:
        scenes = LightFieldDataset(self._require("input")).get_all_scenes()
        if not scenes:
            raise ConfigError(f"`{self.run_args.input}` holds no light fields (`*.lf4d` or view directories).")
        return scenes

    def generate_synthetic(self, synth_args: "SynthArguments", config_hash: Optional[str] = None) -> List[Path]:
        out_dir = Path(self._require("out"))
        rng = np.random.default_rng(self.run_args.seed)
        extents = (synth_args.u_views, synth_args.v_views, synth_args.height, synth_args.width)
        paths = []
        for index in tqdm(range(synth_args.num_scenes), desc="Generate"):
            disparity = int(rng.integers(synth_args.disparity_min, synth_args.disparity_max + 1))
            texture_seed = int(rng.integers(0, 2 ** 31 - 1))
            texture = random_texture(
                *required_texture_size(disparity, extents),
                seed=texture_seed,
                smoothness=synth_args.smoothness,
                channels=synth_args.channels,
            )
            lf = synth_lf(texture, disparity, extents)
            suffix = ".lf4d" if synth_args.format == "lf4d" else ""
            path = save_lf(lf, out_dir / f"scene_{index:03d}{suffix}")
            if synth_args.format == "lf4d":
                write_provenance(path, config_hash, "gen-synth", disparity=disparity, texture_seed=texture_seed)
            paths.append(path)
        logger.success(f"Wrote {len(paths)} synthetic scene(s) to `{out_dir}`.")
        return paths

    def train(self, model_config: "EpitConfig", train_config: "TrainConfig", config_hash: Optional[str] = None) -> TrainResult:
        out_dir = Path(self._require("out"))
        dataset = LightFieldDataset(self._require("input"))
        result = train_loop(dataset, model_config, train_config, out_dir=out_dir, config_hash=config_hash)
        write_csv(result.trace, out_dir / "trace.csv", config_hash)
        logger.success(f"Saved loss trace and {len(result.checkpoints)} checkpoint(s) in `{out_dir.resolve()}`.")
        return result

    def super_resolve(self, sr_args: "SRArguments", config_hash: Optional[str] = None) -> Path:
        model = self.load_model(sr_args.scale)
        lf = load_lf(self._require("input"))
        out = model(lf)
        path = save_lf(out, self._require("out"))
        if path.is_file():
            write_provenance(path, config_hash, "sr", model=getattr(model, "name", "model"), shape=list(out.shape))
        logger.success(f"Wrote {out.shape} light field to `{path}`.")
        return path

    def evaluate(self, eval_args: "EvalArguments", config_hash: Optional[str] = None) -> MetricReport:
        model = self.load_model(eval_args.scale)
        report = evaluate_dataset(
            model,
            self.load_scenes(),
            eval_args.scale,
            shave=eval_args.shave,
            rgb_metrics=eval_args.rgb_metrics,
            threads=self.run_args.threads,
        )
        if self.run_args.out:
            report.to_csv(self.run_args.out, config_hash)
            logger.success(f"Saved per-view metrics in `{Path(self.run_args.out).resolve()}`.")
        if eval_args.grid_scene is not None:
            if eval_args.grid_scene not in set(report.per_view["scene"]):
                raise ConfigError(f"`grid_scene`={eval_args.grid_scene} is not a scene of `{self.run_args.input}`.")
            write_csv(report.grid(eval_args.grid_scene), eval_args.grid_out, config_hash)
        return report

    def shear_sweep(
        self,
        eval_args: "EvalArguments",
        sweep_args: "SweepArguments",
        config_hash: Optional[str] = None,
    ) -> pd.DataFrame:
        model = self.load_model(eval_args.scale)
        frame = shear_sweep(
            model,
            self.load_scenes(),
            sweep_args.shear_values(),
            eval_args.scale,
            shave=eval_args.shave,
            threads=self.run_args.threads,
        )
        if self.run_args.out:
            write_csv(frame, self.run_args.out, config_hash)
            logger.success(f"Saved shear sweep in `{Path(self.run_args.out).resolve()}`.")
        return frame

    def attention_dump(self, attention_args: "AttentionArguments", config_hash: Optional[str] = None) -> AttentionDump:
        model = self.load_model()
        if not isinstance(model, EpitModel):
            raise ConfigError("`attn-dump` needs an EPIT checkpoint, not the bicubic baseline.")
        dump = attn_dump(
            model,
            load_lf(self._require("input")),
            attention_args.block,
            attention_args.orient,
            attention_args.query_group,
        )
        if self.run_args.out:
            meta = {"block": dump.block_index, "orient": dump.orientation.value, "query_group": dump.query_group}
            for artifact in dump.save(self.run_args.out):
                write_provenance(artifact, config_hash, "attn-dump", **meta)
            logger.success(f"Saved attention slices of group {dump.query_group} in `{self.run_args.out}`.")
        return dump

    def gradient_check(self, gradcheck_args: "GradCheckArguments", config_hash: Optional[str] = None) -> pd.DataFrame:
        frame = run_gradcheck(
            gradcheck_args.mode,
            h=gradcheck_args.h,
            rtol=gradcheck_args.rtol,
            max_entries=gradcheck_args.max_entries,
            seed=self.run_args.seed,
        )
        if self.run_args.out:
            write_csv(frame, self.run_args.out, config_hash)
        return frame

    def param_count(self, model_config: "EpitConfig", config_hash: Optional[str] = None) -> pd.DataFrame:
        frame = param_breakdown(build_weights(model_config))
        frame = pd.concat([frame, pd.DataFrame([{"component": "total", "params": int(frame["params"].sum())}])], ignore_index=True)
        if self.run_args.out:
            write_csv(frame, self.run_args.out, config_hash)
        return frame
