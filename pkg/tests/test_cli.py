import json

import pandas as pd
import pytest

from epitsr.arguments import EpitConfig
from epitsr.cli import dispatch
from epitsr.lightfield import load_lf
from epitsr.model import EpitModel, load_checkpoint, save_checkpoint


SMALL_SET = ["num_scenes=2", "u_views=3", "v_views=3", "height=24", "width=24"]


@pytest.fixture
def synth_dir(tmp_path):
    out = tmp_path / "synth"
    assert dispatch(["gen-synth", "--out", str(out), "--seed", "5"] + SMALL_SET) == 0
    return out


@pytest.fixture
def micro_checkpoint(tmp_path):
    return save_checkpoint(EpitModel(EpitConfig.micro(), seed=1), tmp_path / "micro.eptw")


class TestGenSynth:
    def test_writes_scenes_with_provenance(self, synth_dir):
        assert sorted(p.name for p in synth_dir.glob("*.lf4d")) == ["scene_000.lf4d", "scene_001.lf4d"]
        assert load_lf(synth_dir / "scene_000.lf4d").shape == (3, 3, 24, 24, 1)
        sidecar = json.loads((synth_dir / "scene_000.lf4d.provenance.json").read_text(encoding="utf-8"))
        assert sidecar["command"] == "gen-synth"
        assert len(sidecar["config_sha256"]) == 64

    def test_png_views(self, tmp_path):
        out = tmp_path / "png"
        assert dispatch(["gen-synth", "--out", str(out), "format=png"] + SMALL_SET) == 0
        assert load_lf(out / "scene_001").shape == (3, 3, 24, 24, 1)


class TestEval:
    def test_repeated_runs_are_byte_identical(self, synth_dir, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (first, second):
            assert dispatch(["eval", "--in", str(synth_dir), "--model", "bicubic", "--out", str(out)]) == 0
        assert first.read_bytes() == second.read_bytes()
        frame = pd.read_csv(first, comment="#")
        assert len(frame) == 2 * 9

    def test_perspective_grid(self, synth_dir, tmp_path):
        grid = tmp_path / "grid.csv"
        argv = ["eval", "--in", str(synth_dir), "--model", "bicubic", "grid_scene=scene_001", f"grid_out={grid}"]
        assert dispatch(argv) == 0
        assert list(pd.read_csv(grid, comment="#").columns) == ["u", "v", "psnr"]

    def test_missing_input(self, tmp_path):
        assert dispatch(["eval", "--in", str(tmp_path / "absent"), "--model", "bicubic"]) == 2

    def test_checkpoint_scale_mismatch(self, synth_dir, micro_checkpoint):
        assert dispatch(["eval", "--in", str(synth_dir), "--model", str(micro_checkpoint), "scale=4"]) == 1


class TestSr:
    def test_doubles_resolution(self, synth_dir, micro_checkpoint, tmp_path):
        out = tmp_path / "sr.lf4d"
        argv = ["sr", "--in", str(synth_dir / "scene_000.lf4d"), "--model", str(micro_checkpoint), "--out", str(out)]
        assert dispatch(argv) == 0
        assert load_lf(out).shape == (3, 3, 48, 48, 1)
        assert (tmp_path / "sr.lf4d.provenance.json").is_file()

    def test_missing_model_flag(self, synth_dir, tmp_path):
        assert dispatch(["sr", "--in", str(synth_dir / "scene_000.lf4d"), "--out", str(tmp_path / "x.lf4d")]) == 1


class TestTrain:
    def test_writes_trace_and_checkpoint(self, synth_dir, tmp_path):
        out = tmp_path / "run"
        argv = [
            "train", "--in", str(synth_dir), "--out", str(out),
            "epochs=1", "hr_patch=8", "channels=4", "embed_dim=4", "num_blocks=1",
        ]
        assert dispatch(argv) == 0
        trace = pd.read_csv(out / "trace.csv", comment="#")
        assert list(trace.columns) == ["epoch", "step", "lr", "loss"]
        model, meta = load_checkpoint(out / "epit_epoch001.eptw")
        assert model.config.channels == 4
        header = (out / "trace.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == f"# config_sha256={meta['config_sha256']}"

    def test_repeated_runs_are_byte_identical(self, synth_dir, tmp_path):
        runs = [tmp_path / "first", tmp_path / "second"]
        for out in runs:
            argv = ["train", "--in", str(synth_dir), "--out", str(out), "epochs=1", "hr_patch=8", "num_blocks=0"]
            assert dispatch(argv) == 0
        for name in ("trace.csv", "epit_epoch001.eptw"):
            assert (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes()


class TestShearSweep:
    def test_one_row_per_shear(self, synth_dir, tmp_path):
        out = tmp_path / "sweep.csv"
        argv = ["shear-sweep", "--in", str(synth_dir), "--model", "bicubic", "--shear=-1..1", "--out", str(out)]
        assert dispatch(argv) == 0
        assert list(pd.read_csv(out, comment="#")["shear"]) == [-1, 0, 1]


class TestAttnDump:
    def test_writes_slices(self, synth_dir, micro_checkpoint, tmp_path):
        out = tmp_path / "attn.lf4d"
        argv = [
            "attn-dump", "--in", str(synth_dir / "scene_000.lf4d"), "--model", str(micro_checkpoint),
            "--out", str(out), "orient=v", "query_group=3",
        ]
        assert dispatch(argv) == 0
        assert load_lf(out).shape == (3, 3, 24, 24, 1)
        assert out.with_suffix(".png").is_file()

    def test_group_out_of_range(self, synth_dir, micro_checkpoint):
        argv = ["attn-dump", "--in", str(synth_dir / "scene_000.lf4d"), "--model", str(micro_checkpoint), "query_group=999"]
        assert dispatch(argv) == 1


class TestDiagnostics:
    def test_param_count(self, tmp_path):
        out = tmp_path / "params.csv"
        assert dispatch(["param-count", "channels=8", "embed_dim=8", "num_blocks=1", "--out", str(out)]) == 0
        frame = pd.read_csv(out, comment="#").set_index("component")
        assert frame.loc["total", "params"] == 3993

    def test_gradcheck_ops(self):
        assert dispatch(["gradcheck", "--mode", "ops", "max_entries=4"]) == 0


class TestDispatch:
    def test_unknown_key(self):
        assert dispatch(["param-count", "bogus=1"]) == 1

    def test_unknown_command(self):
        assert dispatch(["upscale"]) == 1

    @pytest.mark.parametrize("argv", [["train", "--help"], ["version"], ["help"], []])
    def test_informational(self, argv):
        assert dispatch(argv) == 0
