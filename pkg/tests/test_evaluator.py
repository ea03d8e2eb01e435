import itertools
import math

import numpy as np
import pandas as pd
import pytest

from epitsr.arguments import EpitConfig
from epitsr.errors import ConfigError, ShapeMismatchError
from epitsr.evaluator import (
    BicubicUpsampler,
    MetricReport,
    PER_VIEW_COLUMNS,
    attn_dump,
    evaluate_dataset,
    evaluate_scene,
    gaussian_window,
    perspective_grid,
    psnr,
    shear_sweep,
    ssim,
    sweep_crop,
    write_csv,
)
from epitsr.lightfield import LightField, center_crop, load_lf, random_texture, required_texture_size, synth_lf
from epitsr.model import EpitModel


def _naive_ssim(a, b):
    window = gaussian_window()
    size = window.shape[0]
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    values = []
    for i in range(a.shape[0] - size + 1):
        for j in range(a.shape[1] - size + 1):
            pa, pb = a[i:i + size, j:j + size], b[i:i + size, j:j + size]
            mu_a, mu_b = np.sum(window * pa), np.sum(window * pb)
            var_a = np.sum(window * (pa - mu_a) ** 2)
            var_b = np.sum(window * (pb - mu_b) ** 2)
            cov = np.sum(window * (pa - mu_a) * (pb - mu_b))
            values.append(
                (2 * mu_a * mu_b + c1) * (2 * cov + c2) / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
            )
    return float(np.mean(values))


def _report(rows):
    return MetricReport(pd.DataFrame(rows, columns=PER_VIEW_COLUMNS))


class TestMetrics:
    def test_psnr_value(self):
        assert psnr(np.zeros((4, 4)), np.full((4, 4), 0.1)) == pytest.approx(20.0)

    def test_psnr_identical(self, rng):
        x = rng.random((8, 8))
        assert psnr(x, x) == math.inf

    def test_psnr_symmetric(self, rng):
        a, b = rng.random((8, 8)), rng.random((8, 8))
        assert psnr(a, b) == psnr(b, a)

    def test_psnr_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            psnr(np.zeros(3), np.zeros(4))

    def test_ssim_identical(self, rng):
        x = rng.random((20, 24))
        assert ssim(x, x) == 1.0

    def test_ssim_matches_window_loop(self, rng):
        a = rng.random((32, 32))
        b = np.clip(a + rng.normal(0.0, 0.1, size=a.shape), 0.0, 1.0)
        assert ssim(a, b) == pytest.approx(_naive_ssim(a, b), abs=1e-6)

    def test_ssim_too_small(self, rng):
        with pytest.raises(ShapeMismatchError):
            ssim(rng.random((10, 20)), rng.random((10, 20)))

    def test_window_is_normalized(self):
        window = gaussian_window()
        assert window.shape == (11, 11)
        assert window.sum() == pytest.approx(1.0)


class TestMetricReport:
    ROWS = [
        {"scene": "a", "u": 0, "v": 0, "psnr": 30.0, "ssim": 0.9},
        {"scene": "a", "u": 0, "v": 1, "psnr": 30.0, "ssim": 0.9},
        {"scene": "a", "u": 1, "v": 0, "psnr": 30.0, "ssim": 0.9},
        {"scene": "b", "u": 0, "v": 0, "psnr": 34.0, "ssim": 0.7},
    ]

    def test_scene_then_dataset_mean(self):
        report = _report(self.ROWS)
        assert list(report.per_scene["psnr"]) == [30.0, 34.0]
        assert report.per_dataset["psnr"] == pytest.approx(32.0)
        assert report.per_dataset["ssim"] == pytest.approx(0.8)

    def test_order_invariance(self, rng):
        rows = [
            {"scene": f"s{i % 3}", "u": i, "v": 0, "psnr": float(p), "ssim": 0.5}
            for i, p in enumerate(rng.uniform(20.0, 40.0, size=30))
        ]
        shuffled = [rows[i] for i in rng.permutation(len(rows))]
        assert _report(rows).per_dataset == _report(shuffled).per_dataset

    def test_merge_keeps_order(self):
        merged = MetricReport.merge([_report(self.ROWS[3:]), _report(self.ROWS[:3])])
        assert list(merged.per_view["scene"]) == ["b", "a", "a", "a"]

    def test_csv_caps_psnr_and_writes_hash(self, tmp_path):
        rows = [dict(self.ROWS[0], psnr=math.inf)] + self.ROWS[1:]
        path = _report(rows).to_csv(tmp_path / "metrics.csv", "deadbeef")
        assert path.read_text(encoding="utf-8").splitlines()[0] == "# config_sha256=deadbeef"
        frame = pd.read_csv(path, comment="#")
        assert list(frame.columns) == PER_VIEW_COLUMNS
        assert frame["psnr"].iloc[0] == 100.0

    def test_write_csv_leaves_frame_untouched(self, tmp_path):
        frame = pd.DataFrame({"shear": [0], "psnr": [math.inf], "ssim": [1.0]})
        write_csv(frame, tmp_path / "sweep.csv")
        assert frame["psnr"].iloc[0] == math.inf


class TestEvaluateScene:
    def test_bicubic_rows(self, make_scene):
        report = evaluate_scene(BicubicUpsampler(2), make_scene((3, 3, 24, 24)), 2, scene="plane")
        assert len(report.per_view) == 9
        assert report.metadata["model"] == "bicubic"
        assert 10.0 < report.per_dataset["psnr"] < math.inf
        assert 0.0 < report.per_dataset["ssim"] <= 1.0

    def test_crops_to_scale_multiple(self, make_scene):
        report = evaluate_scene(BicubicUpsampler(2), make_scene((2, 2, 25, 23)), 2)
        assert len(report.per_view) == 4

    def test_scale_mismatch(self, make_scene):
        with pytest.raises(ConfigError):
            evaluate_scene(BicubicUpsampler(4), make_scene((2, 2, 24, 24)), 2)

    def test_perspective_grid(self, make_scene):
        scene = make_scene((3, 3, 24, 24))
        grid = perspective_grid(BicubicUpsampler(2), scene, 2)
        per_view = evaluate_scene(BicubicUpsampler(2), scene, 2).per_view
        assert list(grid.columns) == ["u", "v", "psnr"]
        np.testing.assert_array_equal(grid["psnr"].to_numpy(), per_view["psnr"].to_numpy())

    def test_perspective_grid_mirrors_with_the_scene(self, make_scene):
        scene = make_scene((3, 5, 24, 24))
        mirrored = LightField(np.ascontiguousarray(scene.data[:, ::-1, :, ::-1]))
        grid = perspective_grid(BicubicUpsampler(2), scene, 2).pivot(index="u", columns="v", values="psnr")
        flipped = perspective_grid(BicubicUpsampler(2), mirrored, 2).pivot(index="u", columns="v", values="psnr")
        np.testing.assert_allclose(flipped.to_numpy(), grid.to_numpy()[:, ::-1], rtol=0, atol=1e-6)

    def test_micro_model(self, make_scene, micro_config):
        report = evaluate_scene(EpitModel(micro_config), make_scene((2, 2, 24, 24)), 2)
        assert np.all(np.isfinite(report.per_view["psnr"]))


class TestEvaluateDataset:
    def test_pool_matches_serial(self, make_scene):
        scenes = [(f"scene{i}", make_scene((2, 2, 24, 24), seed=i)) for i in range(3)]
        serial = evaluate_dataset(BicubicUpsampler(2), scenes, 2, threads=1)
        pooled = evaluate_dataset(BicubicUpsampler(2), scenes, 2, threads=2)
        pd.testing.assert_frame_equal(serial.per_view, pooled.per_view)


class TestShearSweep:
    EXTENTS = (5, 5, 32, 32)
    SHEARS = [-2, -1, 0, 1, 2]

    def test_zero_shear_is_plain_evaluation(self, make_scene):
        scenes = [("plane", make_scene((3, 3, 24, 24)))]
        shears = [-1, 0, 1]
        frame = shear_sweep(BicubicUpsampler(2), scenes, shears, 2).set_index("shear")
        cropped = [(name, sweep_crop(lf, shears)) for name, lf in scenes]
        plain = evaluate_dataset(BicubicUpsampler(2), cropped, 2).per_dataset
        assert frame.loc[0, "psnr"] == plain["psnr"]
        assert frame.loc[0, "ssim"] == plain["ssim"]

    def test_shear_matches_shifted_disparity(self, texture):
        scene = synth_lf(texture, 0, self.EXTENTS)
        frame = shear_sweep(BicubicUpsampler(2), [("plane", scene)], self.SHEARS, 2)
        assert list(frame["shear"]) == self.SHEARS
        for s, row in zip(self.SHEARS, frame.itertuples()):
            # The widest shear leaves 24x24 pixels for every row.
            shifted = center_crop(synth_lf(texture, s, self.EXTENTS), 24, 24)
            expected = evaluate_dataset(BicubicUpsampler(2), [("plane", shifted)], 2).per_dataset
            assert row.psnr == pytest.approx(expected["psnr"], abs=1e-9)
            assert row.ssim == pytest.approx(expected["ssim"], abs=1e-9)

    def test_empty_values(self, make_scene):
        with pytest.raises(ConfigError):
            shear_sweep(BicubicUpsampler(2), [("plane", make_scene())], [], 2)


class TestAttentionDump:
    def test_rows_are_distributions(self, rng, micro_config):
        lf = LightField(rng.random((3, 3, 6, 6, 1)).astype(np.float32))
        dump = attn_dump(EpitModel(micro_config), lf, 0, "h", 4)
        assert dump.matrix.shape == (18, 18)
        np.testing.assert_allclose(dump.matrix.sum(axis=-1), 1.0, atol=1e-12)
        assert dump.slices().shape == (3, 3, 6, 6)

    def test_constant_features_attend_uniformly(self, rng, micro_config):
        model = EpitModel(micro_config)
        model = model.with_arrays({
            f"stem.convs.{i}.kernel": np.zeros_like(conv.kernel.data) for i, conv in enumerate(model.weights.stem.convs)
        })
        lf = LightField(rng.random((2, 3, 5, 4, 1)).astype(np.float32))
        dump = attn_dump(model, lf, 0, "v", 0)
        np.testing.assert_allclose(dump.matrix, 1.0 / 10, atol=1e-12)

    def test_argmax_follows_disparity(self, micro_config):
        # Identity query/key maps make every key score at most the query's own feature,
        # so the best key in each other view is the pixel displaced by the disparity.
        disparity, extents = 1, (3, 5, 12, 16)
        texture = random_texture(*required_texture_size(disparity, extents), seed=3, smoothness=1)
        lf = synth_lf(texture, disparity, extents)
        eye = np.eye(8, dtype=np.float32)
        model = EpitModel(micro_config).with_arrays({
            "blocks.0.unit.w_in": 10.0 * eye, "blocks.0.unit.w_q": eye, "blocks.0.unit.w_k": eye,
        })
        u, h = 1, 6
        slices = attn_dump(model, lf, 0, "h", u * extents[2] + h).slices()

        width, radius = extents[3], 3
        interior = range(radius, width - radius)
        hits = total = 0
        for vq, vk in itertools.product(range(extents[1]), repeat=2):
            for wq in interior:
                wk = wq - disparity * (vk - vq)
                if vk == vq or wk not in interior:
                    continue
                total += 1
                hits += int(np.argmax(slices[vq, vk, wq]) == wk)
        assert total > 0
        assert hits >= 0.8 * total, f"{hits}/{total}"

    @pytest.mark.parametrize(
        "overrides,block,orientation,group",
        [
            ({}, 1, "h", 0),
            ({}, 0, "h", 18),
            ({"use_vertical": False}, 0, "v", 0),
            ({"use_transformer": False}, 0, "h", 0),
        ],
    )
    def test_out_of_range(self, rng, overrides, block, orientation, group):
        lf = LightField(rng.random((3, 3, 6, 6, 1)).astype(np.float32))
        with pytest.raises(ConfigError):
            attn_dump(EpitModel(EpitConfig.micro(**overrides)), lf, block, orientation, group)

    def test_save(self, rng, micro_config, tmp_path):
        lf = LightField(rng.random((3, 2, 5, 4, 1)).astype(np.float32))
        binary, image = attn_dump(EpitModel(micro_config), lf, 0, "h", 1).save(tmp_path / "attn.lf4d")
        # Horizontal EPIs hold V views of W pixels.
        assert load_lf(binary).shape == (2, 2, 4, 4, 1)
        assert image.is_file()
