import numpy as np
import pytest

from epitsr.arguments import EpitConfig
from epitsr.errors import ChannelError, DataError, FormatError, ShapeMismatchError
from epitsr.lightfield import LightField
from epitsr.model import (
    AttentionCapture,
    EpitModel,
    build_weights,
    epit_forward,
    load_checkpoint,
    param_count,
    parameter_arrays,
    save_checkpoint,
    xavier_init,
)
from epitsr.model.weights import replace_arrays
from epitsr.training import loss_and_grads


MICRO_PARAMS = 3993
STEM, TRANSFORMER, SPATIAL, HEAD = 1248, 632, 1752, 361


def _lf(rng, extents, channels=1):
    return LightField(rng.random(extents + (channels,)).astype(np.float32))


class TestForwardShapes:
    def test_five_by_five_scale_two(self, rng, micro_config):
        out = EpitModel(micro_config)(_lf(rng, (5, 5, 32, 32)))
        assert out.shape == (5, 5, 64, 64, 1)

    def test_scale_four(self, rng):
        out = EpitModel(EpitConfig.micro(scale=4))(_lf(rng, (3, 3, 16, 16)))
        assert out.shape == (3, 3, 64, 64, 1)

    @pytest.mark.parametrize("u", [2, 3, 5])
    @pytest.mark.parametrize("v", [2, 3, 5])
    @pytest.mark.parametrize("h", [8, 16, 32])
    @pytest.mark.parametrize("w", [8, 16, 32])
    @pytest.mark.parametrize("scale", [2, 4])
    def test_grids(self, rng, u, v, h, w, scale):
        out = EpitModel(EpitConfig.micro(scale=scale))(_lf(rng, (u, v, h, w)))
        assert out.shape == (u, v, scale * h, scale * w, 1)

    def test_odd_extents(self, rng, micro_config):
        assert EpitModel(micro_config)(_lf(rng, (1, 1, 5, 7))).shape == (1, 1, 10, 14, 1)

    def test_rgb(self, rng):
        model = EpitModel(EpitConfig.micro(in_channels=3, out_channels=3))
        assert model(_lf(rng, (2, 2, 6, 6), channels=3)).shape == (2, 2, 12, 12, 3)

    def test_channel_mismatch(self, rng, micro_config):
        with pytest.raises(ChannelError):
            EpitModel(micro_config)(_lf(rng, (2, 2, 6, 6), channels=3))

    def test_global_skip_on_constant(self):
        config = EpitConfig.micro(global_skip=True)
        model = EpitModel(config, build_weights(config))
        out = model(LightField(np.full((2, 2, 6, 6, 1), 0.4, dtype=np.float32)))
        np.testing.assert_allclose(out.data, 0.4, atol=1e-6)


class TestZeroWeights:
    def test_output_is_head_bias(self, rng, micro_config):
        weights = replace_arrays(build_weights(micro_config), {"head.out.bias": np.array([0.25], dtype=np.float32)})
        out = EpitModel(micro_config, weights)(_lf(rng, (3, 3, 8, 8)))
        np.testing.assert_array_equal(out.data, np.float32(0.25))

    def test_non_finite_weights_rejected(self, micro_config):
        weights = replace_arrays(build_weights(micro_config), {"head.out.bias": np.array([np.nan], dtype=np.float32)})
        with pytest.raises(FormatError):
            EpitModel(micro_config, weights)


class TestAngularMode:
    def test_two_by_two_to_seven_by_seven(self, rng):
        model = EpitModel(EpitConfig.micro(mode="angular_sr"))
        assert model(_lf(rng, (2, 2, 8, 8))).shape == (7, 7, 8, 8, 1)

    def test_wrong_input_grid(self, rng):
        model = EpitModel(EpitConfig.micro(mode="angular_sr"))
        with pytest.raises(ShapeMismatchError):
            model(_lf(rng, (3, 3, 8, 8)))

    def test_head_params(self):
        config = EpitConfig.micro(mode="angular_sr")
        assert EpitModel(config).param_count() == STEM + TRANSFORMER + SPATIAL + 3865


class TestParamCount:
    def test_micro_total(self, micro_config):
        model = EpitModel(micro_config)
        assert model.param_count() == MICRO_PARAMS
        breakdown = model.param_breakdown().set_index("component")["params"]
        assert breakdown["stem"] == STEM
        assert breakdown["blocks.0.unit"] == TRANSFORMER
        assert breakdown["blocks.0.spatial"] == SPATIAL
        assert breakdown["head"] == HEAD

    def test_no_blocks(self):
        assert param_count(build_weights(EpitConfig.micro(num_blocks=0))) == STEM + HEAD

    def test_scales_with_blocks(self):
        assert param_count(build_weights(EpitConfig.micro(num_blocks=3))) == STEM + HEAD + 3 * (TRANSFORMER + SPATIAL)

    @pytest.mark.parametrize(
        "overrides,delta",
        [
            (dict(use_horizontal=False), 0),
            (dict(use_vertical=False), 0),
            (dict(share_weights=False), TRANSFORMER),
            (dict(share_weights=False, use_vertical=False), 0),
            (dict(use_spatial_conv=False), -SPATIAL),
            (dict(use_transformer=False), 536),
        ],
    )
    def test_ablations(self, overrides, delta):
        assert param_count(build_weights(EpitConfig.micro(**overrides))) == MICRO_PARAMS + delta

    def test_full_preset(self):
        # C = D = 64 with five blocks.
        assert param_count(build_weights(EpitConfig.full_preset())) == 832193


class TestAblationVariants:
    @pytest.mark.parametrize(
        "overrides",
        [
            dict(use_horizontal=False),
            dict(use_vertical=False),
            dict(share_weights=False),
            dict(use_spatial_conv=False),
            dict(use_transformer=False),
        ],
    )
    def test_forward_and_backward(self, rng, overrides):
        model = EpitModel(EpitConfig.micro(**overrides))
        lr = rng.random((1, 2, 2, 6, 6, 1)).astype(np.float32)
        hr = rng.random((1, 2, 2, 12, 12, 1)).astype(np.float32)
        loss, grads = loss_and_grads(model, lr, hr)
        assert np.isfinite(loss)
        assert len(grads) == len(model.parameters())
        for (name, tensor), grad in zip(model.parameters(), grads):
            assert grad.shape == tensor.shape, name
            assert np.all(np.isfinite(grad)), name


class TestWeightSharing:
    def test_duplicated_unshared_weights_match_shared(self, rng):
        shared = EpitModel(EpitConfig.micro(), seed=11)
        arrays = parameter_arrays(shared.weights)
        copies = {name.replace("blocks.0.unit.", "blocks.0.unit_v."): array
                  for name, array in arrays.items() if name.startswith("blocks.0.unit.")}
        config = EpitConfig.micro(share_weights=False)
        unshared = EpitModel(config, replace_arrays(build_weights(config), {**arrays, **copies}))
        lf = _lf(rng, (3, 3, 8, 8))
        np.testing.assert_array_equal(unshared(lf).data, shared(lf).data)


class TestXavier:
    def test_deterministic(self, micro_config):
        first = parameter_arrays(xavier_init(build_weights(micro_config), 5))
        second = parameter_arrays(xavier_init(build_weights(micro_config), 5))
        for name in first:
            np.testing.assert_array_equal(first[name], second[name])

    def test_seed_changes_draws(self, micro_config):
        first = parameter_arrays(xavier_init(build_weights(micro_config), 5))
        second = parameter_arrays(xavier_init(build_weights(micro_config), 6))
        assert not np.array_equal(first["stem.convs.0.kernel"], second["stem.convs.0.kernel"])

    def test_uniform_bound_and_spread(self):
        arrays = parameter_arrays(xavier_init(build_weights(EpitConfig.micro(embed_dim=256)), 0))
        w_q = arrays["blocks.0.unit.w_q"]
        bound = np.sqrt(6.0 / 512)
        assert np.abs(w_q).max() <= bound
        assert abs(w_q.std() - bound / np.sqrt(3.0)) < 2e-3
        assert abs(w_q.mean()) < 2e-3

    def test_biases_and_gains(self, micro_config):
        arrays = parameter_arrays(xavier_init(build_weights(micro_config), 0))
        np.testing.assert_array_equal(arrays["blocks.0.unit.ln1.gamma"], 1.0)
        np.testing.assert_array_equal(arrays["blocks.0.unit.ln1.beta"], 0.0)
        np.testing.assert_array_equal(arrays["head.out.bias"], 0.0)


class TestAttentionCapture:
    def test_captures_selected_stage(self, rng, micro_config):
        capture = AttentionCapture(0, "v")
        EpitModel(micro_config)(_lf(rng, (3, 2, 5, 4)), capture)
        # Vertical EPIs group (v, w) and hold U*H tokens.
        assert capture.matrices.shape == (2 * 4, 3 * 5, 3 * 5)

    def test_other_block_not_captured(self, rng, micro_config):
        capture = AttentionCapture(1, "h")
        EpitModel(micro_config)(_lf(rng, (2, 2, 4, 4)), capture)
        assert capture.matrices is None


class TestCheckpoint:
    def test_round_trip(self, rng, tmp_path):
        model = EpitModel(EpitConfig.micro(stage_order="vh"), seed=2)
        path = save_checkpoint(model, tmp_path / "model.eptw", meta={"epoch": 3})
        loaded, meta = load_checkpoint(path)
        assert meta == {"epoch": 3}
        assert loaded.config == model.config
        lf = _lf(rng, (2, 2, 6, 6))
        np.testing.assert_array_equal(loaded(lf).data, model(lf).data)

    def test_bad_magic(self, micro_config, tmp_path):
        path = save_checkpoint(EpitModel(micro_config), tmp_path / "model.eptw")
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_trailing_bytes(self, micro_config, tmp_path):
        path = save_checkpoint(EpitModel(micro_config), tmp_path / "model.eptw")
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_truncated(self, micro_config, tmp_path):
        path = save_checkpoint(EpitModel(micro_config), tmp_path / "model.eptw")
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_duplicate_name(self, micro_config, tmp_path):
        path = save_checkpoint(EpitModel(micro_config), tmp_path / "model.eptw")
        raw = path.read_bytes()
        assert raw.count(b"stem.convs.1.bias") == 1
        # Same length and extents, so only the duplicate check can reject it.
        path.write_bytes(raw.replace(b"stem.convs.1.bias", b"stem.convs.0.bias"))
        with pytest.raises(FormatError, match="twice"):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_checkpoint(tmp_path / "absent.eptw")


def test_epit_forward_matches_model(rng, micro_config):
    model = EpitModel(micro_config, seed=4)
    lf = _lf(rng, (2, 3, 6, 5))
    np.testing.assert_array_equal(epit_forward(lf, model.weights, micro_config).data, model(lf).data)
