import numpy as np
import pytest

from epitsr.dataset import LightFieldDataset
from epitsr.errors import DataError
from epitsr.lightfield import LightField, save_lf


@pytest.fixture
def dataset_dir(rng, tmp_path):
    for name in ("b_scene.lf4d", "a_scene.lf4d"):
        save_lf(LightField(rng.random((2, 2, 4, 4, 1)).astype(np.float32)), tmp_path / name)
    save_lf(LightField(np.full((2, 2, 4, 4, 1), 0.0, dtype=np.float32)), tmp_path / "c_views")
    (tmp_path / "notes.txt").write_text("not a scene", encoding="utf-8")
    (tmp_path / "empty_dir").mkdir()
    return tmp_path


class TestLightFieldDataset:
    def test_sorted_listing(self, dataset_dir):
        dataset = LightFieldDataset(dataset_dir)
        assert dataset.get_all_scene_names() == ["a_scene", "b_scene", "c_views"]
        assert len(dataset) == 3

    def test_iteration_order(self, dataset_dir):
        dataset = LightFieldDataset(dataset_dir)
        scenes = dataset.get_all_scenes()
        for (_, lf), loaded in zip(scenes, dataset):
            np.testing.assert_array_equal(lf.data, loaded.data)

    def test_load_by_name(self, dataset_dir):
        assert LightFieldDataset(dataset_dir).load("c_views").shape == (2, 2, 4, 4, 1)

    def test_unknown_scene(self, dataset_dir):
        with pytest.raises(DataError):
            LightFieldDataset(dataset_dir).load("nope")

    def test_single_file(self, dataset_dir):
        dataset = LightFieldDataset(dataset_dir / "a_scene.lf4d")
        assert dataset.get_all_scene_names() == ["a_scene"]

    def test_missing_root(self, tmp_path):
        with pytest.raises(DataError):
            LightFieldDataset(tmp_path / "absent")
