from pathlib import Path
from typing import Iterator, List, Tuple, Union

from loguru import logger

from ..errors import DataError
from ..lightfield import LightField, is_lf_path, load_lf


class LightFieldDataset:
    r"""
    Scenes stored under one directory: `*.lf4d` files and view directories holding
    an `lf.meta`, listed by name in sorted order. `root` may also point at a single
    light field, which then forms a one-scene dataset.
    """

    def __init__(self, root: Union[str, Path]) -> None:
        self.root = Path(root)
        if not self.root.exists():
            raise DataError(f"Dataset path `{self.root}` does not exist.")

    def get_all_scene_paths(self) -> List[Path]:
        if is_lf_path(self.root):
            return [self.root]
        return sorted((p for p in self.root.iterdir() if is_lf_path(p)), key=lambda p: p.name)

    def get_all_scene_names(self) -> List[str]:
        return [path.stem if path.is_file() else path.name for path in self.get_all_scene_paths()]

    def load(self, name: str) -> LightField:
        for scene_name, path in zip(self.get_all_scene_names(), self.get_all_scene_paths()):
            if scene_name == name:
                return load_lf(path)
        raise DataError(f"Dataset `{self.root}` has no scene `{name}`.")

    def get_all_scenes(self) -> List[Tuple[str, LightField]]:
        scenes = [(name, load_lf(path)) for name, path in zip(self.get_all_scene_names(), self.get_all_scene_paths())]
        logger.info(f"Loaded {len(scenes)} scene(s) from `{self.root}`.")
        return scenes

    def __iter__(self) -> Iterator[LightField]:
        for path in self.get_all_scene_paths():
            yield load_lf(path)

    def __len__(self) -> int:
        return len(self.get_all_scene_paths())
