from .dataset import LightFieldDataset


__all__ = [
    "LightFieldDataset",
]
