from .lightfield import LightField, EpiVolume, Orientation, to_epi, from_epi, transpose_lf, rgb_to_y
from .resample import cubic_kernel, resize_matrix, sample_matrix, bicubic_resize, resize_lf, as_fraction
from .shear import ShearSpec, shear, center_crop, angular_center
from .synth import synth_lf, random_texture, required_texture_size
from .io import load_lf, save_lf, read_lf4d, write_lf4d, is_lf_path


__all__ = [
    "LightField",
    "EpiVolume",
    "Orientation",
    "to_epi",
    "from_epi",
    "transpose_lf",
    "rgb_to_y",
    "cubic_kernel",
    "resize_matrix",
    "sample_matrix",
    "bicubic_resize",
    "resize_lf",
    "as_fraction",
    "ShearSpec",
    "shear",
    "center_crop",
    "angular_center",
    "synth_lf",
    "random_texture",
    "required_texture_size",
    "load_lf",
    "save_lf",
    "read_lf4d",
    "write_lf4d",
    "is_lf_path",
]
