import numpy as np
import pytest

from epitsr.arguments import EpitConfig
from epitsr.lightfield import random_texture, required_texture_size, synth_lf


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def micro_config():
    return EpitConfig.micro()


@pytest.fixture
def texture():
    return random_texture(48, 48, seed=7)


@pytest.fixture
def make_scene():
    r"""Synthetic constant-disparity scene whose texture margins are exactly what `d` needs."""

    def make(extents=(3, 3, 16, 16), disparity=1, seed=0, channels=1):
        size = required_texture_size(disparity, extents)
        return synth_lf(random_texture(*size, seed=seed, channels=channels), disparity, extents)

    return make
