import numpy as np
import pytest

from ocdmsim import FrameLayout, SimConfig

# quarter-rate desk setup: the urban profile still spans several taps but a
# frame is ~16x cheaper than the full-size default
DESK_LAYOUT = FrameLayout(n_symbols_per_block=64, n_blocks=2, nfft=128, cp_samples=32)
DESK_FS = 5.76e6


@pytest.fixture
def rng():
    return np.random.default_rng(0xA5A5)


@pytest.fixture
def desk_layout():
    return DESK_LAYOUT


def desk_config(**overrides) -> SimConfig:
    base = dict(
        layout=DESK_LAYOUT,
        sampling_rate_hz=DESK_FS,
        ebn0_grid_db=(6.0,),
        frames_per_point=50,
    )
    base.update(overrides)
    return SimConfig(**base)
