import numpy as np
import pytest

from axmb.grid import build_grid
from axmb.io_cli import Config
from axmb.state import InitialProfile


def bump_config(Nr=128, Nz=128, T=1.0, scheme="upwind1", dt_out=0.02,
                cfl_adv=0.3, cfl_diff=0.2, mu=0.0, **kw) -> Config:
    """The canonical swirl+magnetic+thermal bump problem (run 1 family).

    The domain is generous relative to the unit-diffusivity spreading
    length 2*sqrt(T), so the magnetic and thermal bumps stay essentially
    interior over T = 1.
    """
    return Config(
        Nr=Nr, Nz=Nz, R=4.0, Lz=8.0, T=T, dt_out=dt_out,
        cfl_adv=cfl_adv, cfl_diff=cfl_diff, mu=mu,
        swirl=InitialProfile("swirl-bump", 0.8, 0.4, 4.0),
        magnetic=InitialProfile("magnetic-bump", 0.4, 0.45, 4.0),
        thermal=InitialProfile("thermal-bump", 0.4, 0.45, 4.0),
        scheme=scheme, **kw)


@pytest.fixture(scope="session")
def grid64():
    return build_grid(64, 64, 1.0, 1.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
