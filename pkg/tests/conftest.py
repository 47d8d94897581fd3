import numpy as np
import pytest

from stripscat.bie import solve_antisymmetric, solve_symmetric
from stripscat.core import ProblemConfig
from stripscat.spectral import SpectralBundle

# reference configuration shared across the suite
REF_K0 = 2 + 0.05j
REF_A = 1.0
REF_ETA = 1 - 1j
REF_THETA = np.pi / 3


@pytest.fixture(scope="session")
def ref_cfg():
    return ProblemConfig(REF_K0, REF_A, REF_ETA, REF_THETA)


@pytest.fixture(scope="session")
def ref_solves(ref_cfg):
    da, dga = solve_antisymmetric(ref_cfg, 64)
    ds, dgs = solve_symmetric(ref_cfg, 64)
    return da, ds, dga, dgs


@pytest.fixture(scope="session")
def ref_solves_fine(ref_cfg):
    da, _ = solve_antisymmetric(ref_cfg, 128)
    ds, _ = solve_symmetric(ref_cfg, 128)
    return da, ds


@pytest.fixture(scope="session")
def ref_bundles(ref_cfg, ref_solves):
    da, ds, _, _ = ref_solves
    return SpectralBundle(ref_cfg, da), SpectralBundle(ref_cfg, ds)
