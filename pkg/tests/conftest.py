"""Shared fixtures; kernels and heavy states are session-scoped."""

import numpy as np
import pytest

from kerrcat import (BathSpec, CouplingSpec, ModeLayout, PipelineConfig,
                     SpectralDensity, build_kernel)
from kerrcat.fock import default_cat_dim


@pytest.fixture(scope="session")
def hot_bath():
    return BathSpec(0.45, SpectralDensity(j0=0.1, s=1.0, lambda_cut=1.0), "hot")


@pytest.fixture(scope="session")
def cold_bath():
    return BathSpec(0.9, SpectralDensity(j0=0.1, s=1.0, lambda_cut=2.0), "cold")


@pytest.fixture(scope="session")
def kernels_100(hot_bath, cold_bath):
    return {"hot": build_kernel(hot_bath, 100.0),
            "cold": build_kernel(cold_bath, 100.0)}


@pytest.fixture(scope="session")
def default_layout():
    return ModeLayout((("a", default_cat_dim(1.0)), ("b", 2), ("c", 2)))


@pytest.fixture(scope="session")
def even_cat_config():
    return PipelineConfig(alpha=1.0, theta=np.pi, detector="D1")


@pytest.fixture(scope="session")
def default_couplings():
    return CouplingSpec.default()
