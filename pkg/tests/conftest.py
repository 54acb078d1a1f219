"""Shared fixtures: small model systems and cached heavy spectra."""

import numpy as np
import pytest

from floqmag import (ModelSpec, build_system, diagonalize, floquet_operator,
                     magnus_series)


@pytest.fixture(scope="session")
def driven_spec():
    return ModelSpec.driven_ho(1.0, 1.0)


@pytest.fixture(scope="session")
def anharmonic_spec():
    return ModelSpec.anharmonic_osc(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def parametric_spec():
    return ModelSpec.parametric_ho(1.0, 0.1)


@pytest.fixture(scope="session")
def driven16(driven_spec):
    return build_system(driven_spec, 16)


@pytest.fixture(scope="session")
def driven64(driven_spec):
    return build_system(driven_spec, 64)


@pytest.fixture(scope="session")
def aho64(anharmonic_spec):
    return build_system(anharmonic_spec, 64)


@pytest.fixture(scope="session")
def aho_spectrum_512(anharmonic_spec):
    """Period-one spectrum of the quartic model at cutoff 512."""
    return diagonalize(floquet_operator(build_system(anharmonic_spec, 512),
                                        1.0))


@pytest.fixture(scope="session")
def driven16_series_n10(driven16):
    return magnus_series(driven16, 10)


def ground_state(dim):
    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = 1.0
    return psi
