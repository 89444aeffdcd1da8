import warnings

import pytest

from qrabi.chain import converged_spectrum
from qrabi.fock import ModelParams


@pytest.fixture(scope="session")
def dsc_params():
    return ModelParams.from_ratios(2.0, 0.25)


@pytest.fixture(scope="session")
def usc_params():
    return ModelParams.from_ratios(0.7, 0.25)


@pytest.fixture(scope="session")
def dsc_plus(dsc_params):
    return converged_spectrum(dsc_params, "+", 80)


@pytest.fixture(scope="session")
def usc_plus(usc_params):
    return converged_spectrum(usc_params, "+", 40)


@pytest.fixture
def no_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        yield
