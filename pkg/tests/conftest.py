from fractions import Fraction

import numpy as np
import pytest

from bbm_wavekit.spectral_core import TorusSpec, SpectralField
from bbm_wavekit.stochastic_data import inverse_bracket, sample_initial_datum


@pytest.fixture(scope="session")
def spec8():
    return TorusSpec(Fraction(2), 8)


@pytest.fixture(scope="session")
def spec16():
    return TorusSpec(Fraction(2), 16)


@pytest.fixture(scope="session")
def cert8(spec8):
    from bbm_wavekit.tree_calculus.resonance import certify_window
    return certify_window(spec8)


def random_field(spec, seed):
    rng = np.random.default_rng(seed)
    return SpectralField(spec, rng.normal(size=spec.K) + 1j * rng.normal(size=spec.K))


@pytest.fixture
def datum16(spec16):
    return sample_initial_datum(spec16, inverse_bracket(), 0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
