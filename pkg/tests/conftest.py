from contextlib import contextmanager

import numpy as np
import pytest

from leakage_control.baths import DiscreteThermalBath, beta_from_temperature, thermal_kernel
from leakage_control.scenario import FIG1_OMEGA, FIG1_OMEGA_D, fig1_scenario


@pytest.fixture(scope="session")
def fig1_kernel():
    bath = DiscreteThermalBath.from_spectrum(1000, FIG1_OMEGA_D, beta_from_temperature(300))
    return thermal_kernel(bath)


@pytest.fixture(scope="session")
def fig1_base():
    return fig1_scenario()


@pytest.fixture
def superposition12():
    phi = np.zeros(12, dtype=complex)
    phi[:2] = 1 / np.sqrt(2)
    return phi


@pytest.fixture(scope="session")
def omega_fig1():
    return FIG1_OMEGA


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the end-of-run summary."""
    results = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    @contextmanager
    def record(number, title):
        notes = []
        try:
            yield notes
        except BaseException:
            results[number] = ("FAIL", title, "; ".join(notes))
            raise
        results[number] = ("PASS", title, "; ".join(notes))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, notes = results[number]
        line = f"[{status}] #{number:<2d} {title}"
        terminalreporter.write_line(line + (f"  ({notes})" if notes else ""))
