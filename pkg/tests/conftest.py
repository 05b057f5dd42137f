import numpy as np
import pytest
from hypothesis import settings

from mearray import _kernels_py, kernels

# wall-clock deadlines only add flakiness on shared machines
settings.register_profile("default", deadline=None)
settings.load_profile("default")

BACKENDS = ["python"]
try:
    from mearray import _kernels_c

    BACKENDS.insert(0, "cython")
except ImportError:  # extension not built
    _kernels_c = None


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = _kernels_c if request.param == "cython" else _kernels_py
    for name in ("array_factor", "phasor_power", "sweep_linear"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def random_ball(rng, n, radius):
    """n points uniformly in a ball of the given radius."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1 / 3)
    return v * r


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


# acceptance criteria append (number, title, ok, detail) here
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}")
