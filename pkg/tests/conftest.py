import numpy as np
import pytest
from hypothesis import settings, strategies as st

from wscec.selftest import random_spd, random_symmetric

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@st.composite
def spd_matrices(draw, n=None, log10_range=(-1.0, 1.0)):
    """SPD matrices with log-uniform spectrum, seeded through hypothesis."""
    n = draw(st.integers(2, 4)) if n is None else n
    seed = draw(st.integers(0, 2**32 - 1))
    return random_spd(np.random.default_rng(seed), n, log10_range)


@st.composite
def symmetric_matrices(draw, n):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_symmetric(np.random.default_rng(seed), n)


# --- acceptance summary -----------------------------------------------------

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        notes = [v for k, v in item.user_properties if k == "note"]
        _ACCEPTANCE.append((status, marker.args[0] if marker.args else item.name, notes))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, notes in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}")
        for n in notes:
            terminalreporter.write_line(f"      {n}")
