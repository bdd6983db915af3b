import numpy as np
import pytest

from chsh_seq.observables import Signature, random_dichotomic
from chsh_seq.sequential import QuantumState

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _ACCEPTANCE.append((marker.args[0], status, marker.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, status, title in sorted(_ACCEPTANCE, key=lambda r: int(r[0][2:])):
        terminalreporter.write_line(f"{cid:>5}  {status}  {title}")


def random_state(seed, dim) -> QuantumState:
    rng = np.random.default_rng(seed)
    return QuantumState.normalized(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_quadruple(seed, dim, signatures=None):
    sigs = signatures or [Signature.balanced(dim)] * 4
    names = ("A", "A'", "B", "B'")
    return tuple(random_dichotomic((seed, k), dim, sig, names[k]) for k, sig in enumerate(sigs))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
