import numpy as np
import pytest

from uhcs_warranty.bayes import NormalGammaPrior, SamplerConfig, fit
from uhcs_warranty.censoring import UhcsScheme, classify
from uhcs_warranty.fileio import load_boeing
from uhcs_warranty.warranty import WarrantyPolicy

_ACCEPTANCE_LINES = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def boeing_times():
    return load_boeing()


@pytest.fixture(scope="session")
def boeing_scheme():
    return UhcsScheme(n=30, l=7, r=20, T1=100, T2=120)


@pytest.fixture(scope="session")
def boeing_sample(boeing_times, boeing_scheme):
    return classify(boeing_times, boeing_scheme)


@pytest.fixture(scope="session")
def boeing_prior():
    return NormalGammaPrior(a1=36.9, b1=29.1, p2=3.3, q2_prior=287.9)


@pytest.fixture(scope="session")
def boeing_chain(boeing_sample, boeing_prior):
    return fit(boeing_sample, boeing_prior, SamplerConfig())


@pytest.fixture(scope="session")
def small_chain(boeing_sample, boeing_prior):
    return fit(boeing_sample, boeing_prior, SamplerConfig(N=4000, N0=1000, seed=7))


@pytest.fixture(scope="session")
def boeing_policy():
    return WarrantyPolicy(S=700, A2=200, M=1e6, q1_dissat=0.09, q2_dissat=0.04,
                          L=27.263, t_w=7.245, p_star=0.75, rebate_kind="linear", C=500)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
