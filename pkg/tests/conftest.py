import numpy as np
import pytest

from feedbackq import ModelParams


@pytest.fixture
def fig1_params():
    return ModelParams(1.0, 0.5, 0.3, 0.05)


@pytest.fixture
def table2_params():
    return ModelParams(0.4, 0.7, 0.2, 0.05, v=1.0, reward_scale=2.0)


def random_params(rng: np.random.Generator, alpha_lo: float = 0.01) -> ModelParams:
    return ModelParams(
        lam=float(rng.uniform(0.1, 3.0)),
        mu=float(rng.uniform(0.1, 3.0)),
        q=float(rng.uniform(0.05, 1.0)),
        alpha=float(rng.uniform(alpha_lo, 1.0)),
    )


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    report = getattr(module, "REPORT", None)
    if report:
        terminalreporter.section("acceptance criteria")
        for number in sorted(report):
            terminalreporter.write_line(report[number])
