from pathlib import Path

import pytest

from paxp.formats import load_model

MODELS = Path(__file__).resolve().parent.parent / "docs" / "models"

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def models_dir() -> Path:
    return MODELS


@pytest.fixture(scope="session")
def dt_re():
    return load_model(MODELS / "dt_re.json")


@pytest.fixture(scope="session")
def nbc_re():
    return load_model(MODELS / "nbc_re.json")


@pytest.fixture(scope="session")
def knapsack_nbc():
    return load_model(MODELS / "knapsack_nbc.json")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
