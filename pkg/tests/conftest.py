from pathlib import Path

import pytest

from qfmine import model_path, parse_model

CORPUS = Path(__file__).parent / "corpus"


def load(name: str):
    return parse_model(Path(model_path(name)).read_text(), name)


@pytest.fixture(scope="session")
def vending10():
    return load("vending10")


@pytest.fixture(scope="session")
def vending15():
    return load("vending15")


@pytest.fixture(scope="session")
def elevator():
    return load("elevator5")


@pytest.fixture(scope="session")
def deadlock_model():
    return load("deadlock")


@pytest.fixture(scope="session")
def deadlock_fixed():
    return load("deadlock_fixed")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
