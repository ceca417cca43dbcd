from pathlib import Path

import pytest

from pbiharm.core import parse_spec

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


@pytest.fixture
def config_dir():
    return CONFIGS


@pytest.fixture
def ex36_spec():
    return parse_spec((CONFIGS / "example36.ini").read_text())


def spec_text(N=3, p=2.0, nl="kind = example36", gamma=2.0, delta=8.0, h=2.0,
              domain="shape = ball\nradius = 1", extra_cert=""):
    return (f"[problem]\nN = {N}\np = {p}\n\n[domain]\n{domain}\n\n"
            f"[nonlinearity]\n{nl}\n\n[certificate]\ngamma = {gamma}\ndelta = {delta}\n"
            f"h = {h}\n{extra_cert}\n")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
