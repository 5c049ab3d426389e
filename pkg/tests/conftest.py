from pathlib import Path

import pytest

from grammarinfer.grammar import load_grammar

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "grammarinfer" / "fixtures"
PAIR_SEEDS = ["while n == (n+n) do L = n", "L = ((n+n)+n) ; skip"]


def read_seed_dir(path):
    return [p.read_text() for p in sorted(Path(path).iterdir())]


@pytest.fixture(scope="session")
def while_grammar():
    return load_grammar(FIXTURES / "while.g")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
