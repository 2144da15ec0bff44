import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from molnull.corpus import CorpusSpec, generate_corpus  # noqa: E402
from molnull.ir import parse_files  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "molnull" / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def load_fixture(name: str):
    return parse_files([fixture_path(name)])


@pytest.fixture(scope="session")
def default_corpus():
    spec = CorpusSpec(method_count=2000, seed=42)
    program, truth = generate_corpus(spec)
    return spec, program, truth


@pytest.fixture(scope="session")
def loop_free_corpus():
    spec = CorpusSpec(method_count=250, seed=7, loop_density=0.0)
    program, truth = generate_corpus(spec)
    return spec, program, truth


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
