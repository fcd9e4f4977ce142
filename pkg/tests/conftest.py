import pytest

from arp.problemfile import data_path
from arp.syntax import Signature, load_hierarchy_file, parse_term, sort_from_string


@pytest.fixture(scope="session")
def h():
    return load_hierarchy_file(data_path("parallelism.srt"))


@pytest.fixture(scope="session")
def sig(h):
    return Signature(h, variables={
        "R": sort_from_string(h, "Woman -> t"),
        "X": sort_from_string(h, "Male"),
        "Y": sort_from_string(h, "Human"),
    })


@pytest.fixture(scope="session")
def term(sig):
    return lambda text: parse_term(sig, text)


@pytest.fixture(scope="session")
def srt(h):
    return lambda text: sort_from_string(h, text)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
