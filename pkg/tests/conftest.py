from __future__ import annotations

import sys
from pathlib import Path

import pytest

from ssdiag.jointree import parse_jointree
from ssdiag.logic import Instantiation, parse_literals
from ssdiag.ssd import parse_observation, parse_ssd

DATA = Path(__file__).parent / "data"


def load_ssd(name):
    return parse_ssd((DATA / name).read_text())


def load_obs(name, ssd):
    return parse_observation((DATA / name).read_text(), ssd)


def lits(text, ssd_or_vars):
    """Instantiation from literal text, e.g. ``lits("A !B", ssd)``."""
    names = ssd_or_vars.by_name if hasattr(ssd_or_vars, "by_name") else {v.name: v for v in ssd_or_vars}
    return Instantiation(parse_literals(text, names))


@pytest.fixture
def inverter_and():
    return load_ssd("inverter_and.ssd")


@pytest.fixture
def three_gate():
    return load_ssd("three_gate.ssd")


@pytest.fixture
def three_gate_jt(three_gate):
    return parse_jointree((DATA / "three_gate.jt").read_text(), three_gate)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[n])
