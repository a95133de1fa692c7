import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

# fixed example streams so repeated runs see the same cases
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")

ORACLES = Path(__file__).with_name("oracles")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fd_archive():
    return json.loads((ORACLES / "curvature_fd.json").read_text())["records"]


def fd_records(archive, metric, dim=2):
    return [r for r in archive if r["metric"] == metric and r["dim"] == dim]


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), 1e-300))


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def emit(num: int, name: str, ok: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {num:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _ACCEPTANCE[num] = line
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[num])
