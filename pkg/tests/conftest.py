"""Shared fixtures: a controllable clock and fast low-difficulty services."""

import pytest

from medalchain.canon import sha256_hex
from medalchain.chain import Ledger
from medalchain.registry import BadgeRegistry

TEST_DIFFICULTY = 2


class FakeClock:
    def __init__(self, start: int = 1_000_000):
        self.t = start

    def __call__(self) -> int:
        return self.t

    def tick(self, dt: int = 1) -> int:
        self.t += dt
        return self.t


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def ledger(clock):
    return Ledger(difficulty=TEST_DIFFICULTY, clock=clock)


@pytest.fixture
def registry(ledger):
    return BadgeRegistry(ledger)


@pytest.fixture
def definition(registry):
    return registry.register_definition(
        name="Rust Artisan",
        icon=sha256_hex(b"rust-artisan.png"),
        description="Awarded for sustained systems-programming craft.",
        criteria="Complete the systems track and pass the capstone review.",
        grade_levels=["bronze", "silver", "gold"],
        issuer="forge-academy",
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance suite's verdict lines after the captured output,
    so `pytest -v` shows one PASS/FAIL line per release criterion."""
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
