import math

import numpy as np
import pytest


def maclaurin_erf(x, terms=50):
    """erf from its Maclaurin series; independent of any library erf."""
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * x ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1))
    return 2.0 / math.sqrt(math.pi) * total


def mc_fraction(sample, test, samples, seed, chunk=1 << 20):
    """Rejection-sampling oracle: fraction of ``sample(rng, m)`` rows passing ``test``."""
    rng = np.random.default_rng(seed)
    hits = 0
    left = samples
    while left:
        m = min(chunk, left)
        hits += int(np.count_nonzero(test(sample(rng, m))))
        left -= m
    p = hits / samples
    return p, math.sqrt(p * (1 - p) / samples)


@pytest.fixture
def mc():
    return mc_fraction


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line per acceptance criterion, then assert."""
    def report(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
