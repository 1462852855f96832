"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or as a script.
The lines are also repeated in the pytest terminal summary.
"""

import sys

import pytest

from kuga_satake import acceptance
from kuga_satake.config import RunConfig

RESULTS: list = []


@pytest.mark.slow
@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion):
    result = criterion(RunConfig())
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.failures[:10]


if __name__ == "__main__":
    results = acceptance.run_all(RunConfig())
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
