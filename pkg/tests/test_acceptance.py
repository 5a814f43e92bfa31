"""Acceptance criteria 1-9 at their stated tolerances.

Each criterion is one test; the one-line PASS/FAIL summaries are also
printed together at the end of the session (see conftest.py).
"""
import pytest

from metaline import acceptance

RESULTS = []


@pytest.mark.slow
@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion):
    result = criterion()
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.line()
