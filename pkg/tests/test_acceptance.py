"""The eleven acceptance criteria at their stated tolerances, one line each."""

import pytest

from thurston_lab.acceptance import CRITERIA, run_criterion

RESULTS = []


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = run_criterion(number, bits=128, depth=14, seed=7)
    RESULTS.append(res)
    print(res.line())
    assert res.passed, res.line()
