"""Acceptance gate: one test per criterion, each checked at its tolerance and runtime budget.

Run with ``pytest tests/test_acceptance.py -s`` to see the pass/fail table.
"""

import pytest

from kpos import acceptance


@pytest.mark.parametrize("number, name, budget, fn", acceptance.CRITERIA,
                         ids=[f"{num:02d}-{name.replace(' ', '_')}"
                              for num, name, _, _ in acceptance.CRITERIA])
def test_criterion(number, name, budget, fn):
    res = acceptance._timed(number, name, budget, fn)
    print(res.line())
    assert res.passed, res.detail
    assert res.seconds <= budget, f"{res.seconds:.1f}s exceeds the {budget}s budget"
