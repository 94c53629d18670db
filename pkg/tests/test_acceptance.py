"""Release gate: every shipped criterion must pass within its budget.

Each criterion is one parametrized test so the -v listing shows a
pass/fail line per criterion; the detail line is printed as well so a
captured log carries the measured numbers.
"""

import pytest

from boxspin.acceptance import CRITERIA, run_criterion

_IDS = [f"{cid:02d}-{title.replace(' ', '-')}" for cid, title, _, _ in CRITERIA]


@pytest.mark.parametrize("cid", [c[0] for c in CRITERIA], ids=_IDS)
def test_criterion(cid):
    result = run_criterion(cid)
    status = "PASS" if result.passed else "FAIL"
    print(f"{status} criterion {result.cid:2d} [{result.seconds:7.2f} s] "
          f"{result.title}: {result.detail}")
    assert result.passed, f"criterion {result.cid} ({result.title}): {result.detail}"
