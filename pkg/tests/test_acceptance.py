"""Acceptance gate: every operational criterion at its stated tolerance.

Each criterion prints one pass/fail line; the suite must be fully green.
Criteria are deterministic for the pinned base seed.
"""

import pytest

from bosegas.acceptance import CHECKS, run_acceptance


@pytest.mark.parametrize("cid", sorted(CHECKS))
def test_criterion(cid):
    result = CHECKS[cid]()
    print(result.line())
    assert result.passed, result.line()


def test_runner_collects_all():
    results = run_acceptance(criteria=[1, 5, 12], verbose=False)
    assert [r.cid for r in results] == [1, 5, 12]
    assert all(r.passed for r in results)
