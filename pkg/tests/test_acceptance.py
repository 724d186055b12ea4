"""Acceptance criteria, one test and one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import pytest

from matconvex.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    r = run_criterion(number)
    print(f"\n[{'PASS' if r['passed'] else 'FAIL'}] criterion {number}: {r['name']} "
          f"({r['seconds']:.1f}s) {r['detail']}")
    assert r["passed"], r["detail"]
