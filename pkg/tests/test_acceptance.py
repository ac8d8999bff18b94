"""Acceptance criteria at their stated tolerances, one printed line each.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or as a script.
"""

import sys

import pytest

from gaugeelastic.checks import ACCEPTANCE


@pytest.mark.parametrize("label,check", ACCEPTANCE, ids=[lab for lab, _ in ACCEPTANCE])
def test_criterion(label, check, capsys):
    res = check()
    with capsys.disabled():
        print(f"\n{label}: {res.line()}")
    assert res.passed, res.line()


if __name__ == "__main__":
    failed = 0
    for label, check in ACCEPTANCE:
        res = check()
        failed += not res.passed
        print(f"{label}: {res.line()}", flush=True)
    print(f"{len(ACCEPTANCE) - failed}/{len(ACCEPTANCE)} criteria met")
    sys.exit(1 if failed else 0)
