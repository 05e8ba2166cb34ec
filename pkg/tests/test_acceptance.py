"""Full-size acceptance criteria, one test each, at their stated tolerances.

Each test prints its ``[PASS]`` / ``[FAIL]`` line (uncaptured) before asserting.
"""

import json

import pytest

from conecontract.acceptance import CRITERIA, closed_form_spot_check
from conecontract.reports import to_jsonable


def _report(capsys, result):
    with capsys.disabled():
        print("\n" + result.line())
    detail = json.dumps(to_jsonable(result.details), indent=1, sort_keys=True, default=str)
    assert result.passed, f"{result.line()}\n{detail[:4000]}"


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, capsys):
    _report(capsys, CRITERIA[number - 1](quick=False, seed=0))


def test_closed_form_spot_check(capsys):
    _report(capsys, closed_form_spot_check(quick=False, seed=0))
