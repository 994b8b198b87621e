"""The seven acceptance criteria, one test each.

Each test prints a single ``[PASS]`` or ``[FAIL]`` line (shown even when
pytest captures output) and then asserts the outcome.
"""

import pytest

from hytw import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    res = acceptance.CRITERIA[number]()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
