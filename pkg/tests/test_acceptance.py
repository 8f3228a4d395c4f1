"""The twelve acceptance criteria at full budget and stated tolerances.

Each test runs one criterion through :func:`fsorelay.validation.run_validation`
(which also enforces the runtime budgets) and files a PASS/FAIL line that is
printed in the terminal summary.  Deselect with ``-m "not acceptance"``.
"""

import pytest

from fsorelay.validation import ValidationSettings, run_validation

pytestmark = pytest.mark.acceptance

SETTINGS = ValidationSettings()


@pytest.mark.parametrize("number", range(1, 13))
def test_criterion(number, acceptance_record):
    (result,) = run_validation(SETTINGS, only=[number])
    acceptance_record(result)
    print(result.line())
    assert result.passed, result.detail
