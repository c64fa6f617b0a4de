import pytest

from remest import validation


def test_suite_dp_all_pass():
    checks = validation.run_suite("dp")
    assert checks and all(c.passed for c in checks)


def test_suite_table_covers_all_cells():
    checks = validation.run_suite("tableI")
    assert len(checks) == 99
    assert all(c.passed for c in checks)


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        validation.run_suite("nope")
