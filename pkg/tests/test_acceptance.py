"""One pass/fail line per acceptance criterion; tolerances live in oscchain.acceptance."""
import pytest

from oscchain import acceptance

CASES = [pytest.param(fn, id=f"criterion_{i + 1:02d}") for i, fn in enumerate(acceptance.CRITERIA)]


@pytest.mark.parametrize("criterion", CASES)
def test_criterion(criterion, capsys):
    res = criterion()
    with capsys.disabled():
        print()
        print(res.line())
        for line in res.detail_lines():
            print(line)
    assert res.passed, "\n".join([res.line(), *res.detail_lines()])
