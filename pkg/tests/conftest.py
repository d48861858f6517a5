import pytest

from expfactor import fixtures as fx

# (criterion number, passed, detail) rows printed after the run
ACCEPTANCE = []


def record(number, passed, detail):
    row = (number, bool(passed), detail)
    ACCEPTANCE.append(row)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def shear_corpus():
    return fx.shear_corpus(count=100, seed=0, order=512)
