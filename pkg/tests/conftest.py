import pytest

from nadnn.localfield import Characteristic, FieldConfig

POS = Characteristic.POSITIVE
ZERO = Characteristic.ZERO

SMALL_FIELDS = [FieldConfig(p, c) for p in (2, 3) for c in (POS, ZERO)]


@pytest.fixture(params=SMALL_FIELDS, ids=lambda c: f"p{c.p}-{c.char.value}")
def cfg(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, format_result
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(format_result(number))
