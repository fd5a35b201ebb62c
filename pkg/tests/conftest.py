import pytest

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the summary table."""
    record = {}

    def note(number, detail):
        record["number"] = number
        record["detail"] = detail

    yield note
    if "number" in record:
        failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
        ACCEPTANCE[record["number"]] = (not failed, record["detail"])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
