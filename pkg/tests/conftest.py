import re

import pytest

# criterion number -> list of (passed, detail)
_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion; call with a detail string."""
    num = int(re.search(r"criterion_(\d+)", request.node.name).group(1))
    details = []
    yield details.append
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    _CRITERIA.setdefault(num, []).append((ok, "; ".join(details)))


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    if rep.when == "call":
        item.rep_call = rep
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        results = _CRITERIA[num]
        ok = all(r[0] for r in results)
        detail = " | ".join(r[1] for r in results if r[1])
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
