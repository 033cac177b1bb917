import pytest

#: (criterion number, description, passed, detail) recorded by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{num:2d}] {name}: {detail}")


@pytest.fixture
def report():
    def _report(num, name, ok, detail=""):
        ACCEPTANCE.append((num, name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} [{num:2d}] {name}: {detail}")
    return _report
