"""Shared pytest configuration: the acceptance summary printed after the run."""

ACCEPTANCE = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
