import os

# keep BLAS pools from oversubscribing the small CI boxes this runs on
os.environ.setdefault("OMP_NUM_THREADS", "2")

ACCEPTANCE_LINES = []


def record_acceptance(number: int, passed: bool, detail: str):
    ACCEPTANCE_LINES.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {number:2d} {status}: {detail}")
