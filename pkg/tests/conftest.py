import time
from contextlib import contextmanager

ACCEPTANCE_LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str, limit_s: float):
    """Time a criterion block and record one PASS/FAIL line for the summary."""
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  criterion {number:>2}: {title} ({type(exc).__name__})")
        raise
    elapsed = time.perf_counter() - t0
    status = "PASS" if elapsed < limit_s else "FAIL"
    ACCEPTANCE_LINES.append(f"{status}  criterion {number:>2}: {title} [{elapsed:.2f}s / {limit_s:g}s]")
    assert elapsed < limit_s, f"took {elapsed:.2f}s, limit {limit_s}s"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
