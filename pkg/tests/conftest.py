import pytest

# criterion -> list of (clause, ok, detail)
_ACCEPTANCE: dict[int, list] = {}


@pytest.fixture
def record():
    def _record(criterion: int, clause: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.setdefault(criterion, []).append((clause, bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        clauses = _ACCEPTANCE[n]
        ok = all(c[1] for c in clauses)
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}")
        for clause, c_ok, detail in clauses:
            tr.write_line(f"    [{'pass' if c_ok else 'FAIL'}] {clause}: {detail}")
