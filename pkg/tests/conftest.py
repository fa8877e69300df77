"""Shared test infrastructure: acceptance criterion reporting."""

_ACCEPTANCE_LINES = []


def record_criterion(name: str, passed: bool, detail: str = ""):
    """Collect one acceptance-criterion outcome for the terminal summary."""
    status = "PASS" if passed else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    _ACCEPTANCE_LINES.append(f"{status}  {name}{suffix}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
