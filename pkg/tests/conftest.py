from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

#: (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {crit:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
