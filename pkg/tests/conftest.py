# Keeps this directory importable so tests can share the oracle helpers.

# Release criteria verdicts, filled in by test_acceptance and echoed at the
# end of the run so the gate is visible without digging through the log.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for name, verdict in ACCEPTANCE.items():
            terminalreporter.write_line(f"{name}: {verdict}")
