def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    lines = [v for k, v in sorted((k, v) for k, v in test_acceptance.RESULTS.items() if isinstance(k, int))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
