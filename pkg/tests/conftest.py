from hypothesis import settings

# First use of a Karatsuba width compiles a specialized kernel, which can take
# far longer than one example.
settings.register_profile("apfp", deadline=None)
settings.load_profile("apfp")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
