import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(mod.TITLES):
        if n not in mod.RESULTS:
            tr.write_line(f"NOT RUN criterion {n}: {mod.TITLES[n]}")
            continue
        ok, lines = mod.RESULTS[n]
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {mod.TITLES[n]}")
        for ln in lines:
            tr.write_line("    " + ln)
