"""Shared pytest hooks: verdict lines for the acceptance criteria."""

import re


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call":
                continue
            name = rep.location[2]
            m = re.search(r"test_criterion_(\d+)_(\w+)", name)
            if m:
                verdicts.append((int(m.group(1)), m.group(2), outcome == "passed"))
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num, slug, ok in sorted(verdicts):
        label = slug.replace("_", " ")
        terminalreporter.write_line(
            f"criterion {num} ({label}): {'PASS' if ok else 'FAIL'}"
        )
