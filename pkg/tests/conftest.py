"""Shared pytest hooks: one printed pass/fail line per acceptance criterion."""

import re
import sys

CRITERIA = {
    "01": "oracle rank equivalence at 20 points per corpus entry",
    "02": "frame product symmetry on every leaf, fault injection detected",
    "03": "distinct pencil eigenvalues and diagonal transformed frames",
    "04": "focal determinant equals the product of recovered linear forms",
    "05": "cylinders classified with generator and director recovery",
    "06": "cones classified with vertex recovery, duality pairs swap",
    "07": "counterexample entry: rank, failure reason, leaf focal geometry",
    "08": "repeated-eigenvalue entries never classified cylinder or cone",
    "09": "byte-identical reports and exact JSON round trips",
    "10": "verdict and eigenvalue invariance under affine and congruence maps",
}

_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    match = re.search(r"test_criterion_(\d\d)", report.nodeid)
    if match:
        _results[match.group(1)] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    notes = getattr(mod, "NOTES", {}) if mod else {}
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        if num not in _results:
            continue
        status = "PASS" if _results[num] == "passed" else "FAIL"
        line = f"criterion {num} [{status}] {CRITERIA[num]}"
        if notes.get(num):
            line += f" -- {notes[num]}"
        terminalreporter.write_line(line)
