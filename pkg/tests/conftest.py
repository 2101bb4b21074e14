"""Shared pytest plumbing: per-criterion PASS/FAIL lines for the acceptance suite."""

from __future__ import annotations

import pytest

CRITERIA = {
    1: "corner reduction within 4/n (2/n on special branches), U(3..64)",
    2: "generic-rotation difference has rank <= 2 and norm <= 2",
    3: "rank-norm inequality on 1000 random low-rank matrices",
    4: "reduction chains bounded by 4 and by d(u, 1) from below",
    5: "closed-form concentration bound equals the martingale bound",
    6: "Haar self-test: trace moments, U(1) uniformity, left invariance",
    7: "empirical tails below the concentration bound at n = 1024, 2048",
    8: "tails non-increasing across n = 256, 1024, 2048 at eps = 0.5",
    9: "tensor tower embedding is an isometry; iterated = one-shot",
    10: "orthogonal analogue of criteria 1 and 7",
    11: "identical configs give byte-identical reports",
}

_results: dict[int, list[tuple[str, bool]]] = {}
_notes: dict[int, list[str]] = {}


@pytest.fixture
def acceptance_note(request):
    """Attach an informational line to the current test's criterion."""
    marker = request.node.get_closest_marker("acceptance")

    def note(text: str) -> None:
        _notes.setdefault(marker.args[0], []).append(text)

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _results.setdefault(marker.args[0], []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title in CRITERIA.items():
        runs = _results.get(number)
        if runs is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(ok for _, ok in runs) else "FAIL"
        tr.write_line(f"{status:<7} criterion {number:>2}: {title}")
        for name, ok in runs or ():
            if not ok:
                tr.write_line(f"          failed: {name}")
        for text in _notes.get(number, ()):
            tr.write_line(f"          note: {text}")
