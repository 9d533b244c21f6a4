import numpy as np
import pytest

from fiberwave.guide_geometry import Helix, sample_track

CONE_ANGLE = np.pi / 3


@pytest.fixture(scope="session")
def cone_path():
    """One turn of the helix whose tangent sweeps a cone of half-angle pi/3."""
    return Helix.from_cone_angle(CONE_ANGLE, turns=1.0)


@pytest.fixture(scope="session")
def cone_track(cone_path):
    return sample_track(cone_path, steps=10_000, frame="path")


def loglog_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# One summary line per acceptance criterion, aggregated over the tests marked
# ``@pytest.mark.acceptance(n, "description")``.
_criteria = {}
_criterion_of = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            number, text = marker.args
            _criteria.setdefault(number, {"text": text, "failed": [], "ran": 0})
            _criterion_of[item.nodeid] = number


def pytest_runtest_logreport(report):
    number = _criterion_of.get(report.nodeid)
    if number is None:
        return
    entry = _criteria[number]
    if report.when == "call":
        entry["ran"] += 1
    if report.failed:
        entry["failed"].append(report.nodeid.split("::", 1)[-1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        if entry["ran"] == 0 and not entry["failed"]:
            verdict = "SKIP"
        else:
            verdict = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number}: {verdict}  {entry['text']}"
        if entry["failed"]:
            line += f"  [failed: {', '.join(entry['failed'])}]"
        terminalreporter.write_line(line)
