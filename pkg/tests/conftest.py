import pytest

from sdaas.network import SkywayNetwork, SkywayNode, SkywaySegment, gen_network
from sdaas.selection import Swarm
from sdaas.wind import WindCondition, WindDirection, synth_wind


@pytest.fixture(scope="session")
def london_sized():
    """2732-node generated network with seed-42 uniform wind."""
    net = gen_network(2732, 42)
    return net.with_wind(synth_wind(net, 42))


@pytest.fixture
def swarm():
    return Swarm.uniform()


def make_segment(length_m=1000.0, speed=9.35, direction=WindDirection.FRONT, seg_id=1):
    return SkywaySegment(seg_id, 1, 2, length_m, WindCondition(speed, direction))


def line_network(winds):
    """A chain of nodes with one segment per (speed, direction) pair, 500 m apart."""
    nodes = tuple(SkywayNode(i, 500.0 * i, 0.0) for i in range(1, len(winds) + 2))
    segs = tuple(
        SkywaySegment(i, i, i + 1, 500.0, WindCondition(s, d)) for i, (s, d) in enumerate(winds, start=1)
    )
    return SkywayNetwork(nodes, segs)


_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion exercised by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "failed": [], "tests": 0})
    entry["tests"] += 1
    if call.excinfo is not None:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number}: {status}  {entry['title']} ({entry['tests']} checks)"
        if entry["failed"]:
            line += "  failed: " + ", ".join(entry["failed"])
        terminalreporter.write_line(line)
