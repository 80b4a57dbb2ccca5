import pytest

from cbpsim.core import CacheGeometry
from cbpsim.engine import LatencyConfig, SimConfig
from cbpsim.hierarchy import HierarchyConfig


def tiny_hierarchy(l1_sets=1, l1_ways=2, l2_sets=1, l2_ways=4, **kw):
    kw.setdefault("l1d_policy", "lru")
    kw.setdefault("copyback", "all")
    return HierarchyConfig(
        l1i=CacheGeometry(l1_sets * l1_ways * 64, l1_ways),
        l1d=CacheGeometry(l1_sets * l1_ways * 64, l1_ways),
        l2=CacheGeometry(l2_sets * l2_ways * 64, l2_ways),
        **kw,
    )


def sim_config(hierarchy=None, prefetcher="none", **lat):
    return SimConfig(
        hierarchy=hierarchy if hierarchy is not None else HierarchyConfig(l1d_policy="lru", copyback="all"),
        latency=LatencyConfig(**lat),
        prefetcher=prefetcher,
    )


@pytest.fixture
def table1():
    """Default geometry with LRU + copy back everything, no prefetcher."""
    return sim_config()


# -- acceptance summary ---------------------------------------------------------

_CRITERIA = {}


def record_criterion(number, title, ok, detail, seconds):
    _CRITERIA[number] = (title, ok, detail, seconds)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, detail, seconds = _CRITERIA[n]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {n}: {title} ({detail}; {seconds:.1f}s)")
