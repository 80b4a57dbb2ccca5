"""Timing model and statistics for trace-driven runs.

The core is in-order and blocking with a base CPI of 1.  Demand accesses
stall the core; copy-backs, write-backs and fills into L2 do not, but they
hold the single L2 port for the (long) STT-MRAM write latency, so a later
demand read may have to wait for it.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .hierarchy import AccessKind, Hierarchy, HierarchyConfig, Level
from .prefetch import StridePrefetcher
from .trace import AccessRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatencyConfig:
    l1_hit_cycles: int = 1
    l2_read_cycles: int = 10
    l2_write_cycles: int = 40
    mem_cycles: int = 100

    def __post_init__(self):
        for name in ("l1_hit_cycles", "l2_read_cycles", "l2_write_cycles", "mem_cycles"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class SimConfig:
    hierarchy: HierarchyConfig = field(default_factory=HierarchyConfig)
    latency: LatencyConfig = field(default_factory=LatencyConfig)
    prefetcher: str = "stride"
    prefetch_table_entries: int = 64
    prefetch_confidence_threshold: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.prefetcher not in ("none", "stride"):
            raise ValueError(f"prefetcher must be none or stride, got {self.prefetcher!r}")

    @property
    def block_bytes(self) -> int:
        return self.hierarchy.block_bytes


class L2Port:
    """Single STT-MRAM port; operations serialize on ``busy_until``."""

    def __init__(self):
        self.busy_until = 0

    def occupy(self, now: int, cycles: int) -> int:
        """Start an operation at or after ``now``; return its start cycle."""
        start = now if now > self.busy_until else self.busy_until
        self.busy_until = start + cycles
        return start


@dataclass
class SimReport:
    l1i_hits: int = 0
    l1i_misses: int = 0
    l1d_hits: int = 0
    l1d_misses: int = 0
    l2_hits: int = 0
    l2_misses: int = 0
    copyback_count_l1i: int = 0
    copyback_count_l1d: int = 0
    clean_evictions_l1i: int = 0
    dirty_evictions_l1i: int = 0
    clean_evictions_l1d: int = 0
    dirty_evictions_l1d: int = 0
    l2_writebacks_to_memory: int = 0
    l2_fills: int = 0
    prefetches_issued: int = 0
    prefetches_useful: int = 0
    total_accesses: int = 0
    total_instructions: int = 0
    total_cycles: int = 0
    l2_port_stall_cycles: int = 0
    ipc_undefined: bool = False
    rd_hist_l1d: list = field(default_factory=lambda: [0] * 16)

    @staticmethod
    def _rate(misses, hits):
        n = hits + misses
        return misses / n if n else 0.0

    @property
    def l1i_miss_rate(self) -> float:
        return self._rate(self.l1i_misses, self.l1i_hits)

    @property
    def l1d_miss_rate(self) -> float:
        return self._rate(self.l1d_misses, self.l1d_hits)

    @property
    def l2_miss_rate(self) -> float:
        return self._rate(self.l2_misses, self.l2_hits)

    @property
    def ipc_proxy(self) -> float:
        return self.total_instructions / self.total_cycles if self.total_cycles else 0.0

    def rows(self) -> list[tuple[str, object]]:
        out = []
        for c in ("l1i", "l1d", "l2"):
            out += [
                (f"{c}_hits", getattr(self, f"{c}_hits")),
                (f"{c}_misses", getattr(self, f"{c}_misses")),
                (f"{c}_miss_rate", getattr(self, f"{c}_miss_rate")),
            ]
        out += [
            ("copyback_count_l1i", self.copyback_count_l1i),
            ("copyback_count_l1d", self.copyback_count_l1d),
            ("clean_evictions_l1i", self.clean_evictions_l1i),
            ("dirty_evictions_l1i", self.dirty_evictions_l1i),
            ("clean_evictions_l1d", self.clean_evictions_l1d),
            ("dirty_evictions_l1d", self.dirty_evictions_l1d),
            ("l2_writebacks_to_memory", self.l2_writebacks_to_memory),
            ("l2_fills", self.l2_fills),
            ("prefetches_issued", self.prefetches_issued),
            ("prefetches_useful", self.prefetches_useful),
            ("total_accesses", self.total_accesses),
            ("total_instructions", self.total_instructions),
            ("total_cycles", self.total_cycles),
            ("ipc_proxy", self.ipc_proxy),
            ("ipc_undefined", int(self.ipc_undefined)),
            ("l2_port_stall_cycles", self.l2_port_stall_cycles),
        ]
        out += [(f"rd_hist_l1d_{i}", n) for i, n in enumerate(self.rd_hist_l1d)]
        return out

    def as_dict(self) -> dict:
        return dict(self.rows())


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return f"{v:.6f}"


def report_csv(report: SimReport) -> str:
    buf = io.StringIO()
    buf.write("metric,value\n")
    for name, v in report.rows():
        buf.write(f"{name},{format_value(v)}\n")
    return buf.getvalue()


class Simulator:
    """Drives a :class:`Hierarchy` one trace record at a time.

    ``position`` is the index of the record being processed, which lets
    offline policies (see :mod:`cbpsim.oracle`) look up future accesses.
    """

    def __init__(self, config: SimConfig, clean_filter=None, check: bool = False):
        self.config = config
        self.hierarchy = Hierarchy(config.hierarchy, clean_filter=clean_filter, check=check)
        self.latency = config.latency
        self.port = L2Port()
        self.prefetcher = None
        if config.prefetcher == "stride":
            self.prefetcher = StridePrefetcher(
                config.prefetch_table_entries,
                config.prefetch_confidence_threshold,
                config.block_bytes,
            )
        self.cycles = 0
        self.instructions = 0
        self.accesses = 0
        self.port_stall = 0
        self.position = -1

    def step(self, rec: AccessRecord):
        lat = self.latency
        self.position += 1
        self.accesses += 1
        self.instructions += rec.icount_delta
        now = self.cycles + rec.icount_delta
        res = self.hierarchy.access(rec.kind, rec.addr)
        issue = now + lat.l1_hit_cycles
        if res.level is Level.L1:
            stall = lat.l1_hit_cycles
        elif res.level is Level.L2:
            start = self.port.occupy(issue, lat.l2_read_cycles)
            wait = start - issue
            self.port_stall += wait
            stall = lat.l1_hit_cycles + wait + lat.l2_read_cycles
        else:
            stall = lat.l1_hit_cycles + lat.l2_read_cycles + lat.mem_cycles
        for _ in range(res.l2_writes):
            self.port.occupy(issue, lat.l2_write_cycles)
        self.cycles = now + stall
        if self.prefetcher is not None and rec.kind is not AccessKind.INSTR:
            target = self.prefetcher.observe(rec.addr)
            if target is not None:
                pf = self.hierarchy.prefetch(target)
                if pf is not None:
                    for _ in range(pf.l2_reads):
                        self.port.occupy(self.cycles, lat.l2_read_cycles)
                    for _ in range(pf.l2_writes):
                        self.port.occupy(self.cycles, lat.l2_write_cycles)
        return res

    def report(self) -> SimReport:
        h = self.hierarchy
        st = h.stats
        rep = SimReport(
            l1i_hits=h.l1i.hits,
            l1i_misses=h.l1i.misses,
            l1d_hits=h.l1d.hits,
            l1d_misses=h.l1d.misses,
            l2_hits=h.l2.hits,
            l2_misses=h.l2.misses,
            copyback_count_l1i=st.copybacks["l1i"],
            copyback_count_l1d=st.copybacks["l1d"],
            clean_evictions_l1i=st.clean_evictions["l1i"],
            dirty_evictions_l1i=st.dirty_evictions["l1i"],
            clean_evictions_l1d=st.clean_evictions["l1d"],
            dirty_evictions_l1d=st.dirty_evictions["l1d"],
            l2_writebacks_to_memory=st.l2_writebacks,
            l2_fills=st.l2_fills,
            prefetches_issued=st.prefetches_issued,
            prefetches_useful=st.prefetches_useful,
            total_accesses=self.accesses,
            total_instructions=self.instructions,
            total_cycles=self.cycles,
            l2_port_stall_cycles=self.port_stall,
            rd_hist_l1d=list(h.l1d.rd_hist),
        )
        if self.cycles == 0:
            rep.ipc_undefined = True
            log.warning("no cycles simulated; ipc_proxy reported as 0")
        return rep


def run(trace: Iterable[AccessRecord], config: SimConfig, check: bool = False) -> SimReport:
    sim = Simulator(config, check=check)
    step = sim.step
    for rec in trace:
        step(rec)
    return sim.report()


# -- comparisons -------------------------------------------------------------


def _pct_reduction(base: float, value: float) -> float:
    return (base - value) / base * 100.0 if base else 0.0


@dataclass
class Comparison:
    names: list
    reports: list

    def derived(self, i: int) -> list[tuple[str, float]]:
        base, rep = self.reports[0], self.reports[i]
        return [
            ("ipc_normalized", rep.ipc_proxy / base.ipc_proxy if base.ipc_proxy else 0.0),
            ("l1d_miss_rate_reduction_pct", _pct_reduction(base.l1d_miss_rate, rep.l1d_miss_rate)),
            ("l2_miss_rate_reduction_pct", _pct_reduction(base.l2_miss_rate, rep.l2_miss_rate)),
            ("copyback_reduction_l1d_pct", _pct_reduction(base.copyback_count_l1d, rep.copyback_count_l1d)),
        ]

    def table(self) -> list[tuple[str, list]]:
        per = [r.rows() + self.derived(i) for i, r in enumerate(self.reports)]
        return [(name, [cols[k][1] for cols in per]) for k, (name, _) in enumerate(per[0])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("metric," + ",".join(self.names) + "\n")
        for name, values in self.table():
            buf.write(name + "," + ",".join(format_value(v) for v in values) + "\n")
        return buf.getvalue()


def compare(trace: Sequence[AccessRecord], configs: Sequence[tuple[str, SimConfig]]) -> Comparison:
    """Run every named config on the same trace; the first one is the baseline."""
    if len(configs) < 2:
        raise ValueError("compare needs at least two configs")
    sizes = {cfg.block_bytes for _, cfg in configs}
    if len(sizes) != 1:
        raise ValueError(f"configs disagree on block size: {sorted(sizes)}")
    trace = list(trace)
    reports = [run(trace, cfg) for _, cfg in configs]
    return Comparison([name for name, _ in configs], reports)


def reconcile(report: SimReport) -> Optional[str]:
    """Return a description of the first broken accounting identity, if any."""
    l1_misses = report.l1i_misses + report.l1d_misses
    if report.l2_hits + report.l2_misses != l1_misses:
        return f"L1 misses {l1_misses} != L2 hits + misses {report.l2_hits + report.l2_misses}"
    if report.total_cycles < report.total_instructions:
        return "fewer cycles than instructions"
    return None
