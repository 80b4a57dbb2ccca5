"""Offline analyses that see the whole trace.

* miss-based reuse distance: the number of misses, anywhere in the analysed
  cache, between two consecutive accesses to a block;
* the dead/reused breakdown built on it;
* a copy-back policy that knows each block's next use.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .engine import SimConfig, SimReport, Simulator
from .hierarchy import AccessKind, Cache, CopybackPolicy
from .policy import PolicyKind
from .trace import AccessRecord

DEFAULT_DEAD_THRESHOLD = 1000
DEFAULT_HORIZON = 1000


class ReuseRecord(NamedTuple):
    block: int
    distance: Optional[int]  # None on the terminal visit
    terminal: bool


@dataclass
class ReuseProfile:
    """Per-visit reuse distances, stored column-wise.

    Visit ``i`` is the i-th access to the analysed cache; ``distances[i]`` is
    the miss count until the same block is accessed again, or -1 when it
    never is (``terminal[i]``).
    """

    blocks: np.ndarray
    distances: np.ndarray
    terminal: np.ndarray
    misses: int = 0

    def __len__(self):
        return len(self.blocks)

    def __iter__(self) -> Iterator[ReuseRecord]:
        for b, d, t in zip(self.blocks.tolist(), self.distances.tolist(), self.terminal.tolist()):
            yield ReuseRecord(b, None if t else d, t)

    def finite(self) -> np.ndarray:
        return self.distances[~self.terminal]


def _next_occurrence(keys: np.ndarray) -> np.ndarray:
    """Index of the next equal key after each position, or -1."""
    n = len(keys)
    nxt = np.full(n, -1, dtype=np.int64)
    if n < 2:
        return nxt
    order = np.lexsort((np.arange(n), keys))
    same = keys[order[1:]] == keys[order[:-1]]
    nxt[order[:-1][same]] = order[1:][same]
    return nxt


def simulate_misses(trace: Sequence[AccessRecord], config: SimConfig, cache: str = "l1d"):
    """Run one L1 cache on its share of the trace; return (blocks, miss flags)."""
    if cache not in ("l1i", "l1d"):
        raise ValueError(f"analysis cache must be l1i or l1d, got {cache!r}")
    hc = config.hierarchy
    geom = hc.l1i if cache == "l1i" else hc.l1d
    policy = hc.l1i_policy if cache == "l1i" else hc.l1d_policy
    c = Cache(cache, geom, policy, hc.rd_miss_scope)
    want_instr = cache == "l1i"
    bb = geom.block_bytes
    blocks = []
    missed = []
    for rec in trace:
        if (rec.kind is AccessKind.INSTR) != want_instr:
            continue
        block = rec.addr // bb
        blocks.append(block)
        loc = c.where.get(block)
        if loc is not None:
            c.hits += 1
            c.on_hit(*loc)
            missed.append(False)
            continue
        c.misses += 1
        s = c.set_of(block)
        c.on_miss(s)
        way = c.free_way(s)
        if way is None:
            way, _ = c.choose_victim(s)
            c.evict(s, way)
        c.install(block, way)
        missed.append(True)
    return np.asarray(blocks, dtype=np.int64), np.asarray(missed, dtype=bool)


def reuse_from_log(blocks: np.ndarray, missed: np.ndarray) -> ReuseProfile:
    """Second pass: difference the global miss counter per block."""
    miss_i = missed.astype(np.int64)
    after = np.cumsum(miss_i)
    before = after - miss_i
    nxt = _next_occurrence(blocks)
    terminal = nxt < 0
    dist = np.full(len(blocks), -1, dtype=np.int64)
    has = ~terminal
    dist[has] = before[nxt[has]] - after[has]
    return ReuseProfile(blocks, dist, terminal, int(miss_i.sum()))


def miss_based_reuse(trace: Sequence[AccessRecord], config: SimConfig, cache: str = "l1d") -> ReuseProfile:
    blocks, missed = simulate_misses(trace, config, cache)
    return reuse_from_log(blocks, missed)


@dataclass(frozen=True)
class DeadLineBreakdown:
    reused_fraction: float
    dead_fraction: float
    threshold: int
    population: int
    per_block: bool = False

    def to_csv(self) -> str:
        return f"reused,dead\n{self.reused_fraction:.6f},{self.dead_fraction:.6f}\n"


def dead_breakdown(records: ReuseProfile, threshold: int = DEFAULT_DEAD_THRESHOLD,
                   per_block: bool = False) -> DeadLineBreakdown:
    """Split visits (or blocks) into reused and dead.

    A visit is dead when its distance is strictly greater than ``threshold``
    or when the block is never accessed again.  With ``per_block`` a block
    counts as reused if any of its visits is reused.
    """
    if len(records) == 0:
        raise ValueError("no reuse records to classify")
    dead = records.terminal | (records.distances > threshold)
    if per_block:
        uniq, inv = np.unique(records.blocks, return_inverse=True)
        reused_any = np.zeros(len(uniq), dtype=bool)
        np.logical_or.at(reused_any, inv, ~dead)
        n, n_dead = len(uniq), int((~reused_any).sum())
    else:
        n, n_dead = len(dead), int(dead.sum())
    dead_fraction = n_dead / n
    return DeadLineBreakdown(1.0 - dead_fraction, dead_fraction, threshold, n, per_block)


def distance_histogram(records: ReuseProfile) -> list[tuple[str, int]]:
    """Power-of-two buckets ``0``, ``1``, ``2-3``, ``4-7``, ... plus ``never``."""
    finite = records.finite()
    out = []
    if len(finite):
        top = int(finite.max())
        lo = 0
        while lo <= top:
            hi = 0 if lo == 0 else 2 * lo - 1
            n = int(((finite >= lo) & (finite <= hi)).sum())
            out.append((str(lo) if lo == hi else f"{lo}-{hi}", n))
            lo = 1 if lo == 0 else 2 * lo
    out.append(("never", int(records.terminal.sum())))
    return out


def histogram_csv(hist) -> str:
    buf = io.StringIO()
    buf.write("distance_bucket,count\n")
    for label, n in hist:
        buf.write(f"{label},{n}\n")
    return buf.getvalue()


# -- future-knowledge copy-back ---------------------------------------------


def next_use_index(trace: Sequence[AccessRecord], block_bytes: int) -> np.ndarray:
    blocks = np.fromiter((r.addr // block_bytes for r in trace), dtype=np.int64, count=len(trace))
    return _next_occurrence(blocks)


def future_selective_copyback(trace: Sequence[AccessRecord], config: SimConfig,
                              horizon: int = DEFAULT_HORIZON,
                              simulator: Optional[Simulator] = None) -> SimReport:
    """LRU-victim run that copies back a clean victim iff it is used again soon.

    "Soon" means within ``horizon`` trace records of the eviction.  Pass a
    prepared ``simulator`` (e.g. with preloaded caches) to start from a
    non-empty hierarchy; its copy-back filter is replaced.
    """
    trace = list(trace)
    if simulator is None:
        hc = replace(config.hierarchy, l1i_policy=PolicyKind.LRU, l1d_policy=PolicyKind.LRU,
                     copyback=CopybackPolicy.ALL)
        simulator = Simulator(replace(config, hierarchy=hc))
    sim = simulator
    bb = config.block_bytes
    nxt = next_use_index(trace, bb)
    first_use: dict[int, int] = {}
    for i, rec in enumerate(trace):
        first_use.setdefault(rec.addr // bb, i)
    last_seen: dict[int, int] = {}

    def worth_keeping(block: int) -> bool:
        pos = sim.position
        last = last_seen.get(block)
        # a block never seen so far (preloaded) next appears at its first use
        upcoming = first_use.get(block, -1) if last is None else int(nxt[last])
        return upcoming > pos and upcoming - pos <= horizon

    sim.hierarchy.clean_filter = worth_keeping
    for i, rec in enumerate(trace):
        last_seen[rec.addr // bb] = i
        sim.step(rec)
    return sim.report()
