"""Two-level cache hierarchy: split L1 (I and D) over a shared L2.

The hierarchy is exclusive or non-inclusive.  Dirty L1 victims always move
down to L2; what happens to clean victims is the copy-back policy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .core import RD_MAX, CacheGeometry, LineMeta
from .policy import PolicyKind, cbp_age_all, cbp_copyback_decision, make_policy


class InvariantViolation(RuntimeError):
    """An internal consistency check failed (a simulator bug, not bad input)."""


class AccessKind(enum.Enum):
    INSTR = "I"
    LOAD = "R"
    STORE = "W"


class Level(enum.IntEnum):
    L1 = 1
    L2 = 2
    MEMORY = 3


class InclusionMode(enum.Enum):
    EXCLUSIVE = "exclusive"
    NON_INCLUSIVE = "noninclusive"


class CopybackPolicy(enum.Enum):
    ALL = "all"
    NONE = "none"
    ICACHE_ONLY = "icache"
    DCACHE_ONLY = "dcache"
    SELECTIVE = "selective"


class RdScope(enum.Enum):
    SET = "set"
    GLOBAL = "global"


class EvictionOutcome(NamedTuple):
    """One line leaving a cache.

    ``source`` is ``"l1i"``, ``"l1d"`` or ``"l2"``.  For L1 victims
    ``copied_back`` says whether the line was installed in L2; for L2 victims
    ``l2_writeback_to_memory`` says whether it was written to memory.
    """

    source: str
    victim_block: int
    was_dirty: bool
    copied_back: bool
    l2_writeback_to_memory: bool


class AccessResult(NamedTuple):
    level: Level
    outcomes: list
    l2_writes: int  # copy-backs, write-backs and fills that occupy the L2 port


class PrefetchResult(NamedTuple):
    source: Level
    outcomes: list
    l2_writes: int
    l2_reads: int


@dataclass
class HierarchyConfig:
    l1i: CacheGeometry = field(default_factory=lambda: CacheGeometry.from_kb(32, 8))
    l1d: CacheGeometry = field(default_factory=lambda: CacheGeometry.from_kb(32, 8))
    l2: CacheGeometry = field(default_factory=lambda: CacheGeometry.from_kb(1024, 16))
    l1i_policy: PolicyKind = PolicyKind.LRU
    l1d_policy: PolicyKind = PolicyKind.CBP
    l2_policy: PolicyKind = PolicyKind.LRU
    inclusion: InclusionMode = InclusionMode.EXCLUSIVE
    copyback: CopybackPolicy = CopybackPolicy.SELECTIVE
    exclusive_fill_l2: bool = False
    rd_miss_scope: RdScope = RdScope.SET
    prefetch_fill_level: str = "l1d"

    def __post_init__(self):
        self.l1i_policy = PolicyKind(self.l1i_policy)
        self.l1d_policy = PolicyKind(self.l1d_policy)
        self.l2_policy = PolicyKind(self.l2_policy)
        self.inclusion = InclusionMode(self.inclusion)
        self.copyback = CopybackPolicy(self.copyback)
        self.rd_miss_scope = RdScope(self.rd_miss_scope)
        blocks = {self.l1i.block_bytes, self.l1d.block_bytes, self.l2.block_bytes}
        if len(blocks) != 1:
            raise ValueError(f"all levels must share one block size, got {sorted(blocks)}")
        if self.copyback is CopybackPolicy.SELECTIVE and PolicyKind.CBP not in (
            self.l1i_policy,
            self.l1d_policy,
        ):
            raise ValueError("copyback = selective needs an L1 cache using the cbp policy")
        if self.prefetch_fill_level not in ("l1d", "l2"):
            raise ValueError(f"prefetch fill level must be l1d or l2, got {self.prefetch_fill_level!r}")

    @property
    def block_bytes(self) -> int:
        return self.l1d.block_bytes


class Cache:
    """One set-associative cache level.

    ``where`` maps every resident block to its ``(set, way)`` so lookups are
    O(1); the set lists hold the per-way metadata the policies read.
    """

    def __init__(self, name: str, geom: CacheGeometry, policy=PolicyKind.LRU, rd_scope=RdScope.SET):
        self.name = name
        self.geom = geom
        self.policy = make_policy(policy)
        self.global_rd = RdScope(rd_scope) is RdScope.GLOBAL and self.policy.kind is PolicyKind.CBP
        self.num_sets = geom.num_sets
        self._set_mask = self.num_sets - 1
        self._set_bits = self.num_sets.bit_length() - 1
        self.sets = [[LineMeta() for _ in range(geom.associativity)] for _ in range(self.num_sets)]
        self.states = [self.policy.new_state() for _ in range(self.num_sets)]
        self.where: dict[int, tuple[int, int]] = {}
        self.clock = 0
        self.hits = 0
        self.misses = 0
        self.rd_hist = [0] * (RD_MAX + 1)

    def __repr__(self):
        return f"Cache({self.name!r}, {self.geom}, {self.policy.kind.value})"

    def set_of(self, block: int) -> int:
        return block & self._set_mask

    def lookup(self, block: int) -> Optional[tuple[int, int]]:
        return self.where.get(block)

    def line(self, block: int) -> Optional[LineMeta]:
        loc = self.where.get(block)
        return None if loc is None else self.sets[loc[0]][loc[1]]

    def __contains__(self, block: int) -> bool:
        return block in self.where

    def on_hit(self, s: int, way: int):
        self.clock += 1
        self.policy.on_hit(self.sets[s], self.states[s], way, self.clock)

    def on_miss(self, s: int):
        if self.global_rd:
            cbp_age_all(self.sets)
        else:
            self.policy.on_miss(self.sets[s], self.states[s])

    def refresh(self, s: int, way: int):
        """Move a line to most-recently-used without counting a hit."""
        self.clock += 1
        self.sets[s][way].recency = self.clock

    def free_way(self, s: int) -> Optional[int]:
        for way, line in enumerate(self.sets[s]):
            if not line.valid:
                return way
        return None

    def choose_victim(self, s: int) -> tuple[int, Optional[int]]:
        return self.policy.choose_victim(self.sets[s], self.states[s])

    def evict(self, s: int, way: int) -> tuple[int, bool]:
        """Invalidate a replacement victim and return ``(block, dirty)``."""
        line = self.sets[s][way]
        block, dirty = line.block, line.dirty
        if self.policy.kind is PolicyKind.CBP:
            self.rd_hist[line.rd] += 1
        del self.where[block]
        line.invalidate()
        self.policy.on_replacement(self.sets[s], self.states[s])
        return block, dirty

    def remove(self, block: int) -> LineMeta:
        """Drop a block that moved to another level (not a replacement)."""
        s, way = self.where.pop(block)
        line = self.sets[s][way]
        snapshot = LineMeta(line.tag, True, line.dirty, line.prefetched, line.rd, line.hit_count, line.recency, block)
        line.invalidate()
        return snapshot

    def install(self, block: int, way: int, dirty: bool = False, prefetched: bool = False):
        s = block & self._set_mask
        line = self.sets[s][way]
        if line.valid:
            raise InvariantViolation(f"{self.name}: install over valid way {way} of set {s}")
        self.clock += 1
        line.fill(block, block >> self._set_bits, self.clock, dirty, prefetched)
        self.where[block] = (s, way)

    def resident(self):
        return self.where.keys()

    @property
    def accesses(self) -> int:
        return self.hits + self.misses

    @property
    def miss_rate(self) -> float:
        n = self.hits + self.misses
        return self.misses / n if n else 0.0


@dataclass
class HierarchyStats:
    copybacks: dict = field(default_factory=lambda: {"l1i": 0, "l1d": 0})
    clean_evictions: dict = field(default_factory=lambda: {"l1i": 0, "l1d": 0})
    dirty_evictions: dict = field(default_factory=lambda: {"l1i": 0, "l1d": 0})
    l2_writebacks: int = 0
    l2_fills: int = 0
    prefetches_issued: int = 0
    prefetches_useful: int = 0
    prefetches_dropped: int = 0


CleanFilter = Callable[[int], bool]


class Hierarchy:
    """L1 ICache + L1 DCache over a shared L2.

    ``clean_filter``, when given, replaces the configured copy-back policy for
    clean L1 victims: it receives the victim's block and returns whether to
    copy it back.  ``check`` asserts exclusiveness after every transaction.
    """

    def __init__(self, config: HierarchyConfig, clean_filter: Optional[CleanFilter] = None, check: bool = False):
        self.config = config
        self.l1i = Cache("l1i", config.l1i, config.l1i_policy, config.rd_miss_scope)
        self.l1d = Cache("l1d", config.l1d, config.l1d_policy, config.rd_miss_scope)
        self.l2 = Cache("l2", config.l2, config.l2_policy, config.rd_miss_scope)
        self.block_bytes = config.block_bytes
        self.exclusive = config.inclusion is InclusionMode.EXCLUSIVE
        self.fill_l2_on_miss = not self.exclusive or config.exclusive_fill_l2
        self.clean_filter = clean_filter
        # strict exclusion: no block may sit in L2 while either L1 holds it
        self.strict_exclusive = self.exclusive and not config.exclusive_fill_l2
        self.check = check and self.strict_exclusive
        self.stats = HierarchyStats()
        self._l2_writes = 0

    def cache(self, name: str) -> Cache:
        return {"l1i": self.l1i, "l1d": self.l1d, "l2": self.l2}[name]

    # -- demand path -------------------------------------------------------

    def access(self, kind: AccessKind, addr: int) -> AccessResult:
        if not isinstance(kind, AccessKind):
            raise ValueError(f"unknown access kind {kind!r}")
        block = addr // self.block_bytes
        l1 = self.l1i if kind is AccessKind.INSTR else self.l1d
        store = kind is AccessKind.STORE
        loc = l1.where.get(block)
        if loc is not None:
            s, way = loc
            l1.hits += 1
            l1.on_hit(s, way)
            line = l1.sets[s][way]
            if store:
                line.dirty = True
            if line.prefetched:
                line.prefetched = False
                self.stats.prefetches_useful += 1
            return AccessResult(Level.L1, [], 0)

        l1.misses += 1
        s = block & l1._set_mask
        l1.on_miss(s)
        outcomes = []
        self._l2_writes = 0
        level, dirty = self._fetch_below(block, outcomes)
        way = self._make_room(l1, s, outcomes)
        l1.install(block, way, dirty=dirty or store)
        if self.check:
            self._assert_exclusive()
        return AccessResult(level, outcomes, self._l2_writes)

    def _fetch_below(self, block: int, outcomes: list) -> tuple[Level, bool]:
        l2 = self.l2
        loc = l2.where.get(block)
        if loc is not None:
            s, way = loc
            l2.hits += 1
            l2.on_hit(s, way)
            if self.exclusive:
                return Level.L2, l2.remove(block).dirty
            line = l2.sets[s][way]
            dirty, line.dirty = line.dirty, False  # the L1 copy now owns the data
            return Level.L2, dirty
        l2.misses += 1
        l2.on_miss(block & l2._set_mask)
        if self.fill_l2_on_miss:
            self._l2_insert(block, False, outcomes)
            self.stats.l2_fills += 1
        return Level.MEMORY, False

    def _l2_insert(self, block: int, dirty: bool, outcomes: list):
        l2 = self.l2
        self._l2_writes += 1
        loc = l2.where.get(block)
        if loc is not None:
            s, way = loc
            if dirty:
                l2.sets[s][way].dirty = True
            l2.refresh(s, way)
            return
        s = block & l2._set_mask
        way = l2.free_way(s)
        if way is None:
            way, _ = l2.choose_victim(s)
            victim, was_dirty = l2.evict(s, way)
            if was_dirty:
                self.stats.l2_writebacks += 1
            outcomes.append(EvictionOutcome("l2", victim, was_dirty, False, was_dirty))
        l2.install(block, way, dirty=dirty)

    def _grant_clean(self, l1: Cache, line: LineMeta, priority: Optional[int]) -> bool:
        if self.clean_filter is not None:
            return self.clean_filter(line.block)
        policy = self.config.copyback
        if policy is CopybackPolicy.ALL:
            return True
        if policy is CopybackPolicy.NONE:
            return False
        if policy is CopybackPolicy.ICACHE_ONLY:
            return l1 is self.l1i
        if policy is CopybackPolicy.DCACHE_ONLY:
            return l1 is self.l1d
        # SELECTIVE: CBP caches decide per line, LRU caches keep copying back
        if l1.policy.kind is PolicyKind.CBP:
            return cbp_copyback_decision(line, priority)
        return True

    def _make_room(self, l1: Cache, s: int, outcomes: list) -> int:
        way = l1.free_way(s)
        if way is not None:
            return way
        way, priority = l1.choose_victim(s)
        line = l1.sets[s][way]
        dirty = line.dirty
        sibling = self.l1d if l1 is self.l1i else self.l1i
        twin = sibling.line(line.block) if self.strict_exclusive else None
        if twin is not None:
            # the other L1 still holds the block (a prefetched code block, say);
            # keep L2 disjoint and let that copy carry the data down later
            twin.dirty = twin.dirty or dirty
            copy = False
        else:
            copy = dirty or self._grant_clean(l1, line, priority)
        if copy:
            # the copy must land in L2 before the L1 entry disappears
            self._l2_insert(line.block, dirty, outcomes)
            self.stats.copybacks[l1.name] += 1
        block, _ = l1.evict(s, way)
        if dirty:
            self.stats.dirty_evictions[l1.name] += 1
        else:
            self.stats.clean_evictions[l1.name] += 1
        outcomes.append(EvictionOutcome(l1.name, block, dirty, copy, False))
        return way

    def evict_from_l1(self, name: str, set_index: int) -> EvictionOutcome:
        """Force one replacement in a full L1 set, as a pending fill would."""
        l1 = self.cache(name)
        if l1.free_way(set_index) is not None:
            raise ValueError(f"{name} set {set_index} is not full")
        outcomes = []
        self._l2_writes = 0
        self._make_room(l1, set_index, outcomes)
        if self.check:
            self._assert_exclusive()
        return outcomes[-1]

    # -- prefetch path -----------------------------------------------------

    def prefetch(self, block: int) -> Optional[PrefetchResult]:
        """Fill ``block`` ahead of demand; returns None when dropped."""
        l1d, l2 = self.l1d, self.l2
        if block < 0 or block in l1d.where:
            self.stats.prefetches_dropped += 1
            return None
        outcomes = []
        self._l2_writes = 0
        if self.config.prefetch_fill_level == "l2":
            if block in l2.where:
                self.stats.prefetches_dropped += 1
                return None
            self._l2_insert(block, False, outcomes)
            self.stats.prefetches_issued += 1
            return PrefetchResult(Level.MEMORY, outcomes, self._l2_writes, 0)

        l2_line = l2.line(block)
        if l2_line is not None:
            if self.exclusive and l2_line.dirty:
                # moving it up would need a dirty prefetched line
                self.stats.prefetches_dropped += 1
                return None
            source, reads = Level.L2, 1
            if self.exclusive:
                l2.remove(block)
        else:
            source, reads = Level.MEMORY, 0
            if self.fill_l2_on_miss:
                self._l2_insert(block, False, outcomes)
                self.stats.l2_fills += 1
        way = self._make_room(l1d, block & l1d._set_mask, outcomes)
        l1d.install(block, way, dirty=False, prefetched=True)
        self.stats.prefetches_issued += 1
        if self.check:
            self._assert_exclusive()
        return PrefetchResult(source, outcomes, self._l2_writes, reads)

    # -- diagnostics -------------------------------------------------------

    def check_exclusiveness(self) -> bool:
        l2 = self.l2.where.keys()
        return l2.isdisjoint(self.l1d.where.keys()) and l2.isdisjoint(self.l1i.where.keys())

    def _assert_exclusive(self):
        if not self.check_exclusiveness():
            raise InvariantViolation("a block is resident in both L1 and L2")

    def locate(self, block: int) -> list[str]:
        return [c.name for c in (self.l1i, self.l1d, self.l2) if block in c.where]

    def dirty_somewhere(self, block: int) -> bool:
        for c in (self.l1i, self.l1d, self.l2):
            line = c.line(block)
            if line is not None and line.dirty:
                return True
        return False

    def preload(self, name: str, blocks, dirty: bool = False):
        """Install blocks oldest-first without touching any statistics."""
        cache = self.cache(name)
        for block in blocks:
            if block in cache.where:
                continue
            way = cache.free_way(block & cache._set_mask)
            if way is None:
                raise ValueError(f"{name}: no free way for block {block:#x}")
            cache.install(block, way, dirty=dirty)
