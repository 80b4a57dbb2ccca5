"""Replacement policies: plain LRU and the reuse-distance copy-back predictor.

Both policies work on one set at a time: a list of :class:`LineMeta` indexed
by way, plus an optional per-set state object.  The module-level functions
are the primitive operations; :class:`LRUPolicy` and :class:`CBPPolicy`
bundle them behind the hooks a :class:`~cbpsim.hierarchy.Cache` calls.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import HIT_MAX, RD_MAX, CacheGeometry, LineMeta

RD_WINDOW = 8  # hits per RD recomputation; averaging is a >> 3
RD_WINDOW_SHIFT = 3
COPYBACK_THRESHOLD = 9
MAX_PRIORITY = 10

PREFETCH_CREDIT = 1
LOW_HIT_CREDIT = 1
NEAR_BAND_CREDIT = 4
FAR_BAND_CREDIT = 8


class PolicyKind(enum.Enum):
    LRU = "lru"
    CBP = "cbp"


@dataclass(slots=True)
class SetPolicyState:
    """Per-set CBP registers: 4-bit RD, 7-bit RDsum, 3-bit RDcounter."""

    RD: int = 0
    RDsum: int = 0
    RDcounter: int = 0


def _require_valid(line: LineMeta, what: str):
    if not line.valid:
        raise ValueError(f"{what} refers to an invalid line")


# -- LRU -------------------------------------------------------------------


def lru_on_access(set_lines: Sequence[LineMeta], hit_way: int, stamp: int):
    line = set_lines[hit_way]
    _require_valid(line, "hit_way")
    line.recency = stamp


def lru_select_victim(set_lines: Sequence[LineMeta]) -> int:
    """Way of the valid line with the smallest recency stamp."""
    victim = -1
    oldest = None
    for way, line in enumerate(set_lines):
        if line.valid and (oldest is None or line.recency < oldest):
            victim, oldest = way, line.recency
    if victim < 0:
        raise ValueError("no valid line to evict")
    return victim


# -- CBP -------------------------------------------------------------------


def cbp_on_access(
    set_lines: Sequence[LineMeta],
    state: SetPolicyState,
    hit: bool,
    hit_way: Optional[int] = None,
    stamp: Optional[int] = None,
):
    """Update rd / RD for one demand access to the set (in place).

    On a miss every valid line ages by one.  On a hit the hit line's rd is
    folded into the running sum and cleared; after eight hits RD becomes the
    mean of the eight folded values.
    """
    if not hit:
        for line in set_lines:
            if line.valid and line.rd < RD_MAX:
                line.rd += 1
        return
    if hit_way is None:
        raise ValueError("hit without hit_way")
    line = set_lines[hit_way]
    _require_valid(line, "hit_way")
    state.RDsum += line.rd
    line.rd = 0
    state.RDcounter += 1
    if state.RDcounter == RD_WINDOW:
        state.RD = state.RDsum >> RD_WINDOW_SHIFT
        state.RDsum = 0
        state.RDcounter = 0
    if line.hit_count < HIT_MAX:
        line.hit_count += 1
    if stamp is not None:
        line.recency = stamp


def cbp_age_all(sets: Sequence[Sequence[LineMeta]]):
    """Miss hook for the cache-wide ("global") rd scope variant."""
    for set_lines in sets:
        for line in set_lines:
            if line.valid and line.rd < RD_MAX:
                line.rd += 1


def priority_of(prefetched: bool, hit_count: int, rd: int, RD: int) -> int:
    p = 0
    if prefetched:
        p += PREFETCH_CREDIT
    if hit_count <= 1:
        p += LOW_HIT_CREDIT
    # python ints: 2*RD and 3*RD never wrap
    if 2 * RD <= rd <= 3 * RD:
        p += NEAR_BAND_CREDIT
    elif rd > 3 * RD:
        p += FAR_BAND_CREDIT
    return p


def cbp_priority(line: LineMeta, RD: int) -> int:
    _require_valid(line, "priority request")
    return priority_of(line.prefetched, line.hit_count, line.rd, RD)


def cbp_choose(set_lines: Sequence[LineMeta], state: SetPolicyState) -> tuple[int, int]:
    """Return ``(way, priority)`` of the line CBP evicts.

    Highest priority wins; ties go to the least recently touched line, then
    to the lowest way.
    """
    RD = state.RD
    best_way = -1
    best_key = None
    best_p = -1
    for way, line in enumerate(set_lines):
        if not line.valid:
            continue
        p = priority_of(line.prefetched, line.hit_count, line.rd, RD)
        key = (-p, line.recency, way)
        if best_key is None or key < best_key:
            best_key, best_way, best_p = key, way, p
    if best_way < 0:
        raise ValueError("no valid line to evict")
    return best_way, best_p


def cbp_select_victim(set_lines: Sequence[LineMeta], state: SetPolicyState) -> int:
    return cbp_choose(set_lines, state)[0]


def cbp_copyback_decision(victim: LineMeta, priority: int) -> bool:
    """Dirty victims always go down; clean ones only below the threshold."""
    return victim.dirty or priority < COPYBACK_THRESHOLD


def cbp_reset_hit_counters(set_lines: Sequence[LineMeta]):
    for line in set_lines:
        line.hit_count = 0


# -- hook bundles used by Cache --------------------------------------------


class LRUPolicy:
    kind = PolicyKind.LRU

    def new_state(self):
        return None

    def on_hit(self, set_lines, state, way, stamp):
        lru_on_access(set_lines, way, stamp)

    def on_miss(self, set_lines, state):
        pass

    def choose_victim(self, set_lines, state):
        return lru_select_victim(set_lines), None

    def on_replacement(self, set_lines, state):
        pass


class CBPPolicy:
    kind = PolicyKind.CBP

    def new_state(self):
        return SetPolicyState()

    def on_hit(self, set_lines, state, way, stamp):
        cbp_on_access(set_lines, state, True, way, stamp)

    def on_miss(self, set_lines, state):
        cbp_on_access(set_lines, state, False)

    def choose_victim(self, set_lines, state):
        return cbp_choose(set_lines, state)

    def on_replacement(self, set_lines, state):
        # hit counters count hits since the set's last replacement
        cbp_reset_hit_counters(set_lines)


def make_policy(kind: PolicyKind | str):
    kind = PolicyKind(kind)
    return CBPPolicy() if kind is PolicyKind.CBP else LRUPolicy()


# -- storage cost ----------------------------------------------------------

CBP_LINE_BITS = 4 + 2 + 1  # rd, hit counter, prefetched
CBP_SET_BITS = 4 + 7 + 3  # RD, RDsum, RDcounter


def metadata_budget(geom: CacheGeometry, kind: PolicyKind | str) -> tuple[int, int]:
    """Extra ``(bits_per_line, bits_per_set)`` a policy adds over baseline LRU."""
    if PolicyKind(kind) is PolicyKind.CBP:
        return CBP_LINE_BITS, CBP_SET_BITS
    return 0, 0


def extra_bits_per_set(geom: CacheGeometry, kind: PolicyKind | str) -> int:
    per_line, per_set = metadata_budget(geom, kind)
    return per_line * geom.associativity + per_set
