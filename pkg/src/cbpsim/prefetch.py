"""Region-indexed stride prefetcher for the L1 DCache."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import DEFAULT_BLOCK_BYTES

REGION_SHIFT = 4  # 16 blocks per region
CONFIDENCE_MAX = 3


@dataclass(slots=True)
class StrideEntry:
    region_key: int
    last_block: int
    stride: int = 0
    confidence: int = 0


class StridePrefetcher:
    """Direct-mapped table of stride detectors, one per address region.

    Traces carry no PC, so entries are keyed by ``block >> 4``.  A new stride
    starts at confidence 1; each repeat adds one (saturating at 3).  Once the
    confidence reaches the threshold the next block along the stride is
    returned (degree 1, distance 1).
    """

    def __init__(self, table_entries: int = 64, confidence_threshold: int = 2,
                 block_bytes: int = DEFAULT_BLOCK_BYTES):
        if table_entries < 1:
            raise ValueError("table_entries must be positive")
        if not 1 <= confidence_threshold <= CONFIDENCE_MAX:
            raise ValueError(f"confidence_threshold must be in 1..{CONFIDENCE_MAX}")
        self.table_entries = table_entries
        self.confidence_threshold = confidence_threshold
        self.block_bytes = block_bytes
        self.table: list[Optional[StrideEntry]] = [None] * table_entries

    def observe(self, addr: int) -> Optional[int]:
        """Train on one demand access; return a block to prefetch or None."""
        block = addr // self.block_bytes
        region = block >> REGION_SHIFT
        slot = region % self.table_entries
        entry = self.table[slot]
        if entry is None or entry.region_key != region:
            self.table[slot] = StrideEntry(region, block)
            return None
        delta = block - entry.last_block
        if delta == 0:
            return None
        if delta == entry.stride:
            if entry.confidence < CONFIDENCE_MAX:
                entry.confidence += 1
        else:
            entry.stride = delta
            entry.confidence = 1
        entry.last_block = block
        if entry.confidence >= self.confidence_threshold:
            target = block + entry.stride
            if target >= 0:
                return target
        return None
