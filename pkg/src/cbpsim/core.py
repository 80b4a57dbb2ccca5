"""Address arithmetic, saturating counters and per-line cache metadata."""

from __future__ import annotations

from dataclasses import dataclass

RD_MAX = 15  # 4-bit private reuse distance
HIT_MAX = 3  # 2-bit hit counter
DEFAULT_BLOCK_BYTES = 64


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class CacheGeometry:
    """Size, associativity and line size of one set-associative cache.

    All three values must be powers of two and describe at least one set.
    """

    capacity_bytes: int
    associativity: int
    block_bytes: int = DEFAULT_BLOCK_BYTES

    def __post_init__(self):
        for field in ("capacity_bytes", "associativity", "block_bytes"):
            value = getattr(self, field)
            if not isinstance(value, int) or not _is_pow2(value):
                raise ValueError(f"{field} must be a power of two, got {value!r}")
        if self.capacity_bytes < self.associativity * self.block_bytes:
            raise ValueError(
                f"{self.capacity_bytes}B cannot hold one set of "
                f"{self.associativity} x {self.block_bytes}B lines"
            )

    @classmethod
    def from_kb(cls, size_kb: int, associativity: int, block_bytes: int = DEFAULT_BLOCK_BYTES):
        return cls(size_kb * 1024, associativity, block_bytes)

    @property
    def num_sets(self) -> int:
        return self.capacity_bytes // (self.associativity * self.block_bytes)

    @property
    def num_lines(self) -> int:
        return self.capacity_bytes // self.block_bytes


def block_of(addr: int, block_bytes: int = DEFAULT_BLOCK_BYTES) -> int:
    return addr // block_bytes


def decompose(addr: int, geom: CacheGeometry) -> tuple[int, int]:
    """Split a byte address into ``(tag, set_index)``."""
    block = addr // geom.block_bytes
    return block // geom.num_sets, block % geom.num_sets


def recompose(tag: int, set_index: int, geom: CacheGeometry) -> int:
    """Inverse of :func:`decompose`; returns the block-aligned byte address."""
    return (tag * geom.num_sets + set_index) * geom.block_bytes


@dataclass
class SaturatingCounter:
    value: int = 0
    max: int = RD_MAX

    def __post_init__(self):
        if not 0 <= self.value <= self.max:
            raise ValueError(f"counter value {self.value} outside 0..{self.max}")

    @classmethod
    def of_width(cls, bits: int, value: int = 0) -> SaturatingCounter:
        return cls(value, (1 << bits) - 1)

    def inc(self) -> SaturatingCounter:
        return SaturatingCounter(min(self.value + 1, self.max), self.max)

    def dec(self) -> SaturatingCounter:
        return SaturatingCounter(max(self.value - 1, 0), self.max)

    def reset(self) -> SaturatingCounter:
        return SaturatingCounter(0, self.max)


def sat_inc(c: SaturatingCounter) -> SaturatingCounter:
    return c.inc()


@dataclass(slots=True)
class LineMeta:
    """One cache way.

    ``rd`` and ``hit_count`` are stored as plain ints for speed; every writer
    clamps them to ``RD_MAX`` / ``HIT_MAX``.
    """

    tag: int = 0
    valid: bool = False
    dirty: bool = False
    prefetched: bool = False
    rd: int = 0
    hit_count: int = 0
    recency: int = 0
    block: int = -1

    def fill(self, block: int, tag: int, stamp: int, dirty: bool = False, prefetched: bool = False):
        self.block = block
        self.tag = tag
        self.valid = True
        self.dirty = dirty
        self.prefetched = prefetched
        self.rd = 0
        self.hit_count = 0
        self.recency = stamp

    def invalidate(self):
        self.valid = False
        self.dirty = False
        self.prefetched = False
        self.rd = 0
        self.hit_count = 0
        self.block = -1
