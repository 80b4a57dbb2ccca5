"""Trace records: the native text format, a Lackey adapter and a generator.

Native format, one record per line::

    <icount_delta> <I|R|W> <0x-hex address>

separated by single spaces.  Blank lines and lines starting with ``#`` are
ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Iterator, NamedTuple

import numpy as np

from .core import DEFAULT_BLOCK_BYTES
from .hierarchy import AccessKind

_KINDS = {k.value: k for k in AccessKind}


class AccessRecord(NamedTuple):
    icount_delta: int
    kind: AccessKind
    addr: int


class TraceParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _parse_line(text: str, lineno: int) -> AccessRecord:
    fields = text.split(" ")
    if len(fields) != 3:
        col = 1
        # point at the first field that breaks the "a b c" shape
        for i, f in enumerate(fields):
            if f == "" or i >= 3:
                break
            col += len(f) + 1
        raise TraceParseError(lineno, col, f"expected '<icount> <kind> <addr>', got {text!r}")
    delta_s, kind_s, addr_s = fields
    if not delta_s.isdigit() or not delta_s.isascii():
        raise TraceParseError(lineno, 1, f"bad instruction count {delta_s!r}")
    col = len(delta_s) + 2
    kind = _KINDS.get(kind_s)
    if kind is None:
        raise TraceParseError(lineno, col, f"unknown access kind {kind_s!r}")
    col += len(kind_s) + 1
    if not addr_s.startswith("0x") or len(addr_s) < 3:
        raise TraceParseError(lineno, col, f"address must be 0x-prefixed hex, got {addr_s!r}")
    try:
        addr = int(addr_s[2:], 16)
    except ValueError:
        raise TraceParseError(lineno, col, f"non-hex address {addr_s!r}") from None
    if "_" in addr_s or addr >= 1 << 64:
        raise TraceParseError(lineno, col, f"bad address {addr_s!r}")
    return AccessRecord(int(delta_s), kind, addr)


def parse(stream: Iterable[str]) -> Iterator[AccessRecord]:
    """Yield records from a text stream, one line at a time."""
    for lineno, raw in enumerate(stream, 1):
        text = raw.rstrip("\r\n")
        if not text.strip() or text.startswith("#"):
            continue
        yield _parse_line(text, lineno)


def read_trace(path) -> Iterator[AccessRecord]:
    with open(path) as f:
        yield from parse(f)


def render_record(rec: AccessRecord) -> str:
    return f"{rec.icount_delta} {rec.kind.value} {rec.addr:#x}"


def render(records: Iterable[AccessRecord]) -> Iterator[str]:
    for rec in records:
        yield render_record(rec) + "\n"


def write_trace(records: Iterable[AccessRecord], out: IO[str]):
    out.writelines(render(records))


# -- Lackey ----------------------------------------------------------------


def from_lackey(stream: Iterable[str]) -> Iterator[AccessRecord]:
    """Convert ``valgrind --tool=lackey --trace-mem=yes`` output.

    ``I`` lines become one-instruction fetch records; ``L``/``S`` become reads
    and writes; ``M`` (modify) becomes a read followed by a write.  Lines that
    are not memory events (``==pid==`` banners and the like) are skipped.
    """
    for lineno, raw in enumerate(stream, 1):
        text = raw.strip()
        if not text or text.startswith("=="):
            continue
        op, _, rest = text.partition(" ")
        addr_s = rest.strip().split(",")[0]
        if op not in ("I", "L", "S", "M"):
            continue
        try:
            addr = int(addr_s, 16)
        except ValueError:
            raise TraceParseError(lineno, 3, f"non-hex address {addr_s!r}") from None
        if op == "I":
            yield AccessRecord(1, AccessKind.INSTR, addr)
        elif op == "L":
            yield AccessRecord(0, AccessKind.LOAD, addr)
        elif op == "S":
            yield AccessRecord(0, AccessKind.STORE, addr)
        else:
            yield AccessRecord(0, AccessKind.LOAD, addr)
            yield AccessRecord(0, AccessKind.STORE, addr)


# -- synthetic traces ------------------------------------------------------


@dataclass(frozen=True)
class GeneratorModel:
    """Block population and access mix for :func:`generate`.

    A ``dead_fraction`` share of the blocks is touched exactly once.  Of the
    remaining accesses, ``hot_weight`` go to the ``hot_fraction`` share of
    blocks and the rest spread uniformly over the other live blocks.  Each
    block is code with probability ``instr_ratio``; data accesses are writes
    with probability ``write_ratio``.
    """

    num_blocks: int = 10_000
    hot_fraction: float = 0.1
    hot_weight: float = 0.8
    dead_fraction: float = 0.3
    write_ratio: float = 0.2
    instr_ratio: float = 0.0
    seed: int = 0
    block_bytes: int = DEFAULT_BLOCK_BYTES

    def __post_init__(self):
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be positive")
        for name in ("hot_fraction", "hot_weight", "dead_fraction", "write_ratio", "instr_ratio"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def n_dead(self) -> int:
        return int(round(self.dead_fraction * self.num_blocks))

    @property
    def n_hot(self) -> int:
        return min(int(round(self.hot_fraction * self.num_blocks)), self.num_blocks - self.n_dead)


def generate_blocks(model: GeneratorModel, length: int):
    """Return ``(blocks, kinds)`` arrays; kinds hold 0=I, 1=R, 2=W."""
    rng = np.random.default_rng(model.seed)
    perm = rng.permutation(model.num_blocks)
    n_dead = min(model.n_dead, length)
    dead = perm[: model.n_dead]
    live = perm[model.n_dead:]
    hot, cold = live[: model.n_hot], live[model.n_hot:]

    blocks = np.empty(length, dtype=np.int64)
    dead_pos = np.zeros(length, dtype=bool)
    dead_pos[rng.choice(length, size=n_dead, replace=False)] = True
    blocks[dead_pos] = rng.permutation(dead)[:n_dead]

    m = length - n_dead
    if m and len(live) == 0:
        raise ValueError("every block is dead but the trace needs more accesses")
    if m:
        hot_weight = model.hot_weight if len(cold) else 1.0
        if len(hot) == 0:
            hot_weight = 0.0
        to_hot = rng.random(m) < hot_weight
        picks = np.empty(m, dtype=np.int64)
        n_h = int(to_hot.sum())
        if n_h:
            picks[to_hot] = hot[rng.integers(0, len(hot), n_h)]
        if m - n_h:
            picks[~to_hot] = cold[rng.integers(0, len(cold), m - n_h)]
        blocks[~dead_pos] = picks

    is_code = rng.random(model.num_blocks) < model.instr_ratio
    writes = rng.random(length) < model.write_ratio
    kinds = np.where(is_code[blocks], 0, np.where(writes, 2, 1)).astype(np.int8)
    return blocks, kinds


_KIND_BY_CODE = (AccessKind.INSTR, AccessKind.LOAD, AccessKind.STORE)


def generate(model: GeneratorModel, length: int) -> list[AccessRecord]:
    """Deterministic synthetic trace; one instruction per record."""
    if length <= 0:
        return []
    blocks, kinds = generate_blocks(model, length)
    bb = model.block_bytes
    return [
        AccessRecord(1, _KIND_BY_CODE[k], b * bb)
        for b, k in zip(blocks.tolist(), kinds.tolist())
    ]
