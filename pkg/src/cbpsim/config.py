"""Flat ``key = value`` run configuration.

Every key has a default; together the defaults describe the simulated CPU
(32KB 8-way L1s with CBP on the DCache, a 1MB 16-way STT-MRAM L2 with
10/40-cycle read/write latency, a stride prefetcher).
"""

from __future__ import annotations

from typing import Callable, Iterable, NamedTuple

from .core import CacheGeometry
from .engine import LatencyConfig, SimConfig
from .hierarchy import HierarchyConfig
from .trace import GeneratorModel


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return t

    return parse


class Key(NamedTuple):
    default: object
    parse: Callable
    help: str


KEYS: dict[str, Key] = {
    "l1i.size_kb": Key(32, int, "L1 ICache capacity in KB"),
    "l1i.assoc": Key(8, int, "L1 ICache ways"),
    "l1i.policy": Key("lru", _choice("lru", "cbp"), "L1 ICache replacement"),
    "l1d.size_kb": Key(32, int, "L1 DCache capacity in KB"),
    "l1d.assoc": Key(8, int, "L1 DCache ways"),
    "l1d.policy": Key("cbp", _choice("lru", "cbp"), "L1 DCache replacement"),
    "l2.size_kb": Key(1024, int, "L2 capacity in KB"),
    "l2.assoc": Key(16, int, "L2 ways"),
    "l2.policy": Key("lru", _choice("lru", "cbp"), "L2 replacement"),
    "l2.read_lat": Key(10, int, "L2 read latency (cycles)"),
    "l2.write_lat": Key(40, int, "L2 write latency (cycles), holds the L2 port"),
    "l1_hit_lat": Key(1, int, "L1 hit latency (cycles)"),
    "mem_lat": Key(100, int, "memory latency (cycles)"),
    "block_bytes": Key(64, int, "cache line size in bytes"),
    "inclusion": Key("exclusive", _choice("exclusive", "noninclusive"), "L1/L2 inclusion"),
    "copyback": Key(
        "selective",
        _choice("all", "none", "icache", "dcache", "selective"),
        "clean-victim copy-back policy",
    ),
    "exclusive_fill_l2": Key(False, _bool, "also fill L2 on demand misses in exclusive mode"),
    "rd_miss_scope": Key("set", _choice("set", "global"), "which lines age on a miss"),
    "prefetcher": Key("stride", _choice("none", "stride"), "L1 DCache prefetcher"),
    "prefetch.table_entries": Key(64, int, "stride table entries"),
    "prefetch.confidence_threshold": Key(2, int, "confidence needed to prefetch"),
    "prefetch.fill_level": Key("l1d", _choice("l1d", "l2"), "where prefetches are filled"),
    "gen.num_blocks": Key(10_000, int, "generator: block population"),
    "gen.hot_fraction": Key(0.1, float, "generator: share of hot blocks"),
    "gen.hot_weight": Key(0.8, float, "generator: share of live accesses to hot blocks"),
    "gen.dead_fraction": Key(0.3, float, "generator: share of blocks touched once"),
    "gen.write_ratio": Key(0.2, float, "generator: share of data accesses that write"),
    "gen.instr_ratio": Key(0.0, float, "generator: share of blocks that are code"),
    "seed": Key(0, int, "the only source of randomness"),
}


def describe_keys() -> str:
    width = max(map(len, KEYS))
    lines = ["config keys (default):"]
    for name, key in KEYS.items():
        default = str(key.default).lower() if isinstance(key.default, bool) else key.default
        lines.append(f"  {name:<{width}} = {default!s:<10} {key.help}")
    return "\n".join(lines)


class RunConfig(dict):
    """Resolved key/value map; missing keys hold their defaults."""

    @classmethod
    def defaults(cls) -> RunConfig:
        return cls({k: v.default for k, v in KEYS.items()})

    @classmethod
    def parse(cls, lines: Iterable[str], source: str = "<config>") -> RunConfig:
        cfg = cls.defaults()
        for lineno, raw in enumerate(lines, 1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
            cfg.set(key, value, f"{source}:{lineno}")
        return cfg

    @classmethod
    def load(cls, path) -> RunConfig:
        with open(path) as f:
            return cls.parse(f, str(path))

    def set(self, key: str, value: str, where: str = "<override>"):
        if key not in KEYS:
            raise ConfigError(f"{where}: unknown config key {key!r}")
        try:
            self[key] = KEYS[key].parse(value)
        except ValueError as e:
            raise ConfigError(f"{where}: {key}: {e}") from None

    def to_sim_config(self) -> SimConfig:
        bb = self["block_bytes"]
        try:
            hierarchy = HierarchyConfig(
                l1i=CacheGeometry.from_kb(self["l1i.size_kb"], self["l1i.assoc"], bb),
                l1d=CacheGeometry.from_kb(self["l1d.size_kb"], self["l1d.assoc"], bb),
                l2=CacheGeometry.from_kb(self["l2.size_kb"], self["l2.assoc"], bb),
                l1i_policy=self["l1i.policy"],
                l1d_policy=self["l1d.policy"],
                l2_policy=self["l2.policy"],
                inclusion=self["inclusion"],
                copyback=self["copyback"],
                exclusive_fill_l2=self["exclusive_fill_l2"],
                rd_miss_scope=self["rd_miss_scope"],
                prefetch_fill_level=self["prefetch.fill_level"],
            )
            latency = LatencyConfig(
                l1_hit_cycles=self["l1_hit_lat"],
                l2_read_cycles=self["l2.read_lat"],
                l2_write_cycles=self["l2.write_lat"],
                mem_cycles=self["mem_lat"],
            )
            return SimConfig(
                hierarchy=hierarchy,
                latency=latency,
                prefetcher=self["prefetcher"],
                prefetch_table_entries=self["prefetch.table_entries"],
                prefetch_confidence_threshold=self["prefetch.confidence_threshold"],
                seed=self["seed"],
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def to_generator_model(self) -> GeneratorModel:
        try:
            return GeneratorModel(
                num_blocks=self["gen.num_blocks"],
                hot_fraction=self["gen.hot_fraction"],
                hot_weight=self["gen.hot_weight"],
                dead_fraction=self["gen.dead_fraction"],
                write_ratio=self["gen.write_ratio"],
                instr_ratio=self["gen.instr_ratio"],
                seed=self["seed"],
                block_bytes=self["block_bytes"],
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None
