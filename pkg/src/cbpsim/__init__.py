"""Trace-driven simulation of reuse-distance-based copy-back prediction."""

from .core import CacheGeometry, LineMeta, SaturatingCounter, decompose, recompose, sat_inc
from .engine import LatencyConfig, SimConfig, SimReport, Simulator, compare, run
from .hierarchy import (
    AccessKind,
    CopybackPolicy,
    EvictionOutcome,
    Hierarchy,
    HierarchyConfig,
    InclusionMode,
    InvariantViolation,
    Level,
)
from .oracle import dead_breakdown, future_selective_copyback, miss_based_reuse
from .policy import PolicyKind, SetPolicyState, metadata_budget
from .trace import AccessRecord, GeneratorModel, generate, parse, render

__version__ = "0.1.0"

__all__ = [
    "CacheGeometry",
    "LineMeta",
    "SaturatingCounter",
    "decompose",
    "recompose",
    "sat_inc",
    "LatencyConfig",
    "SimConfig",
    "SimReport",
    "Simulator",
    "compare",
    "run",
    "AccessKind",
    "CopybackPolicy",
    "EvictionOutcome",
    "Hierarchy",
    "HierarchyConfig",
    "InclusionMode",
    "InvariantViolation",
    "Level",
    "dead_breakdown",
    "future_selective_copyback",
    "miss_based_reuse",
    "PolicyKind",
    "SetPolicyState",
    "metadata_budget",
    "AccessRecord",
    "GeneratorModel",
    "generate",
    "parse",
    "render",
]
