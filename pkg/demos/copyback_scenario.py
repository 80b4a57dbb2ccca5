"""Why copying back every clean victim can hurt, in four accesses.

A 2-way L1 DCache holds X and Y; a 4-way L2 below it holds A, B, C and D
(A least recently used).  Two new blocks P and Q push X and Y out of L1,
then the program touches Y and B.

* copy back everything: X and Y land in L2 and push A and B out, so B misses;
* copy back nothing: A and B survive, but Y has to come from memory;
* copy back only what is needed soon (Y): both follow-up accesses hit in L2.
"""

from cbpsim.core import CacheGeometry
from cbpsim.engine import LatencyConfig, SimConfig, Simulator
from cbpsim.hierarchy import AccessKind, Hierarchy, HierarchyConfig
from cbpsim.oracle import future_selective_copyback
from cbpsim.trace import AccessRecord

A, B, C, D, X, Y, P, Q = 1, 2, 3, 4, 10, 11, 20, 21
NAMES = {A: "A", B: "B", C: "C", D: "D", X: "X", Y: "Y", P: "P", Q: "Q"}


def config(copyback):
    return HierarchyConfig(
        l1i=CacheGeometry(128, 2), l1d=CacheGeometry(128, 2), l2=CacheGeometry(256, 4),
        l1d_policy="lru", copyback=copyback,
    )


def prepare(h):
    h.preload("l2", [A, B, C, D])
    h.preload("l1d", [X, Y])


def run_policy(copyback):
    h = Hierarchy(config(copyback))
    prepare(h)
    for blk in (P, Q):
        h.access(AccessKind.LOAD, blk * 64)
    l2 = " ".join(sorted(NAMES[b] for b in h.l2.resident()))
    y, b = (h.access(AccessKind.LOAD, blk * 64).level.name for blk in (Y, B))
    print(f"copy back {copyback:<6} L2 after P, Q: {l2:<10} Y -> {y:<7} B -> {b}")


def main():
    for policy in ("all", "none"):
        run_policy(policy)

    cfg = SimConfig(config("all"), LatencyConfig(), prefetcher="none")
    sim = Simulator(cfg)
    prepare(sim.hierarchy)
    trace = [AccessRecord(1, AccessKind.LOAD, b * 64) for b in (P, Q, Y, B)]
    rep = future_selective_copyback(trace, cfg, horizon=2, simulator=sim)
    print(f"future-selective: copy-backs: {rep.copyback_count_l1d}   "
          f"L2 hits: {rep.l2_hits} (Y and B)   L2 misses: {rep.l2_misses} (P and Q)")


if __name__ == "__main__":
    main()
