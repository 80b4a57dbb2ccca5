"""How many cache lines are dead on arrival?

A line is dead when more than 1000 misses pass before its block is touched
again, or when it is never touched again.  This script builds a trace where
36% of the blocks are touched exactly once and asks the reuse-distance
analysis to find them, first per block and then per visit.  The per-visit
view is much larger: every cold visit whose successor is far away counts too.
"""

from cbpsim.config import RunConfig
from cbpsim.oracle import dead_breakdown, distance_histogram, miss_based_reuse
from cbpsim.trace import GeneratorModel, generate


def main(length=300_000):
    model = GeneratorModel(num_blocks=10_000, dead_fraction=0.36, hot_fraction=0.1,
                           hot_weight=0.5, seed=6)
    profile = miss_based_reuse(generate(model, length), RunConfig.defaults().to_sim_config())
    by_block = dead_breakdown(profile, per_block=True)
    by_visit = dead_breakdown(profile)
    print(f"{len(profile)} data accesses, {profile.misses} L1D misses")
    print(f"dead blocks: {by_block.dead_fraction:.3f} of {by_block.population}")
    print(f"dead visits: {by_visit.dead_fraction:.3f} of {by_visit.population}")
    print("\nreuse distance (misses)   visits")
    for label, n in distance_histogram(profile):
        print(f"{label:>24}   {n}")


if __name__ == "__main__":
    main()
