"""Four fixed copy-back policies on one synthetic workload.

Every policy runs with LRU replacement on the default geometry (32KB L1s,
1MB STT-MRAM L2 with 10-cycle reads and 40-cycle writes).  The table shows
the trade-off: copying back more clean lines keeps more data on chip but
queues more slow writes on the single L2 port.

    python3 demos/copyback_policies.py [length]
"""

import sys

from cbpsim.config import RunConfig
from cbpsim.engine import compare
from cbpsim.trace import GeneratorModel, generate

POLICIES = ("all", "none", "icache", "dcache")
METRICS = ("ipc_proxy", "ipc_normalized", "l2_miss_rate", "copyback_count_l1i",
           "copyback_count_l1d", "l2_port_stall_cycles")


def main(length=200_000):
    model = GeneratorModel(num_blocks=20_000, hot_fraction=0.02, hot_weight=0.9,
                           dead_fraction=0.3, instr_ratio=0.1, seed=1)
    trace = generate(model, length)
    configs = []
    for policy in POLICIES:
        cfg = RunConfig.defaults()
        cfg["l1d.policy"] = "lru"
        cfg["copyback"] = policy
        configs.append((policy, cfg.to_sim_config()))
    table = dict(compare(trace, configs).table())

    print(f"{'metric':<24}" + "".join(f"{p:>12}" for p in POLICIES))
    for m in METRICS:
        cells = "".join(f"{v:>12.4f}" if isinstance(v, float) else f"{v:>12}" for v in table[m])
        print(f"{m:<24}{cells}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200_000)
