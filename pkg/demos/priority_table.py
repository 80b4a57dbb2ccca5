"""Print the CBP eviction priority for every line state.

Rows are (prefetched, hit count); columns are the line's reuse-distance
counter rd for a set whose running average RD is 3.  Priorities of 9 or 10
mark lines that are evicted first and, if clean, dropped without a copy-back.
"""

from cbpsim.policy import priority_of


def main(RD=3):
    print(f"RD = {RD}; '*' marks clean victims that are not copied back\n")
    print("pref hits | " + " ".join(f"{rd:>3}" for rd in range(16)))
    print("-" * 10 + "+" + "-" * 65)
    for pref in (False, True):
        for hits in range(4):
            cells = []
            for rd in range(16):
                p = priority_of(pref, hits, rd, RD)
                cells.append(f"{p:>2}{'*' if p >= 9 else ' '}")
            print(f"{int(pref):>4} {hits:>4} | " + " ".join(cells))


if __name__ == "__main__":
    main()
