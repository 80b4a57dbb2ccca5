"""Straight-line model of one CBP-managed L1 set, for conformance tests only.

Deliberately shares no code with cbpsim: plain lists, one function per
event, everything recomputed from scratch.
"""


class RefSet:
    def __init__(self, ways):
        self.ways = ways
        self.block = [None] * ways
        self.rd = [0] * ways
        self.hits = [0] * ways
        self.pref = [False] * ways
        self.dirty = [False] * ways
        self.touch = [0] * ways
        self.RD = 0
        self.RDsum = 0
        self.RDcounter = 0
        self.t = 0
        self.l2_dirty = set()  # blocks whose dirty copy sits in L2
        self.last_victim = None  # (way, priority, copied)

    def find(self, block):
        for w in range(self.ways):
            if self.block[w] == block:
                return w
        return None

    def priority(self, w):
        p = 0
        if self.pref[w]:
            p = p + 1
        if self.hits[w] <= 1:
            p = p + 1
        if 2 * self.RD <= self.rd[w] and self.rd[w] <= 3 * self.RD:
            p = p + 4
        elif self.rd[w] > 3 * self.RD:
            p = p + 8
        return p

    def priorities(self):
        return [self.priority(w) if self.block[w] is not None else None for w in range(self.ways)]

    def _fill(self, block, dirty, pref):
        self.last_victim = None
        free = [w for w in range(self.ways) if self.block[w] is None]
        if free:
            w = free[0]
        else:
            prios = [self.priority(v) for v in range(self.ways)]
            top = max(prios)
            cands = [v for v in range(self.ways) if prios[v] == top]
            oldest = min(self.touch[v] for v in cands)
            w = min(v for v in cands if self.touch[v] == oldest)
            copied = self.dirty[w] or prios[w] < 9
            if self.dirty[w]:
                self.l2_dirty.add(self.block[w])
            self.last_victim = (w, prios[w], copied)
            for v in range(self.ways):
                self.hits[v] = 0
        self.t = self.t + 1
        self.block[w] = block
        self.rd[w] = 0
        self.hits[w] = 0
        self.pref[w] = pref
        self.dirty[w] = dirty
        self.touch[w] = self.t

    def demand(self, block, write):
        w = self.find(block)
        if w is not None:
            self.RDsum = self.RDsum + self.rd[w]
            self.rd[w] = 0
            self.RDcounter = self.RDcounter + 1
            if self.RDcounter == 8:
                self.RD = self.RDsum // 8
                self.RDsum = 0
                self.RDcounter = 0
            self.hits[w] = min(self.hits[w] + 1, 3)
            self.t = self.t + 1
            self.touch[w] = self.t
            if write:
                self.dirty[w] = True
            self.pref[w] = False
            self.last_victim = None
            return True
        for v in range(self.ways):
            if self.block[v] is not None:
                self.rd[v] = min(self.rd[v] + 1, 15)
        was_dirty_below = block in self.l2_dirty
        self.l2_dirty.discard(block)
        self._fill(block, write or was_dirty_below, False)
        return False

    def prefetch(self, block):
        if self.find(block) is not None or block in self.l2_dirty:
            self.last_victim = None
            return False
        self._fill(block, False, True)
        return True
