"""OPEN/FOCAL bookkeeping shared by the low- and high-level focal searches."""
import heapq
import itertools

# integer costs: absorbs float rounding in omega * bound
_EPS = 1e-9


class FocalQueue:
    """Entries carry a lower bound, a cost and a focal key.

    OPEN is ordered by lower bound.  FOCAL holds the open entries whose cost is
    at most ``omega`` times the smallest open lower bound and is ordered by
    the focal key.  Removal is lazy.
    """

    def __init__(self, omega: float):
        if omega < 1:
            raise ValueError("omega must be >= 1")
        self.omega = omega
        self._ids = itertools.count()
        self._entries = {}
        self._by_lb = []
        self._pending = []
        self._focal = []
        self._keys = {}
        self.last_bound = None

    def __len__(self):
        return len(self._entries)

    def push(self, item, lb, cost, key) -> int:
        eid = next(self._ids)
        self._entries[eid] = (item, lb, cost)
        heapq.heappush(self._by_lb, (lb, eid))
        heapq.heappush(self._pending, (cost, eid))
        self._keys[eid] = key
        return eid

    def discard(self, eid: int):
        self._entries.pop(eid, None)
        self._keys.pop(eid, None)

    def min_lb(self):
        heap = self._by_lb
        while heap and heap[0][1] not in self._entries:
            heapq.heappop(heap)
        return heap[0][0] if heap else None

    def pop(self):
        """Remove and return ``(item, lb, cost, bound_lb)`` of the best FOCAL entry."""
        lb_min = self.min_lb()
        if lb_min is None:
            raise IndexError("pop from empty FocalQueue")
        bound = self.omega * lb_min + _EPS
        entries = self._entries
        while self._pending and self._pending[0][0] <= bound:
            _, eid = heapq.heappop(self._pending)
            if eid in entries:
                heapq.heappush(self._focal, (self._keys[eid], eid))
        while self._focal:
            _, eid = heapq.heappop(self._focal)
            if eid not in entries:
                continue
            item, lb, cost = entries[eid]
            if cost > bound:
                heapq.heappush(self._pending, (cost, eid))
                continue
            self.discard(eid)
            self.last_bound = lb_min
            return item, lb, cost, lb_min
        # cost > omega * lb on every entry: fall back to the lower-bound minimum
        _, eid = self._by_lb[0]
        item, lb, cost = entries[eid]
        self.discard(eid)
        self.last_bound = lb_min
        return item, lb, cost, lb_min
