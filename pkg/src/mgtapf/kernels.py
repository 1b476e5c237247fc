"""Hot numeric kernels.

Every kernel exists twice: a scalar-loop version compiled with numba and a
vectorised numpy version.  Both return identical results; the public name is
bound to one of them at import time (see :mod:`mgtapf._accel`).
"""
import numpy as np

from ._accel import USE_NUMBA, njit

UNREACHABLE = -1


# --------------------------------------------------------------------------
# breadth-first distances on a 4-connected grid

@njit
def _grid_bfs_numba(free, height, width, source):
    n = height * width
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        cell = queue[head]
        head += 1
        r = cell // width
        c = cell - r * width
        d = dist[cell] + 1
        if r > 0:
            nxt = cell - width
            if free[nxt] and dist[nxt] < 0:
                dist[nxt] = d
                queue[tail] = nxt
                tail += 1
        if r < height - 1:
            nxt = cell + width
            if free[nxt] and dist[nxt] < 0:
                dist[nxt] = d
                queue[tail] = nxt
                tail += 1
        if c > 0:
            nxt = cell - 1
            if free[nxt] and dist[nxt] < 0:
                dist[nxt] = d
                queue[tail] = nxt
                tail += 1
        if c < width - 1:
            nxt = cell + 1
            if free[nxt] and dist[nxt] < 0:
                dist[nxt] = d
                queue[tail] = nxt
                tail += 1
    return dist


def _grid_bfs_numpy(free, height, width, source):
    free2 = free.reshape(height, width)
    dist = np.full((height, width), -1, dtype=np.int64)
    frontier = np.zeros((height, width), dtype=bool)
    frontier.flat[source] = True
    dist.flat[source] = 0
    d = 0
    while frontier.any():
        d += 1
        grown = np.zeros_like(frontier)
        grown[1:, :] |= frontier[:-1, :]
        grown[:-1, :] |= frontier[1:, :]
        grown[:, 1:] |= frontier[:, :-1]
        grown[:, :-1] |= frontier[:, 1:]
        frontier = grown & free2 & (dist < 0)
        dist[frontier] = d
    return dist.ravel()


def grid_bfs(free, height, width, source):
    """Unit-cost distances from ``source`` (flat index) to every cell; -1 if unreachable."""
    free = np.ascontiguousarray(free, dtype=np.bool_).ravel()
    if USE_NUMBA:
        return _grid_bfs_numba(free, int(height), int(width), int(source))
    return _grid_bfs_numpy(free, int(height), int(width), int(source))


# --------------------------------------------------------------------------
# Hungarian method with potentials, O(n^3)

@njit
def _hungarian_numba(cost):
    n = cost.shape[0]
    inf = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf)
        used = np.zeros(n + 1, dtype=np.bool_)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    row_to_col = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, u[1:].copy(), v[1:].copy()


def _hungarian_numpy(cost):
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[p[1:] - 1] = np.arange(n)
    return row_to_col, u[1:].copy(), v[1:].copy()


def hungarian(cost):
    """Minimum-cost perfect matching of a square, finite cost matrix.

    Returns ``(row_to_col, u, v)`` where ``u``/``v`` are optimal duals with
    ``cost[i, j] - u[i] - v[j] >= 0`` everywhere and ``== 0`` on the matching.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    if cost.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0), np.empty(0)
    if USE_NUMBA:
        return _hungarian_numba(cost)
    return _hungarian_numpy(cost)


# --------------------------------------------------------------------------
# pairwise collision scan over padded position arrays
#
# rows of the result: (t, i, j, kind, u, v) with kind 0 = vertex, 1 = edge,
# i < j, and for edges u -> v being agent i's move between t and t + 1.

@njit
def _scan_collisions_numba(pos):
    m, length = pos.shape
    count = 0
    for t in range(length):
        for i in range(m):
            for j in range(i + 1, m):
                if pos[i, t] == pos[j, t]:
                    count += 1
                if t + 1 < length:
                    if (pos[i, t] != pos[i, t + 1] and pos[i, t] == pos[j, t + 1]
                            and pos[i, t + 1] == pos[j, t]):
                        count += 1
    out = np.empty((count, 6), dtype=np.int64)
    k = 0
    for t in range(length):
        for i in range(m):
            for j in range(i + 1, m):
                if pos[i, t] == pos[j, t]:
                    out[k, 0] = t
                    out[k, 1] = i
                    out[k, 2] = j
                    out[k, 3] = 0
                    out[k, 4] = pos[i, t]
                    out[k, 5] = -1
                    k += 1
                if t + 1 < length:
                    if (pos[i, t] != pos[i, t + 1] and pos[i, t] == pos[j, t + 1]
                            and pos[i, t + 1] == pos[j, t]):
                        out[k, 0] = t
                        out[k, 1] = i
                        out[k, 2] = j
                        out[k, 3] = 1
                        out[k, 4] = pos[i, t]
                        out[k, 5] = pos[i, t + 1]
                        k += 1
    return out


def _scan_collisions_numpy(pos):
    m, length = pos.shape
    upper = np.triu(np.ones((m, m), dtype=bool), k=1)
    same = (pos[:, None, :] == pos[None, :, :]) & upper[:, :, None]
    vi, vj, vt = np.nonzero(same)
    rows = [np.column_stack([vt, vi, vj, np.zeros_like(vt), pos[vi, vt], np.full_like(vt, -1)])]
    if length > 1:
        cur, nxt = pos[:, :-1], pos[:, 1:]
        swap = ((cur[:, None, :] == nxt[None, :, :]) & (nxt[:, None, :] == cur[None, :, :])
                & (cur != nxt)[:, None, :] & upper[:, :, None])
        ei, ej, et = np.nonzero(swap)
        rows.append(np.column_stack([et, ei, ej, np.ones_like(et), cur[ei, et], nxt[ei, et]]))
    out = np.concatenate(rows).astype(np.int64).reshape(-1, 6)
    order = np.lexsort((out[:, 3], out[:, 2], out[:, 1], out[:, 0]))
    return out[order]


def scan_collisions(pos):
    """All vertex and edge collisions of padded position rows ``pos[agent, t]``."""
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    if pos.shape[0] < 2 or pos.shape[1] == 0:
        return np.empty((0, 6), dtype=np.int64)
    if USE_NUMBA:
        return _scan_collisions_numba(pos)
    return _scan_collisions_numpy(pos)
