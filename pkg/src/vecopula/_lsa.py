"""Compiled kernels for the dense linear assignment problem.

Two phases: an epsilon-scaling forward auction produces near-optimal column
prices, then a shortest augmenting path pass (Dijkstra on reduced costs)
re-solves the problem exactly from those prices.  Only the second phase
determines the result; the auction just shortens the augmenting paths.
"""

import numpy as np
from numba import njit

_SCALING_FACTOR = 6.0


@njit(cache=True, nogil=True)
def auction_prices(cost, eps_final):
    n = cost.shape[0]
    prices = np.zeros(n)
    if n == 1:
        return prices
    span = cost.max() - cost.min()
    eps = max(span / 4.0, eps_final)
    owner = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    while True:
        owner[:] = -1
        for k in range(n):
            stack[k] = n - 1 - k
        top = n
        while top > 0:
            top -= 1
            i = stack[top]
            best = -1
            b1 = np.inf
            b2 = np.inf
            for j in range(n):
                val = cost[i, j] + prices[j]
                if val < b1:
                    b2 = b1
                    b1 = val
                    best = j
                elif val < b2:
                    b2 = val
            prices[best] += (b2 - b1) + eps
            prev = owner[best]
            owner[best] = i
            if prev >= 0:
                stack[top] = prev
                top += 1
        if eps <= eps_final:
            break
        eps = max(eps / _SCALING_FACTOR, eps_final)
    return prices


@njit(cache=True, nogil=True)
def shortest_augmenting_path(cost, col_potential):
    """Exact min-cost perfect matching from any starting column potentials.

    Returns (col4row, row_potential, col_potential) with reduced costs
    cost[i, j] - u[i] - v[j] >= 0 everywhere and == 0 on matched pairs.
    """
    n = cost.shape[0]
    v = col_potential.copy()
    u = np.empty(n)
    col4row = np.full(n, -1, np.int64)
    row4col = np.full(n, -1, np.int64)
    for i in range(n):
        best = 0
        bval = np.inf
        for j in range(n):
            val = cost[i, j] - v[j]
            if val < bval:
                bval = val
                best = j
        u[i] = bval
        if row4col[best] < 0:
            row4col[best] = i
            col4row[i] = best

    dist = np.empty(n)
    pred = np.empty(n, np.int64)
    done = np.zeros(n, np.bool_)
    scanned = np.empty(n, np.int64)
    for cur in range(n):
        if col4row[cur] >= 0:
            continue
        dist[:] = np.inf
        done[:] = False
        nscan = 0
        i = cur
        base = 0.0
        sink = -1
        while sink < 0:
            ui = u[i]
            for j in range(n):
                if not done[j]:
                    r = base + cost[i, j] - ui - v[j]
                    if r < dist[j]:
                        dist[j] = r
                        pred[j] = i
            jmin = -1
            dmin = np.inf
            for j in range(n):
                if not done[j] and dist[j] < dmin:
                    dmin = dist[j]
                    jmin = j
            done[jmin] = True
            scanned[nscan] = jmin
            nscan += 1
            base = dmin
            if row4col[jmin] < 0:
                sink = jmin
            else:
                i = row4col[jmin]
        u[cur] += base
        for k in range(nscan):
            j = scanned[k]
            delta = base - dist[j]
            v[j] -= delta
            r = row4col[j]
            if r >= 0:
                u[r] += delta
        j = sink
        while True:
            i = pred[j]
            row4col[j] = i
            nxt = col4row[i]
            col4row[i] = j
            j = nxt
            if i == cur:
                break
    return col4row, u, v
