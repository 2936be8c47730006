"""Compiled Hopcroft-Karp.

Left vertex ``u`` is adjacent to ``indices[starts[u]:ends[u]]``; passing
per-row ends lets callers restrict a distance-sorted edge list to a prefix of
every row without rebuilding it.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def hopcroft_karp_csr(starts, ends, indices, n_right):
    n = len(starts)
    match_l = np.full(n, -1, np.int64)
    match_r = np.full(n_right, -1, np.int64)
    inf = n + n_right + 1

    for u in range(n):
        for e in range(starts[u], ends[u]):
            v = indices[e]
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                break

    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    it = np.empty(n, np.int64)
    stack = np.empty(n + 1, np.int64)
    while True:
        head = 0
        tail = 0
        for u in range(n):
            if match_l[u] == -1:
                dist[u] = 0
                queue[tail] = u
                tail += 1
            else:
                dist[u] = inf
        found = False
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(starts[u], ends[u]):
                w = match_r[indices[e]]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        if not found:
            break

        for u in range(n):
            it[u] = starts[u]
        for root in range(n):
            if match_l[root] != -1:
                continue
            sp = 0
            stack[0] = root
            while sp >= 0:
                u = stack[sp]
                pushed = False
                done = False
                while it[u] < ends[u]:
                    v = indices[it[u]]
                    w = match_r[v]
                    if w == -1:
                        # flip the alternating path held on the stack
                        for k in range(sp, -1, -1):
                            a = stack[k]
                            b = indices[it[a]]
                            match_l[a] = b
                            match_r[b] = a
                        done = True
                        break
                    if dist[w] == dist[u] + 1:
                        sp += 1
                        stack[sp] = w
                        pushed = True
                        break
                    it[u] += 1
                if done:
                    break
                if not pushed:
                    dist[u] = inf
                    sp -= 1
                    if sp >= 0:
                        it[stack[sp]] += 1
    return match_l
