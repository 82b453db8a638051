"""Compiled inner loops.

Everything here takes plain arrays and a ``numpy.random.Generator`` so the
Python layers stay thin.  Random tables are cumulative arrays whose last entry
is exactly 1.0; ``draw`` inverts them by sequential search.
"""
import math

import numpy as np
from numba import njit

NO_PARENT = -1


@njit(cache=True, nogil=True)
def draw(cdf, u):
    k = 0
    while u >= cdf[k]:
        k += 1
    return k


# ---------------------------------------------------------------- tree orders


@njit(cache=True, nogil=True)
def leaf_to_root_order(parent, root):
    """Reverse breadth-first order; every vertex precedes its parent."""
    n = parent.size
    nchild = np.zeros(n + 1, np.int64)
    for v in range(n):
        if parent[v] >= 0:
            nchild[parent[v] + 1] += 1
    for v in range(n):
        nchild[v + 1] += nchild[v]
    fill = nchild[:n].copy()
    kids = np.empty(max(n - 1, 0), np.int64)
    for v in range(n):
        p = parent[v]
        if p >= 0:
            kids[fill[p]] = v
            fill[p] += 1
    queue = np.empty(n, np.int64)
    queue[0] = root
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        for j in range(nchild[u], nchild[u + 1]):
            queue[tail] = kids[j]
            tail += 1
    out = np.empty(tail, np.int64)
    for i in range(tail):
        out[i] = queue[tail - 1 - i]
    return out


# ---------------------------------------------------------------- parking


@njit(cache=True, nogil=True)
def park_in_order(parent, order, counts, visits):
    """visits[v] = counts[v] + sum over children c of (visits[c] - 1)^+."""
    for i in range(order.size):
        visits[order[i]] = counts[order[i]]
    for i in range(order.size):
        v = order[i]
        p = parent[v]
        if p >= 0 and visits[v] > 1:
            visits[p] += visits[v] - 1
    return visits[order[order.size - 1]]


@njit(cache=True, nogil=True)
def drive_cars(parent, root, starts, occupied, visits):
    """Car-by-car rule: walk rootwards, park at the first free vertex.

    Returns the number of cars that drove past the root.
    """
    occupied[:] = False
    visits[:] = 0
    departed = 0
    for i in range(starts.size):
        v = starts[i]
        while True:
            visits[v] += 1
            if not occupied[v]:
                occupied[v] = True
                break
            if v == root:
                departed += 1
                break
            v = parent[v]
    return departed


@njit(cache=True, nogil=True)
def count_path_parking_functions(n, m):
    """Enumerate all n^m preference sequences on the path rooted at vertex 0."""
    parent = np.arange(-1, n - 1)
    occupied = np.zeros(n, np.bool_)
    visits = np.zeros(n, np.int64)
    seq = np.zeros(m, np.int64)
    good = 0
    total = 0
    while True:
        total += 1
        if drive_cars(parent, 0, seq, occupied, visits) == 0:
            good += 1
        j = m - 1
        while j >= 0 and seq[j] == n - 1:
            seq[j] = 0
            j -= 1
        if j < 0:
            break
        seq[j] += 1
    return good, total


# ---------------------------------------------------------------- samplers


@njit(cache=True, nogil=True)
def prufer_rooted_tree(rng, n, parent, order):
    """Uniform rooted labelled tree on n vertices.

    Decodes a uniform Pruefer sequence with vertex n-1 as provisional root
    (each removed leaf's neighbour is then its parent) and swaps the labels of
    n-1 and a uniform vertex r.  Fills ``parent`` and a leaf-to-root ``order``;
    returns the root.
    """
    if n == 1:
        parent[0] = NO_PARENT
        order[0] = 0
        return 0
    seq = np.empty(n - 2, np.int64)
    for i in range(n - 2):
        seq[i] = rng.integers(0, n)
    degree = np.ones(n, np.int64)
    for i in range(n - 2):
        degree[seq[i]] += 1
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(n - 2):
        v = seq[i]
        parent[leaf] = v
        order[i] = leaf
        degree[leaf] = 0
        degree[v] -= 1
        if v < ptr and degree[v] == 1:
            leaf = v
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    parent[leaf] = n - 1
    order[n - 2] = leaf
    parent[n - 1] = NO_PARENT
    order[n - 1] = n - 1
    r = rng.integers(0, n)
    if r != n - 1:
        # relabel by the transposition (r, n-1)
        pr, pl = parent[r], parent[n - 1]
        parent[r], parent[n - 1] = pl, pr
        for v in range(n):
            if parent[v] == r:
                parent[v] = n - 1
            elif parent[v] == n - 1:
                parent[v] = r
        for i in range(n):
            if order[i] == r:
                order[i] = n - 1
            elif order[i] == n - 1:
                order[i] = r
    return r


@njit(cache=True, nogil=True)
def gw_bfs(rng, cdf_off, max_vertices, max_depth, parent, start):
    """Breadth-first Galton-Watson generation into ``parent[start:]``.

    The root sits at ``start`` with ``parent[start] = NO_PARENT``.  Vertices at
    depth ``max_depth`` (if >= 0) get no children.  Returns (count, truncated):
    truncated means the population hit ``max_vertices`` before the tree closed.
    """
    parent[start] = NO_PARENT
    head = 0
    tail = 1
    gen_end = 1
    depth = 0
    while head < tail:
        if head == gen_end:
            depth += 1
            gen_end = tail
        if max_depth >= 0 and depth >= max_depth:
            break
        k = draw(cdf_off, rng.random())
        for _ in range(k):
            if tail >= max_vertices:
                return tail, True
            parent[start + tail] = start + head
            tail += 1
        head += 1
    return tail, False


@njit(cache=True, nogil=True)
def spine_tree(rng, spine_len, cdf_hat, cdf_off, bush_depth, max_vertices, parent, depth):
    """Spine 0..L-1 (root 0) with size-biased off-spine children carrying GW bushes.

    ``depth`` records distance from the spine (spine vertices have depth 0).
    Returns (count, truncated).
    """
    for i in range(spine_len):
        parent[i] = i - 1
        depth[i] = 0
    tail = spine_len
    for i in range(spine_len):
        if bush_depth == 0:
            break
        k = draw(cdf_hat, rng.random())
        for _ in range(k):
            if tail >= max_vertices:
                return tail, True
            parent[tail] = i
            depth[tail] = 1
            tail += 1
    head = spine_len
    while head < tail:
        if bush_depth < 0 or depth[head] < bush_depth:
            k = draw(cdf_off, rng.random())
            for _ in range(k):
                if tail >= max_vertices:
                    return tail, True
                parent[tail] = head
                depth[tail] = depth[head] + 1
                tail += 1
        head += 1
    return tail, False


# ---------------------------------------------------------------- trial loops


@njit(cache=True, nogil=True)
def bfs_root_visits(rng, cdf_arr, parent, count, visits):
    """Parking on a breadth-first tree stored in parent[:count] (root 0)."""
    for v in range(count):
        visits[v] = draw(cdf_arr, rng.random())
    for v in range(count - 1, 0, -1):
        if visits[v] > 1:
            visits[parent[v]] += visits[v] - 1
    return visits[0]


@njit(cache=True, nogil=True)
def gw_trials(rng, cdf_off, cdf_arr, max_vertices, chi, truncated):
    parent = np.empty(max_vertices, np.int64)
    visits = np.empty(max_vertices, np.int64)
    for t in range(chi.size):
        count, trunc = gw_bfs(rng, cdf_off, max_vertices, -1, parent, 0)
        truncated[t] = trunc
        chi[t] = bfs_root_visits(rng, cdf_arr, parent, count, visits)


@njit(cache=True, nogil=True)
def cayley_trials(rng, n, m, cdf_arr, chi):
    """Root visits on uniform rooted trees; m >= 0 places m uniform cars,
    m < 0 uses i.i.d. arrivals from ``cdf_arr``."""
    parent = np.empty(n, np.int64)
    order = np.empty(n, np.int64)
    counts = np.zeros(n, np.int64)
    visits = np.empty(n, np.int64)
    for t in range(chi.size):
        prufer_rooted_tree(rng, n, parent, order)
        counts[:] = 0
        if m >= 0:
            for _ in range(m):
                counts[rng.integers(0, n)] += 1
        else:
            for v in range(n):
                counts[v] = draw(cdf_arr, rng.random())
        chi[t] = park_in_order(parent, order, counts, visits)


@njit(cache=True, nogil=True)
def spine_trials(rng, spine_len, cdf_hat, cdf_off, cdf_arr, bush_depth, bush_cap,
                 success, truncated):
    """Parking along a spine prefix; success iff C_n >= 0 for all n <= L.

    Spine vertex k collects its own arrivals plus the overflow of each
    off-spine bush (depth-limited to ``bush_depth`` below the spine).
    ``truncated[t]`` counts bushes that hit ``bush_cap`` vertices.
    """
    parent = np.empty(bush_cap, np.int64)
    visits = np.empty(bush_cap, np.int64)
    for t in range(success.size):
        c = 0
        ok = True
        ntrunc = 0
        for k in range(spine_len):
            x = draw(cdf_arr, rng.random())
            if bush_depth != 0:
                nkids = draw(cdf_hat, rng.random())
                for _ in range(nkids):
                    count, trunc = gw_bfs(rng, cdf_off, bush_cap, bush_depth - 1, parent, 0)
                    ntrunc += trunc
                    y = bfs_root_visits(rng, cdf_arr, parent, count, visits)
                    if y > 1:
                        x += y - 1
            c += 1 - x
            if c < 0:
                ok = False
                break
        success[t] = ok
        truncated[t] = ntrunc


@njit(cache=True, nogil=True)
def walk(rng, cdf_x, horizon, stop_at_failure):
    """Skip-free walk C_n = n - sum X_k. Returns (first_failure or -1, min over n>=1)."""
    c = 0
    cmin = horizon + 1
    first = -1
    for n in range(1, horizon + 1):
        c += 1 - draw(cdf_x, rng.random())
        if c < cmin:
            cmin = c
        if c < 0 and first < 0:
            first = n
            if stop_at_failure:
                break
    return first, cmin


@njit(cache=True, nogil=True)
def walk_trials(rng, cdf_x, horizon, success):
    for t in range(success.size):
        first, _ = walk(rng, cdf_x, horizon, True)
        success[t] = first < 0


@njit(cache=True, nogil=True)
def binary_heap_trials(rng, depths, q, out, arrivals, values):
    """Root visits on complete binary trees, one shared arrival field per trial.

    Heap indexing (root 1, children 2i and 2i+1); a vertex gets 2 cars with
    probability q, filled by geometric skipping.  ``out[t, j]`` is the root
    count on the tree truncated at depth ``depths[j]``.
    """
    size = arrivals.size
    log1mq = math.log1p(-q)
    for t in range(out.shape[0]):
        arrivals[:] = 0
        pos = 0
        while True:
            u = 1.0 - rng.random()
            pos += 1 + int(math.floor(math.log(u) / log1mq))
            if pos >= size:
                break
            arrivals[pos] = 2
        for j in range(depths.size):
            d = depths[j]
            lo = 1 << d
            for i in range(lo, 2 * lo):
                values[i] = arrivals[i]
            for i in range(lo - 1, 0, -1):
                x = arrivals[i]
                a = values[2 * i]
                b = values[2 * i + 1]
                if a > 1:
                    x += a - 1
                if b > 1:
                    x += b - 1
                values[i] = x
            out[t, j] = values[1]


@njit(cache=True, nogil=True)
def enumerate_root_law(parent, order, values, probs, law):
    """Exact law of the root count over every arrival configuration."""
    n = parent.size
    s = values.size
    digits = np.zeros(n, np.int64)
    counts = np.empty(n, np.int64)
    visits = np.empty(n, np.int64)
    while True:
        w = 1.0
        for v in range(n):
            counts[v] = values[digits[v]]
            w *= probs[digits[v]]
        chi = park_in_order(parent, order, counts, visits)
        law[chi] += w
        j = n - 1
        while j >= 0 and digits[j] == s - 1:
            digits[j] = 0
            j -= 1
        if j < 0:
            break
        digits[j] += 1
