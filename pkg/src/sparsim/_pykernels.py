"""Pure-Python kernels, used when the compiled extension is unavailable.

Every kernel here has a twin in ``_ckernels.pyx`` with the same signature.
Betweenness and the Girvan-Newman loop also share the floating-point
operation order, so both backends produce identical scores and removal
sequences; pairwise similarities agree to within rounding.

Graphs are passed in CSR form over node indices ``0..n-1``: ``indptr`` and
``indices`` list each node's neighbours in ascending order, and ``eids``
maps every CSR slot to the id of the undirected edge it belongs to.
"""
from collections import deque

import numpy as np


def scalar_core(x, y):
    """Per-position score for a single shared position.

    ``sign(xy) * min(|x|, |y|) / max(|x|, |y|)``; two zeros agree (1), a
    single zero scores 0.
    """
    ax, ay = abs(x), abs(y)
    lo, hi = min(ax, ay), max(ax, ay)
    if hi == 0.0:
        return 1.0
    if lo == 0.0:
        return 0.0
    r = lo / hi
    # sign from the operands, not from x*y, which can underflow to 0
    return -r if (x < 0.0) != (y < 0.0) else r


def cosine_core(a, b):
    """Cosine of two shared sub-vectors, clipped to [-1, 1].

    Two zero sub-vectors agree (1), a single zero sub-vector scores 0.
    Each vector is divided by its largest magnitude first so that tiny or
    huge entries do not underflow or overflow the norms.
    """
    sa = float(np.max(np.abs(a)))
    sb = float(np.max(np.abs(b)))
    if sa == 0.0 and sb == 0.0:
        return 1.0
    if sa == 0.0 or sb == 0.0:
        return 0.0
    a = a / sa
    b = b / sb
    c = float(np.dot(a, b)) / (np.sqrt(float(np.dot(a, a))) * np.sqrt(float(np.dot(b, b))))
    return min(1.0, max(-1.0, c))


def weighted_pairwise(values, observed):
    """All-pairs weighted similarity totals for the rows of a masked matrix."""
    observed = np.asarray(observed, dtype=bool)
    obs = observed.astype(np.float64)
    raw = np.where(observed, values, 0.0)
    n, length = raw.shape
    miss = 1.0 - obs

    shared = obs @ obs.T
    c_nan = miss @ miss.T
    c_non = length - shared - c_nan

    # with one shared position, x[i, j] is row i's raw value there
    x = raw @ obs.T
    y = x.T
    ax, ay = np.abs(x), np.abs(y)
    lo, hi = np.minimum(ax, ay), np.maximum(ax, ay)
    with np.errstate(divide="ignore", invalid="ignore"):
        scalar = lo / hi
    scalar = np.where((x < 0.0) != (y < 0.0), -scalar, scalar)
    scalar = np.where(hi == 0.0, 1.0, np.where(lo == 0.0, 0.0, scalar))

    # cosine is unchanged by per-row scaling; scale rows to max magnitude 1
    row_max = np.abs(raw).max(axis=1, initial=0.0)
    vals = raw / np.where(row_max > 0.0, row_max, 1.0)[:, np.newaxis]
    dot = vals @ vals.T
    na = (vals * vals) @ obs.T  # row i's squared norm over positions shared with j
    nb = na.T
    nonzero = (raw != 0.0).astype(np.float64) @ obs.T
    zero_a = nonzero == 0.0
    zero_b = zero_a.T
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = dot / (np.sqrt(na) * np.sqrt(nb))
    cos = np.where(zero_a & zero_b, 1.0, np.where(zero_a | zero_b, 0.0, cos))

    core = np.zeros((n, n))
    one = shared == 1
    core[one] = scalar[one]
    many = shared > 1
    core[many] = np.clip(cos[many], -1.0, 1.0)

    # sub-vectors whose norm still underflowed after row scaling
    bad = many & ~(zero_a | zero_b) & ((na == 0.0) | (nb == 0.0) | ~np.isfinite(cos))
    for i, j in zip(*np.nonzero(bad)):
        both = observed[i] & observed[j]
        core[i, j] = cosine_core(raw[i, both], raw[j, both])

    return (shared * core + c_nan - c_non) / length


def edge_betweenness(n, indptr, indices, eids, m):
    """Brandes accumulation over ordered (source, target) pairs.

    Returns an array of length ``m``; callers halve it for the unordered
    convention.
    """
    indptr = [int(v) for v in indptr]
    indices = [int(v) for v in indices]
    eids = [int(v) for v in eids]
    bc = [0.0] * m
    for s in range(n):
        _accumulate(s, n, indptr, indices, eids, bc)
    return np.array(bc, dtype=np.float64)


def _accumulate(s, n, indptr, indices, eids, bc):
    dist = [-1] * n
    sigma = [0.0] * n
    delta = [0.0] * n
    dist[s] = 0
    sigma[s] = 1.0
    order = [s]
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        dv = dist[v] + 1
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if dist[w] < 0:
                dist[w] = dv
                order.append(w)
            if dist[w] == dv:
                sigma[w] += sigma[v]
    for idx in range(len(order) - 1, 0, -1):
        w = order[idx]
        coeff = (1.0 + delta[w]) / sigma[w]
        dw = dist[w] - 1
        for p in range(indptr[w], indptr[w + 1]):
            v = indices[p]
            if dist[v] == dw:
                c = sigma[v] * coeff
                bc[eids[p]] += c
                delta[v] += c


def _csr(n, edges, alive):
    """CSR arrays over the alive edges, neighbours in ascending order."""
    nbrs = [[] for _ in range(n)]
    for e, (u, v) in enumerate(edges):
        if alive[e]:
            nbrs[u].append((v, e))
            nbrs[v].append((u, e))
    indptr = [0]
    indices = []
    eids = []
    for u in range(n):
        for v, e in sorted(nbrs[u]):
            indices.append(v)
            eids.append(e)
        indptr.append(len(indices))
    return indptr, indices, eids


def _count_components(n, indptr, indices):
    seen = [False] * n
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    return count


def _connected(u, target, indptr, indices, n):
    seen = [False] * n
    seen[u] = True
    queue = deque([u])
    while queue:
        v = queue.popleft()
        if v == target:
            return True
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if not seen[w]:
                seen[w] = True
                queue.append(w)
    return False


def girvan_newman_removals(n, edges, target, rel_tol):
    """Edge ids removed, in order, until at least ``target`` components exist.

    ``edges`` is an (m, 2) integer array whose row order is the tie-break
    order: among edges whose score is within ``rel_tol`` (relative) of the
    maximum, the lowest row index goes first.
    """
    edges = [(int(u), int(v)) for u, v in np.asarray(edges).reshape(-1, 2)]
    m = len(edges)
    alive = [True] * m
    indptr, indices, eids = _csr(n, edges, alive)
    comps = _count_components(n, indptr, indices)
    removed = []
    while comps < target and len(removed) < m:
        bc = [0.0] * m
        for s in range(n):
            _accumulate(s, n, indptr, indices, eids, bc)
        best_val = -1.0
        for e in range(m):
            if alive[e] and bc[e] > best_val:
                best_val = bc[e]
        threshold = best_val - rel_tol * best_val
        best = -1
        for e in range(m):
            if alive[e] and bc[e] >= threshold:
                best = e
                break
        alive[best] = False
        removed.append(best)
        indptr, indices, eids = _csr(n, edges, alive)
        u, v = edges[best]
        if not _connected(u, v, indptr, indices, n):
            comps += 1
    return np.array(removed, dtype=np.int64)
