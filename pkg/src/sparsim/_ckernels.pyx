# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: all-pairs weighted similarity, Brandes edge betweenness
and the Girvan-Newman removal loop.

Signatures mirror ``_pykernels``; betweenness and the removal loop also
mirror its floating-point operation order.
"""
import numpy as np

from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc


cdef inline double _pair_total(const double[:, ::1] vals,
                               const unsigned char[:, ::1] obs,
                               Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t t, length = vals.shape[1]
    cdef long shared = 0, c_nan = 0, c_non
    cdef double dot = 0.0, na = 0.0, nb = 0.0, x = 0.0, y = 0.0
    cdef double core = 0.0, lo, hi, ax, ay, sa = 0.0, sb = 0.0, u, w
    for t in range(length):
        if obs[i, t] and obs[j, t]:
            x = vals[i, t]
            y = vals[j, t]
            if fabs(x) > sa:
                sa = fabs(x)
            if fabs(y) > sb:
                sb = fabs(y)
            shared += 1
        elif not obs[i, t] and not obs[j, t]:
            c_nan += 1
    c_non = length - shared - c_nan
    if shared == 1:
        ax = fabs(x)
        ay = fabs(y)
        lo = ax if ax < ay else ay
        hi = ay if ax < ay else ax
        if hi == 0.0:
            core = 1.0
        elif lo == 0.0:
            core = 0.0
        else:
            core = lo / hi
            # sign from the operands; x * y can underflow to 0
            if (x < 0.0) != (y < 0.0):
                core = -core
    elif shared > 1:
        if sa == 0.0 and sb == 0.0:
            core = 1.0
        elif sa == 0.0 or sb == 0.0:
            core = 0.0
        else:
            # scale to max magnitude 1 so the norms cannot under- or overflow
            for t in range(length):
                if obs[i, t] and obs[j, t]:
                    u = vals[i, t] / sa
                    w = vals[j, t] / sb
                    dot += u * w
                    na += u * u
                    nb += w * w
            core = dot / (sqrt(na) * sqrt(nb))
            if core > 1.0:
                core = 1.0
            elif core < -1.0:
                core = -1.0
    return (shared * core + c_nan - c_non) / length


def weighted_pairwise(values, observed):
    """All-pairs weighted similarity totals for the rows of a masked matrix."""
    cdef const double[:, ::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef const unsigned char[:, ::1] obs = np.ascontiguousarray(observed, dtype=np.uint8)
    cdef Py_ssize_t n = vals.shape[0], i, j
    out_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double v
    with nogil:
        for i in range(n):
            for j in range(i, n):
                v = _pair_total(vals, obs, i, j)
                out[i, j] = v
                out[j, i] = v
    return out_arr


cdef void _accumulate(int s, int n, const int* indptr, const int* indices,
                      const int* eids, double* bc, int* dist, double* sigma,
                      double* delta, int* order) noexcept nogil:
    cdef int v, w, p, head = 0, tail = 1, idx, dv, dw
    cdef double coeff, c
    for v in range(n):
        dist[v] = -1
        sigma[v] = 0.0
        delta[v] = 0.0
    dist[s] = 0
    sigma[s] = 1.0
    order[0] = s
    while head < tail:
        v = order[head]
        head += 1
        dv = dist[v] + 1
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if dist[w] < 0:
                dist[w] = dv
                order[tail] = w
                tail += 1
            if dist[w] == dv:
                sigma[w] += sigma[v]
    idx = tail - 1
    while idx > 0:
        w = order[idx]
        coeff = (1.0 + delta[w]) / sigma[w]
        dw = dist[w] - 1
        for p in range(indptr[w], indptr[w + 1]):
            v = indices[p]
            if dist[v] == dw:
                c = sigma[v] * coeff
                bc[eids[p]] += c
                delta[v] += c
        idx -= 1


cdef struct Work:
    int* dist
    double* sigma
    double* delta
    int* order


cdef int _alloc_work(Work* wk, int n) except -1:
    wk.dist = <int*> malloc(max(n, 1) * sizeof(int))
    wk.sigma = <double*> malloc(max(n, 1) * sizeof(double))
    wk.delta = <double*> malloc(max(n, 1) * sizeof(double))
    wk.order = <int*> malloc(max(n, 1) * sizeof(int))
    if not (wk.dist and wk.sigma and wk.delta and wk.order):
        _free_work(wk)
        raise MemoryError()
    return 0


cdef void _free_work(Work* wk) noexcept:
    free(wk.dist)
    free(wk.sigma)
    free(wk.delta)
    free(wk.order)
    wk.dist = NULL
    wk.sigma = NULL
    wk.delta = NULL
    wk.order = NULL


def edge_betweenness(int n, indptr, indices, eids, int m):
    """Brandes accumulation over ordered (source, target) pairs.

    Returns an array of length ``m``; callers halve it for the unordered
    convention.
    """
    cdef const int[::1] ip = np.ascontiguousarray(indptr, dtype=np.intc)
    cdef const int[::1] ix = np.ascontiguousarray(indices, dtype=np.intc)
    cdef const int[::1] ei = np.ascontiguousarray(eids, dtype=np.intc)
    bc_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] bc = bc_arr
    cdef Work wk
    cdef int s
    if n == 0 or ix.shape[0] == 0:
        return bc_arr
    _alloc_work(&wk, n)
    try:
        with nogil:
            for s in range(n):
                _accumulate(s, n, &ip[0], &ix[0], &ei[0], &bc[0],
                            wk.dist, wk.sigma, wk.delta, wk.order)
    finally:
        _free_work(&wk)
    return bc_arr


cdef int _build_csr(int n, const int* eid_of, const unsigned char* alive,
                    int* indptr, int* indices, int* eids) noexcept nogil:
    cdef int u, v, e, k = 0
    indptr[0] = 0
    for u in range(n):
        for v in range(n):
            e = eid_of[u * n + v]
            if e >= 0 and alive[e]:
                indices[k] = v
                eids[k] = e
                k += 1
        indptr[u + 1] = k
    return k


cdef int _count_components(int n, const int* indptr, const int* indices,
                           int* seen, int* queue) noexcept nogil:
    cdef int s, v, w, p, head, tail, count = 0
    for s in range(n):
        seen[s] = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = 1
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if not seen[w]:
                    seen[w] = 1
                    queue[tail] = w
                    tail += 1
    return count


cdef bint _connected(int n, int u, int target, const int* indptr,
                     const int* indices, int* seen, int* queue) noexcept nogil:
    cdef int v, w, p, head = 0, tail = 1
    for v in range(n):
        seen[v] = 0
    seen[u] = 1
    queue[0] = u
    while head < tail:
        v = queue[head]
        head += 1
        if v == target:
            return True
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if not seen[w]:
                seen[w] = 1
                queue[tail] = w
                tail += 1
    return False


def girvan_newman_removals(int n, edges, int target, double rel_tol):
    """Edge ids removed, in order, until at least ``target`` components exist.

    ``edges`` is an (m, 2) integer array whose row order is the tie-break
    order: among edges whose score is within ``rel_tol`` (relative) of the
    maximum, the lowest row index goes first.
    """
    edge_arr = np.ascontiguousarray(np.asarray(edges).reshape(-1, 2), dtype=np.intc)
    cdef const int[:, ::1] ed = edge_arr
    cdef int m = ed.shape[0]
    eid_arr = np.full(max(n, 1) * max(n, 1), -1, dtype=np.intc)
    cdef int[::1] eid_of = eid_arr
    alive_arr = np.ones(max(m, 1), dtype=np.uint8)
    cdef unsigned char[::1] alive = alive_arr
    cdef int[::1] indptr = np.zeros(n + 1, dtype=np.intc)
    cdef int[::1] indices = np.zeros(max(2 * m, 1), dtype=np.intc)
    cdef int[::1] eids = np.zeros(max(2 * m, 1), dtype=np.intc)
    cdef int[::1] seen = np.zeros(max(n, 1), dtype=np.intc)
    cdef int[::1] queue = np.zeros(max(n, 1), dtype=np.intc)
    bc_arr = np.zeros(max(m, 1), dtype=np.float64)
    cdef double[::1] bc = bc_arr
    removed_arr = np.full(max(m, 1), -1, dtype=np.int64)
    cdef long long[::1] removed = removed_arr
    cdef int n_removed = 0
    cdef int e, s, best, comps
    cdef double best_val, threshold
    cdef Work wk

    for e in range(m):
        eid_of[ed[e, 0] * n + ed[e, 1]] = e
        eid_of[ed[e, 1] * n + ed[e, 0]] = e
    if n == 0:
        return removed_arr[:0].copy()

    _alloc_work(&wk, n)
    try:
        with nogil:
            _build_csr(n, &eid_of[0], &alive[0], &indptr[0], &indices[0], &eids[0])
            comps = _count_components(n, &indptr[0], &indices[0], &seen[0], &queue[0])
            while comps < target and n_removed < m:
                for e in range(m):
                    bc[e] = 0.0
                for s in range(n):
                    _accumulate(s, n, &indptr[0], &indices[0], &eids[0], &bc[0],
                                wk.dist, wk.sigma, wk.delta, wk.order)
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
                alive[best] = 0
                removed[n_removed] = best
                n_removed += 1
                _build_csr(n, &eid_of[0], &alive[0], &indptr[0], &indices[0], &eids[0])
                if not _connected(n, ed[best, 0], ed[best, 1], &indptr[0],
                                  &indices[0], &seen[0], &queue[0]):
                    comps += 1
    finally:
        _free_work(&wk)
    return removed_arr[:n_removed].copy()
