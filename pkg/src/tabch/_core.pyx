# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled contraction engine.

Mirrors ``tabch.contraction`` step for step (list order, heap sift rules,
tie rules), so both engines produce byte-identical results.  Parallel phases
run under OpenMP; each thread owns one queue and one scratch area.
"""

from cython.operator cimport dereference as deref
from cython.parallel cimport prange, threadid
from libc.stdint cimport int32_t, int64_t, uint8_t, uint16_t, uint32_t, uint64_t
from libc.stdlib cimport calloc, free, malloc, qsort, realloc
from libc.string cimport memset
from libcpp.vector cimport vector

import numpy as np

cdef enum:
    FWD = 1
    BWD = 2
    SHORTCUT = 4
    CAPACITY = 32768
    SLOT_MASK = 32767
    STORE_ARRAY = 0
    STORE_HASH = 1
    TB_BIAS = 0
    TB_XOR = 1

cdef uint32_t SETTLED = 0xFFFFFFFFu
cdef uint32_t STAMP_MAX = 0xFFFFFFFFu
cdef int64_t INF = (<int64_t>1) << 62


class CoreStorageFull(RuntimeError):
    pass


class CoreNoProgress(RuntimeError):
    pass


cdef struct Edge:
    uint32_t target
    uint32_t flags
    int64_t weight
    int32_t middle
    uint32_t originals

cdef struct Cell:
    uint32_t key
    uint32_t value
    uint32_t stamp

cdef struct Arc:
    uint32_t u
    uint32_t w
    int64_t weight
    uint32_t originals

cdef struct Half:
    uint32_t node
    int64_t weight
    uint32_t originals

cdef struct Triple:
    uint32_t a
    uint32_t b
    int64_t weight

cdef struct SortItem:
    int64_t prio
    uint64_t key
    uint32_t node


# ------------------------------------------------------------------ queue

cdef struct Queue:
    uint32_t* nodes
    int64_t* dists
    size_t size
    size_t cap
    int kind
    const uint16_t* t0
    const uint16_t* t1
    Cell* cells
    uint32_t stamp
    uint32_t live
    uint32_t* dvals
    uint32_t* dstamps
    uint32_t n
    int full


cdef int queue_init(Queue* q, int kind, uint32_t n, const uint16_t* t0, const uint16_t* t1) noexcept nogil:
    memset(q, 0, sizeof(Queue))
    q.kind = kind
    q.t0 = t0
    q.t1 = t1
    q.n = n
    q.stamp = 1
    q.cap = 64
    q.nodes = <uint32_t*>malloc(q.cap * sizeof(uint32_t))
    q.dists = <int64_t*>malloc(q.cap * sizeof(int64_t))
    if q.nodes == NULL or q.dists == NULL:
        return -1
    if kind == STORE_HASH:
        q.cells = <Cell*>calloc(CAPACITY, sizeof(Cell))
        if q.cells == NULL:
            return -1
    else:
        q.dvals = <uint32_t*>calloc(n if n > 0 else 1, sizeof(uint32_t))
        q.dstamps = <uint32_t*>calloc(n if n > 0 else 1, sizeof(uint32_t))
        if q.dvals == NULL or q.dstamps == NULL:
            return -1
    return 0


cdef void queue_free(Queue* q) noexcept nogil:
    free(q.nodes)
    free(q.dists)
    free(q.cells)
    free(q.dvals)
    free(q.dstamps)
    q.nodes = NULL
    q.dists = NULL
    q.cells = NULL
    q.dvals = NULL
    q.dstamps = NULL


cdef inline uint32_t slot_of(Queue* q, uint32_t key) noexcept nogil:
    return (q.t1[key >> 16] ^ q.t0[key & 0xFFFF]) & SLOT_MASK


cdef inline bint store_get(Queue* q, uint32_t key, uint32_t* out) noexcept nogil:
    cdef uint32_t slot, i
    cdef Cell* cell
    if q.kind == STORE_ARRAY:
        if q.dstamps[key] != q.stamp:
            return False
        out[0] = q.dvals[key]
        return True
    slot = slot_of(q, key)
    for i in range(CAPACITY):
        cell = &q.cells[slot]
        if cell.stamp != q.stamp:
            return False
        if cell.key == key:
            out[0] = cell.value
            return True
        slot = (slot + 1) & SLOT_MASK
    return False


cdef inline void store_put(Queue* q, uint32_t key, uint32_t value) noexcept nogil:
    cdef uint32_t slot, i
    cdef Cell* cell
    if q.kind == STORE_ARRAY:
        if q.dstamps[key] != q.stamp:
            q.dstamps[key] = q.stamp
            q.live += 1
        q.dvals[key] = value
        return
    slot = slot_of(q, key)
    for i in range(CAPACITY):
        cell = &q.cells[slot]
        if cell.stamp != q.stamp:
            cell.key = key
            cell.value = value
            cell.stamp = q.stamp
            q.live += 1
            return
        if cell.key == key:
            cell.value = value
            return
        slot = (slot + 1) & SLOT_MASK
    q.full = 1


cdef void store_clear(Queue* q) noexcept nogil:
    cdef size_t i
    if q.stamp == STAMP_MAX:
        if q.kind == STORE_ARRAY:
            for i in range(q.n):
                q.dstamps[i] = 0
        else:
            for i in range(CAPACITY):
                q.cells[i].stamp = 0
        q.stamp = 1
    else:
        q.stamp += 1
    q.live = 0


cdef inline void heap_reset(Queue* q) noexcept nogil:
    q.size = 0
    store_clear(q)


cdef inline void sift_up(Queue* q, size_t pos, uint32_t node, int64_t dist) noexcept nogil:
    cdef size_t parent
    while pos > 0:
        parent = (pos - 1) >> 1
        if q.dists[parent] <= dist:
            break
        q.nodes[pos] = q.nodes[parent]
        q.dists[pos] = q.dists[parent]
        store_put(q, q.nodes[pos], <uint32_t>pos)
        pos = parent
    q.nodes[pos] = node
    q.dists[pos] = dist
    store_put(q, node, <uint32_t>pos)


cdef inline void sift_down(Queue* q, size_t pos, uint32_t node, int64_t dist) noexcept nogil:
    cdef size_t child
    cdef size_t size = q.size
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and q.dists[child + 1] < q.dists[child]:
            child += 1
        if q.dists[child] >= dist:
            break
        q.nodes[pos] = q.nodes[child]
        q.dists[pos] = q.dists[child]
        store_put(q, q.nodes[pos], <uint32_t>pos)
        pos = child
    q.nodes[pos] = node
    q.dists[pos] = dist
    store_put(q, node, <uint32_t>pos)


cdef inline void push_or_decrease(Queue* q, uint32_t node, int64_t dist) noexcept nogil:
    cdef uint32_t slot
    if store_get(q, node, &slot):
        if slot == SETTLED or q.dists[slot] <= dist:
            return
        sift_up(q, slot, node, dist)
        return
    if q.size == q.cap:
        q.cap *= 2
        q.nodes = <uint32_t*>realloc(q.nodes, q.cap * sizeof(uint32_t))
        q.dists = <int64_t*>realloc(q.dists, q.cap * sizeof(int64_t))
    slot = <uint32_t>q.size
    q.nodes[slot] = node
    q.dists[slot] = dist
    q.size += 1
    store_put(q, node, slot)
    sift_up(q, slot, node, dist)


cdef inline bint pop_min(Queue* q, uint32_t* node, int64_t* dist) noexcept nogil:
    cdef uint32_t last_node
    cdef int64_t last_dist
    if q.size == 0:
        return False
    node[0] = q.nodes[0]
    dist[0] = q.dists[0]
    q.size -= 1
    last_node = q.nodes[q.size]
    last_dist = q.dists[q.size]
    store_put(q, node[0], SETTLED)
    if q.size > 0:
        sift_down(q, 0, last_node, last_dist)
    return True


# ---------------------------------------------------------------- scratch

cdef struct Scratch:
    Half* ins
    Half* outs
    uint32_t* sorted_targets
    int64_t* tdist
    size_t cap
    Triple* triples
    size_t tcap


cdef int scratch_reserve(Scratch* s, size_t deg) noexcept nogil:
    cdef size_t cap
    if deg <= s.cap:
        return 0
    cap = s.cap * 2 if s.cap * 2 > deg else deg
    s.ins = <Half*>realloc(s.ins, cap * sizeof(Half))
    s.outs = <Half*>realloc(s.outs, cap * sizeof(Half))
    s.sorted_targets = <uint32_t*>realloc(s.sorted_targets, cap * sizeof(uint32_t))
    s.tdist = <int64_t*>realloc(s.tdist, cap * sizeof(int64_t))
    s.cap = cap
    if s.ins == NULL or s.outs == NULL or s.sorted_targets == NULL or s.tdist == NULL:
        return -1
    return 0


cdef void scratch_free(Scratch* s) noexcept nogil:
    free(s.ins)
    free(s.outs)
    free(s.sorted_targets)
    free(s.tdist)
    free(s.triples)


cdef int cmp_u32(const void* a, const void* b) noexcept nogil:
    cdef uint32_t x = (<const uint32_t*>a)[0]
    cdef uint32_t y = (<const uint32_t*>b)[0]
    return (x > y) - (x < y)


cdef int cmp_triple(const void* a, const void* b) noexcept nogil:
    cdef const Triple* x = <const Triple*>a
    cdef const Triple* y = <const Triple*>b
    if x.a != y.a:
        return 1 if x.a > y.a else -1
    if x.b != y.b:
        return 1 if x.b > y.b else -1
    if x.weight != y.weight:
        return 1 if x.weight > y.weight else -1
    return 0


cdef int cmp_item(const void* a, const void* b) noexcept nogil:
    cdef const SortItem* x = <const SortItem*>a
    cdef const SortItem* y = <const SortItem*>b
    if x.prio != y.prio:
        return 1 if x.prio > y.prio else -1
    if x.key != y.key:
        return 1 if x.key > y.key else -1
    return 0


cdef inline Py_ssize_t find_sorted(const uint32_t* arr, size_t n, uint32_t x) noexcept nogil:
    cdef size_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo < n and arr[lo] == x:
        return <Py_ssize_t>lo
    return -1


# ----------------------------------------------------------------- engine

cdef struct Ctx:
    vector[vector[Edge]]* adj
    uint8_t* contracted
    int64_t* prio
    int64_t* deleted
    const uint32_t* bias
    const uint16_t* t0
    const uint16_t* t1
    int tb_kind
    int64_t c_ed
    int64_t c_del
    int64_t c_orig


cdef inline uint64_t tb_key(Ctx* c, uint32_t v) noexcept nogil:
    if c.tb_kind == TB_BIAS:
        return c.bias[v]
    return ((<uint64_t>(c.t1[v >> 16] ^ c.t0[v & 0xFFFF])) << 32) | v


cdef inline bint smaller(Ctx* c, uint32_t v, uint32_t u) noexcept nogil:
    if c.prio[v] != c.prio[u]:
        return c.prio[v] < c.prio[u]
    return tb_key(c, v) < tb_key(c, u)


cdef bint is_local_min(Ctx* c, uint32_t v) noexcept nogil:
    cdef vector[Edge]* lv = &deref(c.adj)[v]
    cdef vector[Edge]* lx
    cdef size_t i, j
    cdef uint32_t x, y
    for i in range(lv.size()):
        x = deref(lv)[i].target
        if not smaller(c, v, x):
            return False
        lx = &deref(c.adj)[x]
        for j in range(lx.size()):
            y = deref(lx)[j].target
            if y != v and not smaller(c, v, y):
                return False
    return True


cdef void witness_search(Ctx* c, Queue* q, uint32_t source, uint32_t excluded,
                         const uint32_t* targets, size_t nt, int64_t* tdist,
                         int64_t upper, int limit) noexcept nogil:
    # ``targets`` is sorted; a match on ``source`` itself is ignored
    cdef size_t i, left = 0
    cdef Py_ssize_t idx
    cdef uint32_t node, t
    cdef int64_t d
    cdef int settled = 0
    cdef vector[Edge]* lst
    cdef Edge* e
    for i in range(nt):
        tdist[i] = INF
        if targets[i] != source:
            left += 1
    if left == 0:
        return
    heap_reset(q)
    push_or_decrease(q, source, 0)
    while q.size > 0:
        pop_min(q, &node, &d)
        if q.full:
            return
        if d > upper:
            break
        settled += 1
        if node != source:
            idx = find_sorted(targets, nt, node)
            if idx >= 0:
                tdist[idx] = d
                left -= 1
                if left == 0:
                    break
        if settled >= limit:
            break
        lst = &deref(c.adj)[node]
        for i in range(lst.size()):
            e = &deref(lst)[i]
            if e.flags & FWD:
                t = e.target
                if t != excluded and not c.contracted[t]:
                    push_or_decrease(q, t, d + e.weight)


cdef int collect_arcs(Ctx* c, Queue* q, Scratch* s, uint32_t v, int limit,
                      vector[Arc]* out) except -1 nogil:
    cdef vector[Edge]* lst = &deref(c.adj)[v]
    cdef size_t deg = lst.size()
    cdef size_t i, j, nin = 0, nout = 0
    cdef Edge* e
    cdef Half u
    cdef Half w
    cdef int64_t upper
    cdef bint any_target
    cdef Py_ssize_t idx
    cdef Arc arc
    if scratch_reserve(s, deg) != 0:
        q.full = 2
        return 0
    for i in range(deg):
        e = &deref(lst)[i]
        if e.flags & BWD:
            s.ins[nin].node = e.target
            s.ins[nin].weight = e.weight
            s.ins[nin].originals = e.originals
            nin += 1
        if e.flags & FWD:
            s.outs[nout].node = e.target
            s.outs[nout].weight = e.weight
            s.outs[nout].originals = e.originals
            s.sorted_targets[nout] = e.target
            nout += 1
    qsort(s.sorted_targets, nout, sizeof(uint32_t), cmp_u32)
    for i in range(nin):
        u = s.ins[i]
        upper = -1
        any_target = False
        for j in range(nout):
            if s.outs[j].node != u.node:
                any_target = True
                if s.outs[j].weight > upper:
                    upper = s.outs[j].weight
        if not any_target:
            continue
        upper += u.weight
        witness_search(c, q, u.node, v, s.sorted_targets, nout, s.tdist, upper, limit)
        if q.full:
            return 0
        for j in range(nout):
            w = s.outs[j]
            if w.node == u.node:
                continue
            idx = find_sorted(s.sorted_targets, nout, w.node)
            if s.tdist[idx] > u.weight + w.weight:
                arc.u = u.node
                arc.w = w.node
                arc.weight = u.weight + w.weight
                arc.originals = u.originals + w.originals
                out.push_back(arc)
    return 0


cdef int64_t simulate(Ctx* c, Queue* q, Scratch* s, uint32_t v, int limit,
                      vector[Arc]* arcs) except? -1 nogil:
    cdef size_t i, k, groups = 0
    cdef vector[Edge]* lst
    cdef int64_t originals = 0
    cdef int64_t ed
    arcs.clear()
    collect_arcs(c, q, s, v, limit, arcs)
    k = arcs.size()
    if k > s.tcap:
        s.tcap = k
        s.triples = <Triple*>realloc(s.triples, k * sizeof(Triple))
        if s.triples == NULL:
            q.full = 2
            return 0
    for i in range(k):
        if deref(arcs)[i].u < deref(arcs)[i].w:
            s.triples[i].a = deref(arcs)[i].u
            s.triples[i].b = deref(arcs)[i].w
        else:
            s.triples[i].a = deref(arcs)[i].w
            s.triples[i].b = deref(arcs)[i].u
        s.triples[i].weight = deref(arcs)[i].weight
    if k > 0:
        qsort(s.triples, k, sizeof(Triple), cmp_triple)
        groups = 1
        for i in range(1, k):
            if cmp_triple(&s.triples[i], &s.triples[i - 1]) != 0:
                groups += 1
    lst = &deref(c.adj)[v]
    for i in range(lst.size()):
        if deref(lst)[i].flags & SHORTCUT:
            originals += deref(lst)[i].originals
    ed = <int64_t>groups - <int64_t>lst.size()
    return c.c_ed * ed + c.c_del * c.deleted[v] + c.c_orig * originals


cdef bint place(vector[Edge]* lst, uint32_t target, int64_t weight, int32_t middle,
                uint32_t originals, uint32_t flag) except? -1:
    cdef uint32_t other = flag ^ (FWD | BWD)
    cdef size_t i
    cdef Edge* e
    cdef Edge fresh
    for i in range(lst.size()):
        e = &deref(lst)[i]
        if e.target == target and e.flags & flag:
            if e.weight <= weight:
                return False
            if e.flags & other:
                e.flags &= ~flag
                break
            e.weight = weight
            e.flags = flag | SHORTCUT
            e.middle = middle
            e.originals = originals
            return True
    for i in range(lst.size()):
        e = &deref(lst)[i]
        if (e.target == target and e.flags & SHORTCUT and not (e.flags & flag)
                and e.weight == weight and e.middle == middle and e.originals == originals):
            e.flags |= flag
            return True
    fresh.target = target
    fresh.weight = weight
    fresh.flags = flag | SHORTCUT
    fresh.middle = middle
    fresh.originals = originals
    lst.push_back(fresh)
    return True


cdef void unlink(vector[Edge]* lst, uint32_t v):
    cdef size_t i, k = 0
    for i in range(lst.size()):
        if deref(lst)[i].target != v:
            if k != i:
                deref(lst)[k] = deref(lst)[i]
            k += 1
    lst.resize(k)


def preprocess(uint32_t n,
               const int64_t[::1] offsets, const int64_t[::1] targets,
               const int64_t[::1] weights, const int64_t[::1] flags,
               int tb_kind, const uint32_t[::1] bias,
               const uint16_t[::1] t0, const uint16_t[::1] t1,
               int store_kind, int threads, int sim_limit, int contract_limit,
               int64_t c_ed, int64_t c_del, int64_t c_orig):
    """Run the full contraction; returns
    ``(rank, level, sc_u, sc_w, sc_weight, sc_middle, iterations)``."""
    cdef vector[vector[Edge]] adj
    cdef Edge edge
    cdef size_t i, j, k, nr, nm
    cdef int t, tid
    cdef uint32_t v, x
    cdef int64_t idx
    cdef Ctx ctx
    cdef Queue* queues = NULL
    cdef Scratch* scratch = NULL
    cdef vector[vector[Arc]] tmp
    cdef vector[vector[Arc]] out
    cdef vector[uint32_t] remaining
    cdef vector[uint32_t] members
    cdef vector[uint32_t] dirty
    cdef vector[uint32_t] nbrs
    cdef vector[Edge]* lv
    cdef SortItem* items = NULL
    cdef Arc* arc
    cdef bint fresh_u, fresh_w
    cdef int iteration = 0
    cdef uint32_t next_rank = 0

    if threads < 1:
        raise ValueError("threads must be >= 1")
    if tb_kind == TB_BIAS and bias.shape[0] < n:
        raise ValueError("bias array shorter than node count")

    prio_arr = np.zeros(n, dtype=np.int64)
    deleted_arr = np.zeros(n, dtype=np.int64)
    contracted_arr = np.zeros(n, dtype=np.uint8)
    selected_arr = np.zeros(n, dtype=np.uint8)
    rank_arr = np.zeros(n, dtype=np.uint32)
    level_arr = np.zeros(n, dtype=np.uint32)
    cdef int64_t[::1] prio = prio_arr
    cdef int64_t[::1] deleted = deleted_arr
    cdef uint8_t[::1] contracted = contracted_arr
    cdef uint8_t[::1] selected = selected_arr
    cdef uint32_t[::1] rank = rank_arr
    cdef uint32_t[::1] level = level_arr
    cdef vector[uint32_t] sc_u, sc_w
    cdef vector[int64_t] sc_weight
    cdef vector[int32_t] sc_mid

    adj.resize(n)
    for v in range(n):
        for j in range(<size_t>offsets[v], <size_t>offsets[v + 1]):
            edge.target = <uint32_t>targets[j]
            edge.weight = weights[j]
            edge.flags = <uint32_t>flags[j]
            edge.middle = -1
            edge.originals = 1
            adj[v].push_back(edge)

    ctx.adj = &adj
    ctx.contracted = &contracted[0] if n > 0 else NULL
    ctx.prio = &prio[0] if n > 0 else NULL
    ctx.deleted = &deleted[0] if n > 0 else NULL
    ctx.bias = &bias[0]
    ctx.t0 = &t0[0]
    ctx.t1 = &t1[0]
    ctx.tb_kind = tb_kind
    ctx.c_ed = c_ed
    ctx.c_del = c_del
    ctx.c_orig = c_orig

    queues = <Queue*>calloc(threads, sizeof(Queue))
    scratch = <Scratch*>calloc(threads, sizeof(Scratch))
    if queues == NULL or scratch == NULL:
        free(queues)
        free(scratch)
        raise MemoryError()
    tmp.resize(threads)
    try:
        for t in range(threads):
            if queue_init(&queues[t], store_kind, n, ctx.t0, ctx.t1) != 0:
                raise MemoryError()

        for i in prange(n, nogil=True, num_threads=threads, schedule="dynamic", chunksize=16):
            tid = threadid()
            prio[i] = simulate(&ctx, &queues[tid], &scratch[tid], <uint32_t>i, sim_limit, &tmp[tid])
        _check_queues(queues, threads)

        for v in range(n):
            remaining.push_back(v)

        while remaining.size() > 0:
            nr = remaining.size()
            for i in prange(nr, nogil=True, num_threads=threads, schedule="static"):
                selected[i] = is_local_min(&ctx, remaining[i])
            members.clear()
            for i in range(nr):
                if selected[i]:
                    members.push_back(remaining[i])
            nm = members.size()
            if nm == 0:
                raise CoreNoProgress(
                    f"inconsistent tie-breaker: no node selected among {nr} remaining")

            items = <SortItem*>realloc(items, nm * sizeof(SortItem))
            for i in range(nm):
                items[i].node = members[i]
                items[i].prio = prio[members[i]]
                items[i].key = tb_key(&ctx, members[i])
            qsort(items, nm, sizeof(SortItem), cmp_item)
            for i in range(nm):
                v = items[i].node
                members[i] = v
                rank[v] = next_rank
                level[v] = iteration
                next_rank += 1
                contracted[v] = 1

            out.resize(nm)
            for i in range(nm):
                out[i].clear()
            for i in prange(nm, nogil=True, num_threads=threads, schedule="dynamic", chunksize=1):
                tid = threadid()
                collect_arcs(&ctx, &queues[tid], &scratch[tid], members[i], contract_limit, &out[i])
            _check_queues(queues, threads)

            dirty.clear()
            for i in range(nm):
                v = members[i]
                lv = &adj[v]
                nbrs.clear()
                for j in range(lv.size()):
                    x = deref(lv)[j].target
                    fresh_u = True
                    for k in range(nbrs.size()):
                        if nbrs[k] == x:
                            fresh_u = False
                            break
                    if fresh_u:
                        nbrs.push_back(x)
                for k in range(nbrs.size()):
                    x = nbrs[k]
                    unlink(&adj[x], v)
                    deleted[x] += 1
                    dirty.push_back(x)
                for j in range(out[i].size()):
                    arc = &out[i][j]
                    fresh_u = place(&adj[arc.u], arc.w, arc.weight, <int32_t>v, arc.originals, FWD)
                    fresh_w = place(&adj[arc.w], arc.u, arc.weight, <int32_t>v, arc.originals, BWD)
                    if fresh_u != fresh_w:
                        raise AssertionError("overlay lists out of sync")
                    if fresh_u:
                        sc_u.push_back(arc.u)
                        sc_w.push_back(arc.w)
                        sc_weight.push_back(arc.weight)
                        sc_mid.push_back(<int32_t>v)
                vector[Edge]().swap(adj[v])

            nm = dirty.size()
            for i in prange(nm, nogil=True, num_threads=threads, schedule="dynamic", chunksize=4):
                tid = threadid()
                prio[dirty[i]] = simulate(&ctx, &queues[tid], &scratch[tid], dirty[i], sim_limit, &tmp[tid])
            _check_queues(queues, threads)

            k = 0
            for i in range(remaining.size()):
                if not contracted[remaining[i]]:
                    remaining[k] = remaining[i]
                    k += 1
            remaining.resize(k)
            iteration += 1
    finally:
        for t in range(threads):
            queue_free(&queues[t])
            scratch_free(&scratch[t])
        free(queues)
        free(scratch)
        free(items)

    k = sc_u.size()
    su = np.empty(k, dtype=np.uint32)
    sw = np.empty(k, dtype=np.uint32)
    sweight = np.empty(k, dtype=np.uint64)
    smid = np.empty(k, dtype=np.int32)
    cdef uint32_t[::1] su_v = su
    cdef uint32_t[::1] sw_v = sw
    cdef uint64_t[::1] swt_v = sweight
    cdef int32_t[::1] smid_v = smid
    for i in range(k):
        su_v[i] = sc_u[i]
        sw_v[i] = sc_w[i]
        swt_v[i] = <uint64_t>sc_weight[i]
        smid_v[i] = sc_mid[i]
    return rank_arr, level_arr, su, sw, sweight, smid, iteration


cdef _check_queues(Queue* queues, int threads):
    cdef int t
    for t in range(threads):
        if queues[t].full == 1:
            raise CoreStorageFull(f"hash storage full ({CAPACITY} live cells)")
        if queues[t].full:
            raise MemoryError()


# --------------------------------------------------- test-facing wrappers

def cell_size():
    return sizeof(Cell)


cdef class CoreHashStorage:
    """The engine's hash store, exposed for model-based tests."""

    cdef Queue q
    cdef object _t0, _t1
    cdef const uint16_t[::1] _v0
    cdef const uint16_t[::1] _v1

    def __cinit__(self, t0, t1):
        self._t0 = np.ascontiguousarray(t0, dtype=np.uint16)
        self._t1 = np.ascontiguousarray(t1, dtype=np.uint16)
        self._v0 = self._t0
        self._v1 = self._t1
        if queue_init(&self.q, STORE_HASH, 0, &self._v0[0], &self._v1[0]) != 0:
            raise MemoryError()

    def __dealloc__(self):
        queue_free(&self.q)

    def slot_of(self, uint32_t key):
        return slot_of(&self.q, key)

    def put(self, uint32_t key, uint32_t value):
        store_put(&self.q, key, value)
        if self.q.full:
            self.q.full = 0
            raise CoreStorageFull(f"hash storage full ({CAPACITY} live cells)")

    def get(self, uint32_t key):
        cdef uint32_t value
        if store_get(&self.q, key, &value):
            return value
        return None

    def clear(self):
        store_clear(&self.q)

    @property
    def live_count(self):
        return self.q.live

    @property
    def current_stamp(self):
        return self.q.stamp

    @current_stamp.setter
    def current_stamp(self, uint32_t value):
        self.q.stamp = value

    @property
    def nbytes(self):
        return CAPACITY * sizeof(Cell)

    def cells_bytes(self):
        return (<char*>self.q.cells)[:CAPACITY * sizeof(Cell)]


cdef class CoreMinHeap:
    """The engine's queue, exposed for equivalence tests against MinHeap."""

    cdef Queue q
    cdef object _t0, _t1
    cdef const uint16_t[::1] _v0
    cdef const uint16_t[::1] _v1

    def __cinit__(self, int kind, uint32_t n, t0, t1):
        self._t0 = np.ascontiguousarray(t0, dtype=np.uint16)
        self._t1 = np.ascontiguousarray(t1, dtype=np.uint16)
        self._v0 = self._t0
        self._v1 = self._t1
        if queue_init(&self.q, kind, n, &self._v0[0], &self._v1[0]) != 0:
            raise MemoryError()

    def __dealloc__(self):
        queue_free(&self.q)

    def __len__(self):
        return self.q.size

    def push_or_decrease(self, uint32_t node, int64_t dist):
        push_or_decrease(&self.q, node, dist)
        if self.q.full:
            self.q.full = 0
            raise CoreStorageFull(f"hash storage full ({CAPACITY} live cells)")

    def pop_min(self):
        cdef uint32_t node
        cdef int64_t dist
        if pop_min(&self.q, &node, &dist):
            return node, dist
        return None

    def reset(self):
        heap_reset(&self.q)
