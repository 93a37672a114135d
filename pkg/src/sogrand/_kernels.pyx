# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled query kernels. Semantics match ``sogrand._fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double LLR_CLIP = 40.0


cdef inline bint first_partition(int total, int parts, int n, int lo, int* out) noexcept nogil:
    cdef int m, x, prev = lo, remaining = total, tail_max, i = 0
    m = parts
    while m > 0:
        tail_max = (m - 1) * n - (m - 1) * (m - 2) // 2
        x = prev + 1
        if remaining - tail_max > x:
            x = remaining - tail_max
        if m == 1:
            if x != remaining or x > n:
                return False
        elif x * m + m * (m - 1) // 2 > remaining or x > n:
            return False
        out[i] = x
        i += 1
        prev = x
        remaining -= x
        m -= 1
    return True


cdef inline bint next_partition(int* a, int w, int n) noexcept nogil:
    cdef int i, v, suffix = a[w - 1]
    i = w - 2
    while i >= 0:
        suffix += a[i]
        v = a[i] + 1
        if first_partition(suffix - v, w - 1 - i, n, v, a + i + 1):
            a[i] = v
            return True
        i -= 1
    return False


cdef struct DecodeOut:
    int found
    int64_t queries
    double cum
    double parity_mass
    bint abandoned
    bint filtered


cdef void argsort_abs(const double* mag, int n, int* order) noexcept nogil:
    # stable insertion sort, n is small
    cdef int i, j, t
    for i in range(n):
        order[i] = i
    for i in range(1, n):
        t = order[i]
        j = i - 1
        while j >= 0 and mag[order[j]] > mag[t]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = t


cdef DecodeOut decode_core(const double* llr, int n, const uint64_t* hcols, bint even,
                           int target_l, int64_t budget, double threshold, int k,
                           bint parity_skip, uint8_t* words, double* probs,
                           int64_t* qs, double* mag, int* order, int* a,
                           uint8_t* y, double* ord_mag, uint64_t* ord_h) noexcept nogil:
    cdef DecodeOut res
    cdef int i, j, w, total, max_total, parity = -1
    cdef uint64_t s0 = 0, s
    cdef double base = 1.0, prod = 1.0, flip, e, p, phi, resid, psum = 0.0
    cdef double v
    cdef bint stop = False
    for i in range(n):
        v = llr[i]
        if v > LLR_CLIP:
            v = LLR_CLIP
        elif v < -LLR_CLIP:
            v = -LLR_CLIP
        mag[i] = fabs(v)
        y[i] = 1 if v < 0 else 0
        if y[i]:
            s0 ^= hcols[i]
        base *= 1.0 / (1.0 + exp(-mag[i]))
    argsort_abs(mag, n, order)
    for i in range(n):
        ord_mag[i] = mag[order[i]]
        ord_h[i] = hcols[order[i]]
    res.filtered = even and parity_skip
    if res.filtered:
        w = 0
        for i in range(n):
            w += y[i]
            flip = 1.0 / (1.0 + exp(mag[i]))
            prod *= 1.0 - 2.0 * flip
        parity = w % 2
        res.parity_mass = 0.5 * (1.0 + (prod if parity == 0 else -prod))
        phi = (2.0 ** k - 1.0) / (2.0 ** (n - 1) - 1.0)
    else:
        res.parity_mass = 1.0
        phi = (2.0 ** k - 1.0) / (2.0 ** n - 1.0)
    res.found = 0
    res.queries = 0
    res.cum = 0.0
    res.abandoned = False

    max_total = n * (n + 1) // 2
    total = 0
    while total <= max_total and not stop:
        w = 0
        while w * (w + 1) // 2 <= total and not stop:
            if (parity < 0 or w % 2 == parity) and total <= w * n - w * (w - 1) // 2:
                if w == 0 or first_partition(total, w, n, 0, a):
                    while True:
                        if res.queries >= budget:
                            res.abandoned = True
                            stop = True
                            break
                        res.queries += 1
                        s = s0
                        e = 0.0
                        for j in range(w):
                            s ^= ord_h[a[j] - 1]
                            e += ord_mag[a[j] - 1]
                        p = base * exp(-e)
                        res.cum += p
                        if s == 0:
                            for j in range(n):
                                words[res.found * n + j] = y[j]
                            for j in range(w):
                                words[res.found * n + order[a[j] - 1]] ^= 1
                            probs[res.found] = p
                            qs[res.found] = res.queries
                            res.found += 1
                            psum += p
                            if res.found >= target_l:
                                stop = True
                                break
                            if threshold > 0.0:
                                resid = res.parity_mass - res.cum
                                if resid < 0.0:
                                    resid = 0.0
                                resid *= phi
                                if resid / (psum + resid) < threshold:
                                    stop = True
                                    break
                        if w == 0 or not next_partition(a, w, n):
                            break
            w += 1
        total += 1
    return res


cdef void bitwise_core(const double* llr, int n, int k, DecodeOut* res,
                       const uint8_t* words, const double* probs, double* out) noexcept nogil:
    cdef int i, j
    cdef double phi, resid, denom = 0.0, pa, num, den, v, p1, pt
    for j in range(n):
        v = llr[j]
        if v > LLR_CLIP:
            v = LLR_CLIP
        elif v < -LLR_CLIP:
            v = -LLR_CLIP
        out[j] = v
    if res.found == 0:
        return
    if res.filtered:
        phi = (2.0 ** k - 1.0) / (2.0 ** (n - 1) - 1.0)
    else:
        phi = (2.0 ** k - 1.0) / (2.0 ** n - 1.0)
    resid = res.parity_mass - res.cum
    if resid < 0.0:
        resid = 0.0
    resid *= phi
    for i in range(res.found):
        denom += probs[i]
    denom += resid
    if denom <= 0.0:
        return
    pa = resid / denom
    pt = 0.0
    for i in range(res.found):
        pt += probs[i] / denom
    for j in range(n):
        p1 = 0.0
        for i in range(res.found):
            if words[i * n + j]:
                p1 += probs[i] / denom
        v = out[j]
        num = (pt - p1) + pa / (1.0 + exp(-v))
        den = p1 + pa / (1.0 + exp(v))
        if num <= 0.0:
            out[j] = -LLR_CLIP
        elif den <= 0.0:
            out[j] = LLR_CLIP
        else:
            out[j] = log(num) - log(den)


cdef class _Scratch:
    cdef int n, cap
    cdef double* mag
    cdef int* order
    cdef int* a
    cdef uint8_t* y
    cdef double* ord_mag
    cdef uint64_t* ord_h
    cdef uint8_t* words
    cdef double* probs
    cdef int64_t* qs

    def __cinit__(self, int n, int cap):
        self.n = n
        self.cap = cap
        self.mag = <double*>malloc(n * sizeof(double))
        self.order = <int*>malloc(n * sizeof(int))
        self.a = <int*>malloc((n + 1) * sizeof(int))
        self.y = <uint8_t*>malloc(n * sizeof(uint8_t))
        self.ord_mag = <double*>malloc(n * sizeof(double))
        self.ord_h = <uint64_t*>malloc(n * sizeof(uint64_t))
        self.words = <uint8_t*>malloc(cap * n * sizeof(uint8_t))
        self.probs = <double*>malloc(cap * sizeof(double))
        self.qs = <int64_t*>malloc(cap * sizeof(int64_t))
        if not (self.mag and self.order and self.a and self.y and self.ord_mag
                and self.ord_h and self.words and self.probs and self.qs):
            raise MemoryError()

    def __dealloc__(self):
        free(self.mag); free(self.order); free(self.a); free(self.y)
        free(self.ord_mag); free(self.ord_h); free(self.words)
        free(self.probs); free(self.qs)


def list_decode(llr, hcols, even, int target_l, budget, double threshold, int k,
                parity_skip=True):
    """See ``sogrand._fallback.list_decode``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] x = np.ascontiguousarray(llr, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1, mode="c"] h = np.ascontiguousarray(hcols, dtype=np.uint64)
    cdef int n = x.shape[0]
    cdef int64_t b = budget
    if target_l < 1:
        raise ValueError("target_l must be >= 1")
    cdef bint ev = even, ps = parity_skip
    cdef _Scratch sc = _Scratch(n, target_l)
    cdef DecodeOut res
    with nogil:
        res = decode_core(&x[0], n, &h[0], ev, target_l, b, threshold, k, ps,
                          sc.words, sc.probs, sc.qs, sc.mag, sc.order, sc.a, sc.y,
                          sc.ord_mag, sc.ord_h)
    words = [np.array([sc.words[i * n + j] for j in range(n)], dtype=np.uint8)
             for i in range(res.found)]
    qs = [int(sc.qs[i]) for i in range(res.found)]
    probs = [float(sc.probs[i]) for i in range(res.found)]
    return (words, qs, probs, res.cum, res.parity_mass, int(res.queries),
            bool(res.abandoned), bool(res.filtered))


def siso_rows(llr_rows, hcols, even, int k, int target_l, budget, double threshold,
              parity_skip=True):
    """See ``sogrand._fallback.siso_rows``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] x = np.ascontiguousarray(llr_rows, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1, mode="c"] h = np.ascontiguousarray(hcols, dtype=np.uint64)
    cdef int m = x.shape[0], n = x.shape[1], r
    cdef int64_t b = budget
    cdef bint ev = even, ps = parity_skip
    if target_l < 1:
        raise ValueError("target_l must be >= 1")
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] app = np.empty((m, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] queries = np.zeros(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] found = np.zeros(m, dtype=np.int64)
    cdef _Scratch sc = _Scratch(n, target_l)
    cdef DecodeOut res
    if m == 0:
        return app, queries, found
    with nogil:
        for r in range(m):
            res = decode_core(&x[r, 0], n, &h[0], ev, target_l, b, threshold, k, ps,
                              sc.words, sc.probs, sc.qs, sc.mag, sc.order, sc.a, sc.y,
                              sc.ord_mag, sc.ord_h)
            bitwise_core(&x[r, 0], n, k, &res, sc.words, sc.probs, &app[r, 0])
            queries[r] = res.queries
            found[r] = res.found
    return app, queries, found
