# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics are defined by ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy

cnp.import_array()

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

cdef u64 _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 _STREAM = 0xD1B54A32D192ED03ULL


cdef inline u64 _splitmix_out(u64 z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _mix(u64 seed, u64 index) noexcept nogil:
    return _splitmix_out((seed ^ (index * _STREAM)) + _GOLDEN)


cdef inline u64 _next(u64* state) noexcept nogil:
    state[0] = state[0] + _GOLDEN
    return _splitmix_out(state[0])


cdef inline double _uniform(u64* state) noexcept nogil:
    return <double>(_next(state) >> 11) * (1.0 / 9007199254740992.0)


def mix_seed(seed, index):
    return int(_mix(<u64>(seed & 0xFFFFFFFFFFFFFFFF), <u64>(index & 0xFFFFFFFFFFFFFFFF)))


cdef void _gains(const double[:, ::1] W, const double* x, double* g, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = W[i, i]
        for j in range(n):
            if j != i:
                acc = acc + W[i, j] * x[j]
        g[i] = (1.0 - 2.0 * x[i]) * acc


cdef double _seq_energy(const double[:, ::1] W, const double* x, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double e = 0.0
    cdef double w
    for i in range(n):
        for j in range(n):
            w = W[i, j] if j >= i else 0.0
            e = e + w * x[i] * x[j]
    return e


cdef inline double _flip(const double[:, ::1] W, double* x, double* g,
                         Py_ssize_t n, Py_ssize_t i) noexcept nogil:
    cdef double gi = g[i]
    cdef double d = 1.0 - 2.0 * x[i]
    cdef Py_ssize_t j
    for j in range(n):
        if j != i:
            g[j] = g[j] + W[i, j] * (1.0 - 2.0 * x[j]) * d
    g[i] = -gi
    x[i] = 1.0 - x[i]
    return gi


def flip_gains(W, x):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).copy()
    cdef Py_ssize_t n = Wv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] gv = out
    if n:
        _gains(Wv, &xv[0], &gv[0], n)
    return out


def sequential_energy(W, x):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).copy()
    if Wv.shape[0] == 0:
        return 0.0
    return _seq_energy(Wv, &xv[0], Wv.shape[0])


def tabu_search(W, x0, double energy0, Py_ssize_t tenure, Py_ssize_t n_rep, double tol,
                Py_ssize_t restart_period=0, double kick=0.5, seed=0):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef Py_ssize_t n = Wv.shape[0]
    xs = np.ascontiguousarray(x0, dtype=np.float64).copy()
    best = xs.copy()
    gs = np.zeros(n, dtype=np.float64)
    tabu = np.zeros(n, dtype=np.int64)
    cdef double[::1] x = xs
    cdef double[::1] bx = best
    cdef double[::1] g = gs
    cdef long long[::1] tabu_until = tabu
    cdef double E = energy0
    cdef double best_E = energy0
    cdef Py_ssize_t it = 0, stale = 0, since = 0, i, j, cap = 64, ntrace = 1
    cdef double bg
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef long long* t_it = <long long*>malloc(cap * sizeof(long long))
    cdef double* t_E = <double*>malloc(cap * sizeof(double))
    if t_it == NULL or t_E == NULL:
        free(t_it)
        free(t_E)
        raise MemoryError()
    t_it[0] = 0
    t_E[0] = E
    if n > 0:
        with nogil:
            _gains(Wv, &x[0], &g[0], n)
            while stale < n_rep:
                it += 1
                i = -1
                bg = INFINITY
                for j in range(n):
                    if tabu_until[j] < it or E + g[j] < best_E - tol:
                        if g[j] < bg:
                            bg = g[j]
                            i = j
                if i < 0:
                    bg = INFINITY
                    for j in range(n):
                        if g[j] < bg:
                            bg = g[j]
                            i = j
                E = E + _flip(Wv, &x[0], &g[0], n, i)
                tabu_until[i] = it + tenure
                if E < best_E - tol:
                    best_E = E
                    memcpy(&bx[0], &x[0], n * sizeof(double))
                    stale = 0
                    if ntrace == cap:
                        cap *= 2
                        t_it = <long long*>realloc(t_it, cap * sizeof(long long))
                        t_E = <double*>realloc(t_E, cap * sizeof(double))
                    t_it[ntrace] = it
                    t_E[ntrace] = E
                    ntrace += 1
                else:
                    stale += 1
                    since += 1
                    if restart_period > 0 and since >= restart_period and stale < n_rep:
                        # restart from the incumbent with each bit flipped w.p. kick
                        since = 0
                        for j in range(n):
                            x[j] = bx[j]
                            if _uniform(&state) < kick:
                                x[j] = 1.0 - x[j]
                            tabu_until[j] = 0
                        E = _seq_energy(Wv, &x[0], n)
                        _gains(Wv, &x[0], &g[0], n)
                if stale == 0:
                    since = 0
    trace_it = [t_it[j] for j in range(ntrace)]
    trace_E = [t_E[j] for j in range(ntrace)]
    free(t_it)
    free(t_E)
    return best.astype(np.int8), best_E, it, trace_it, trace_E


def exact_search(W, double tol):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef Py_ssize_t n = Wv.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int8)
    if n > 62:
        raise ValueError("enumeration limited to 62 variables")
    xs = np.zeros(n, dtype=np.float64)
    gs = np.empty(n, dtype=np.float64)
    cdef double[::1] x = xs
    cdef double[::1] g = gs
    cdef u64 total = (<u64>1) << n
    cdef u64 t, code = 0, best_code = 0
    cdef double E, e_min = 0.0
    cdef int b
    cdef int found = 0
    cdef Py_ssize_t k
    with nogil:
        # pass 1: global minimum along the Gray sequence
        for k in range(n):
            x[k] = 0.0
        _gains(Wv, &x[0], &g[0], n)
        E = 0.0
        e_min = 0.0
        for t in range(1, total):
            b = __builtin_ctzll(t)
            E = E + _flip(Wv, &x[0], &g[0], n, n - 1 - b)
            if E < e_min:
                e_min = E
        # pass 2: identical float sequence, smallest code within tolerance
        for k in range(n):
            x[k] = 0.0
        _gains(Wv, &x[0], &g[0], n)
        E = 0.0
        code = 0
        if E <= e_min + tol:
            best_code = 0
            found = 1
        for t in range(1, total):
            b = __builtin_ctzll(t)
            code = code ^ ((<u64>1) << b)
            E = E + _flip(Wv, &x[0], &g[0], n, n - 1 - b)
            if E <= e_min + tol and (not found or code < best_code):
                best_code = code
                found = 1
    out = np.empty(n, dtype=np.int8)
    for k in range(n):
        out[k] = (best_code >> (n - 1 - k)) & 1
    return out


cdef inline bint _lex_less(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(n):
        if a[k] != b[k]:
            return a[k] < b[k]
    return False


def anneal(W, betas, Py_ssize_t reads, seed, double tol):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(betas, dtype=np.float64)
    cdef Py_ssize_t n = Wv.shape[0], ns = bv.shape[0]
    cdef u64 s0 = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    xs = np.zeros(n, dtype=np.float64)
    gs = np.zeros(n, dtype=np.float64)
    best = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = xs
    cdef double[::1] g = gs
    cdef double[::1] bx = best
    cdef double E, d, beta, best_E = INFINITY
    cdef Py_ssize_t r, s, i
    cdef u64 state
    if n == 0:
        return np.zeros(0, dtype=np.int8)
    with nogil:
        for r in range(reads):
            state = _mix(s0, <u64>r)
            for i in range(n):
                x[i] = <double>(_next(&state) >> 63)
            _gains(Wv, &x[0], &g[0], n)
            E = _seq_energy(Wv, &x[0], n)
            for s in range(ns):
                beta = bv[s]
                for i in range(n):
                    d = g[i]
                    if d <= 0.0 or _uniform(&state) < exp(-beta * d):
                        E = E + _flip(Wv, &x[0], &g[0], n, i)
            if E < best_E - tol or (E <= best_E + tol and _lex_less(&x[0], &bx[0], n)):
                best_E = E
                memcpy(&bx[0], &x[0], n * sizeof(double))
    return best.astype(np.int8)


def jacobi(A, double tol, Py_ssize_t max_sweeps):
    a_arr = np.array(A, dtype=np.float64, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k, sweeps = 0
    cdef double norm = 0.0, off = 0.0, apq, theta, t, c, s, x1, x2
    with nogil:
        for p in range(n):
            for q in range(n):
                norm = norm + a[p, q] * a[p, q]
        norm = sqrt(norm)
        off = _offnorm(a, n)
        while off > tol * norm and sweeps < max_sweeps:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        x1 = a[k, p]
                        x2 = a[k, q]
                        a[k, p] = c * x1 - s * x2
                        a[k, q] = s * x1 + c * x2
                    for k in range(n):
                        x1 = a[p, k]
                        x2 = a[q, k]
                        a[p, k] = c * x1 - s * x2
                        a[q, k] = s * x1 + c * x2
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        x1 = v[k, p]
                        x2 = v[k, q]
                        v[k, p] = c * x1 - s * x2
                        v[k, q] = s * x1 + c * x2
            sweeps += 1
            off = _offnorm(a, n)
    return np.diag(a_arr).copy(), v_arr, sweeps, off


cdef double _offnorm(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t p, q
    cdef double acc = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            acc = acc + a[p, q] * a[p, q]
    return sqrt(2.0 * acc)
