# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Incremental row echelon form over Z/p (compiled kernel).

Rows are kept in echelon form with unit pivots, sorted by pivot column.  A
new row is cleared against the pivots in increasing column order using
128-bit accumulators, so only one modular reduction per entry is needed at
each pivot read and one per column at the end.  The reduced form is produced
on demand for :meth:`rows` and :meth:`nullspace`.  The prime must be below
2**31.
"""

from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"


cdef inline uint64_t _powmod(uint64_t a, uint64_t e, uint64_t p) nogil:
    cdef uint64_t r = 1
    a %= p
    while e:
        if e & 1:
            r = r * a % p
        a = a * a % p
        e >>= 1
    return r


cdef class ModEchelon:
    cdef readonly Py_ssize_t ncols
    cdef readonly uint64_t p
    cdef uint64_t* data      # row storage, insertion order
    cdef Py_ssize_t* piv     # pivot column of each stored row
    cdef Py_ssize_t* order   # stored-row indices sorted by pivot column
    cdef uint64_t* work
    cdef u128* acc
    cdef Py_ssize_t cap
    cdef Py_ssize_t nrows

    def __cinit__(self, Py_ssize_t ncols, uint64_t p):
        if p < 2 or p >= (<uint64_t>1 << 31):
            raise ValueError("modulus must be a prime below 2**31")
        cdef Py_ssize_t n1 = ncols if ncols > 0 else 1
        self.ncols = ncols
        self.p = p
        self.cap = 8
        self.nrows = 0
        self.data = <uint64_t*> malloc(self.cap * n1 * sizeof(uint64_t))
        self.piv = <Py_ssize_t*> malloc(self.cap * sizeof(Py_ssize_t))
        self.order = <Py_ssize_t*> malloc(self.cap * sizeof(Py_ssize_t))
        self.work = <uint64_t*> malloc(n1 * sizeof(uint64_t))
        self.acc = <u128*> malloc(n1 * sizeof(u128))
        if self.data == NULL or self.piv == NULL or self.order == NULL or self.work == NULL or self.acc == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.data)
        free(self.piv)
        free(self.order)
        free(self.work)
        free(self.acc)

    @property
    def rank(self):
        return self.nrows

    @property
    def pivots(self):
        return sorted(self.piv[i] for i in range(self.nrows))

    cdef void _grow(self) except *:
        cdef Py_ssize_t newcap = self.cap * 2
        cdef Py_ssize_t n1 = self.ncols if self.ncols > 0 else 1
        cdef uint64_t* d = <uint64_t*> realloc(self.data, newcap * n1 * sizeof(uint64_t))
        if d == NULL:
            raise MemoryError()
        self.data = d
        cdef Py_ssize_t* pv = <Py_ssize_t*> realloc(self.piv, newcap * sizeof(Py_ssize_t))
        if pv == NULL:
            raise MemoryError()
        self.piv = pv
        cdef Py_ssize_t* od = <Py_ssize_t*> realloc(self.order, newcap * sizeof(Py_ssize_t))
        if od == NULL:
            raise MemoryError()
        self.order = od
        self.cap = newcap

    cdef void _load(self, row) except *:
        cdef const int64_t[::1] mv
        cdef Py_ssize_t j
        cdef int64_t v
        cdef int64_t sp = <int64_t> self.p
        arr = np.asarray(row)
        if arr.dtype == object:
            arr = np.array([int(x) % self.p for x in arr], dtype=np.int64)
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        if arr.shape[0] != self.ncols:
            raise ValueError(f"row length {arr.shape[0]} != {self.ncols}")
        mv = arr
        for j in range(self.ncols):
            v = mv[j] % sp
            if v < 0:
                v += sp
            self.work[j] = <uint64_t> v

    cdef void _reduce_work(self) nogil:
        cdef Py_ssize_t k, i, j, c0
        cdef Py_ssize_t n = self.ncols
        cdef uint64_t p = self.p
        cdef uint64_t c, m
        cdef uint64_t* r
        cdef u128* a = self.acc
        cdef uint64_t* w = self.work
        if self.nrows == 0:
            return
        for j in range(n):
            a[j] = w[j]
        for k in range(self.nrows):
            i = self.order[k]
            c0 = self.piv[i]
            c = <uint64_t> (a[c0] % p)
            a[c0] = 0
            if c:
                m = p - c
                r = self.data + i * n
                for j in range(c0 + 1, n):
                    a[j] += <u128> (m * r[j])
        for j in range(n):
            w[j] = <uint64_t> (a[j] % p)

    cdef void _back_substitute(self, uint64_t* out) nogil:
        """Write the reduced echelon rows (sorted by pivot) into ``out``."""
        cdef Py_ssize_t k, k2, i, j, c0
        cdef Py_ssize_t n = self.ncols
        cdef uint64_t p = self.p
        cdef uint64_t e, m
        cdef uint64_t* dst
        cdef uint64_t* src
        for k in range(self.nrows):
            i = self.order[k]
            dst = out + k * n
            src = self.data + i * n
            for j in range(n):
                dst[j] = src[j]
        # clear entries above each pivot, working from the last pivot upward
        for k in range(self.nrows - 1, -1, -1):
            c0 = self.piv[self.order[k]]
            src = out + k * n
            for k2 in range(k):
                dst = out + k2 * n
                e = dst[c0]
                if e:
                    m = p - e
                    for j in range(c0, n):
                        dst[j] = (dst[j] + m * src[j]) % p

    def reduce(self, row):
        """Return ``row`` reduced against the echelon rows (pivots cleared)."""
        self._load(row)
        self._reduce_work()
        return [self.work[j] for j in range(self.ncols)]

    cpdef bint add_row(self, row) except -1:
        """Insert ``row``; True if it increased the rank."""
        cdef Py_ssize_t j, c = -1, n = self.ncols, pos, k
        cdef uint64_t inv, p = self.p
        cdef uint64_t* w = self.work
        cdef uint64_t* r
        self._load(row)
        self._reduce_work()
        for j in range(n):
            if w[j]:
                c = j
                break
        if c < 0:
            return False
        inv = _powmod(w[c], p - 2, p)
        if self.nrows == self.cap:
            self._grow()
        r = self.data + self.nrows * n
        for j in range(c):
            r[j] = 0
        for j in range(c, n):
            r[j] = w[j] * inv % p
        self.piv[self.nrows] = c
        pos = self.nrows
        while pos > 0 and self.piv[self.order[pos - 1]] > c:
            self.order[pos] = self.order[pos - 1]
            pos -= 1
        self.order[pos] = self.nrows
        self.nrows += 1
        return True

    def add_rows(self, rows):
        """Insert many rows; returns how many increased the rank."""
        cdef Py_ssize_t added = 0
        for row in rows:
            if self.nrows >= self.ncols:
                break
            if self.add_row(row):
                added += 1
        return added

    def rows(self):
        """Reduced echelon rows sorted by pivot column."""
        cdef Py_ssize_t k, j, n = self.ncols
        cdef uint64_t* out = <uint64_t*> malloc((self.nrows * n + 1) * sizeof(uint64_t))
        if out == NULL:
            raise MemoryError()
        try:
            self._back_substitute(out)
            return [[out[k * n + j] for j in range(n)] for k in range(self.nrows)]
        finally:
            free(out)

    def nullspace(self):
        """Basis of the right kernel, one vector per free column (ascending)."""
        cdef Py_ssize_t k, f, n = self.ncols
        cdef uint64_t p = self.p
        cdef uint64_t* out = <uint64_t*> malloc((self.nrows * n + 1) * sizeof(uint64_t))
        if out == NULL:
            raise MemoryError()
        try:
            self._back_substitute(out)
            pivs = [self.piv[self.order[k]] for k in range(self.nrows)]
            pivset = set(pivs)
            basis = []
            for f in range(n):
                if f in pivset:
                    continue
                v = [0] * n
                v[f] = 1
                for k in range(self.nrows):
                    v[pivs[k]] = (p - out[k * n + f]) % p
                basis.append(v)
            return basis
        finally:
            free(out)
