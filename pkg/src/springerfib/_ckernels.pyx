# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled modular kernels (row reduction and products over F_p, p < 2^31)."""

from libc.stdlib cimport malloc, free


cdef long long _inv_mod(long long a, long long p):
    cdef long long t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def rref_modp(rows, Py_ssize_t ncols, long long p):
    cdef Py_ssize_t nrows = len(rows)
    cdef Py_ssize_t i, j, c, r = 0, piv
    cdef long long f, inv, v
    cdef long long *a
    cdef long long *rowp
    cdef long long *pivp
    if nrows == 0 or ncols == 0:
        return [], []
    a = <long long *> malloc(nrows * ncols * sizeof(long long))
    if a == NULL:
        raise MemoryError()
    try:
        for i in range(nrows):
            row = rows[i]
            for j in range(ncols):
                v = row[j] % p
                a[i * ncols + j] = v
        pivots = []
        for c in range(ncols):
            if r == nrows:
                break
            piv = -1
            for i in range(r, nrows):
                if a[i * ncols + c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(ncols):
                    v = a[piv * ncols + j]
                    a[piv * ncols + j] = a[r * ncols + j]
                    a[r * ncols + j] = v
            pivp = a + r * ncols
            inv = _inv_mod(pivp[c], p)
            for j in range(c, ncols):
                pivp[j] = pivp[j] * inv % p
            for i in range(nrows):
                if i == r:
                    continue
                rowp = a + i * ncols
                f = rowp[c]
                if f == 0:
                    continue
                f = p - f
                for j in range(c, ncols):
                    if pivp[j] != 0:
                        rowp[j] = (rowp[j] + f * pivp[j]) % p
            pivots.append(c)
            r += 1
        out = [[a[i * ncols + j] for j in range(ncols)] for i in range(r)]
        return out, pivots
    finally:
        free(a)


def matmul_modp(a_rows, b_rows, Py_ssize_t ncols, long long p):
    cdef Py_ssize_t m = len(a_rows), l = len(b_rows), i, j, t
    cdef long long acc
    cdef long long *a
    cdef long long *b
    if m == 0:
        return []
    if l == 0 or ncols == 0:
        return [[0] * ncols for _ in range(m)]
    a = <long long *> malloc(m * l * sizeof(long long))
    b = <long long *> malloc(l * ncols * sizeof(long long))
    if a == NULL or b == NULL:
        free(a)
        free(b)
        raise MemoryError()
    try:
        for i in range(m):
            row = a_rows[i]
            for t in range(l):
                a[i * l + t] = row[t] % p
        for t in range(l):
            row = b_rows[t]
            for j in range(ncols):
                b[t * ncols + j] = row[j] % p
        out = []
        for i in range(m):
            res = [0] * ncols
            for j in range(ncols):
                acc = 0
                for t in range(l):
                    acc = (acc + a[i * l + t] * b[t * ncols + j]) % p
                res[j] = acc
            out.append(res)
        return out
    finally:
        free(a)
        free(b)
