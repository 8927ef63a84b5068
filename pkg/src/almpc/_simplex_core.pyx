# cython: language_level=3
"""Compiled simplex kernel; same contract as ``almpc._simplex_py``."""

cdef enum:
    OPTIMAL = 0
    UNBOUNDED = 1
    ITERATION_LIMIT = 2

cdef double RATIO_TIE = 1e-12


cdef void _pivot(double[:, ::1] T, long long[::1] basis, Py_ssize_t row,
                 Py_ssize_t col) noexcept nogil:
    cdef Py_ssize_t nr = T.shape[0], nc = T.shape[1], r, k
    cdef double p = T[row, col], f
    for k in range(nc):
        T[row, k] /= p
    for r in range(nr):
        if r == row:
            continue
        f = T[r, col]
        if f != 0.0:
            for k in range(nc):
                T[r, k] -= f * T[row, k]
    basis[row] = col


cdef int _run(double[:, ::1] T, long long[::1] basis, Py_ssize_t n_enter,
              double tol, Py_ssize_t max_iter, Py_ssize_t* iters) noexcept nogil:
    cdef Py_ssize_t m = T.shape[0] - 1, rhs = T.shape[1] - 1
    cdef Py_ssize_t col, row, i, j
    cdef double best, ratio, a
    while True:
        col = -1
        for j in range(n_enter):
            if T[m, j] < -tol:
                col = j
                break
        if col < 0:
            return OPTIMAL
        row = -1
        best = 0.0
        for i in range(m):
            a = T[i, col]
            if a > tol:
                ratio = T[i, rhs] / a
                if row < 0 or ratio < best:
                    row = i
                    best = ratio
        if row < 0:
            return UNBOUNDED
        for i in range(m):
            a = T[i, col]
            if a > tol and T[i, rhs] / a <= best + RATIO_TIE \
                    and basis[i] < basis[row]:
                row = i
        _pivot(T, basis, row, col)
        iters[0] += 1
        if iters[0] >= max_iter:
            return ITERATION_LIMIT


def pivot(double[:, ::1] T, long long[::1] basis, Py_ssize_t row, Py_ssize_t col):
    _pivot(T, basis, row, col)


def run_simplex(double[:, ::1] T, long long[::1] basis, Py_ssize_t n_enter,
                double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t iters = 0
    cdef int status
    with nogil:
        status = _run(T, basis, n_enter, tol, max_iter, &iters)
    return status, iters
