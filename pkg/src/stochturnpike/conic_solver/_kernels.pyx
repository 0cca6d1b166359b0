# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ADMM cone step. Mirrors ``_fallback`` exactly."""
from libc.math cimport sqrt


cdef inline void _project(double* s, Py_ssize_t size) noexcept nogil:
    cdef Py_ssize_t i
    cdef double t = s[0], nrm = 0.0, scale
    for i in range(1, size):
        nrm += s[i] * s[i]
    nrm = sqrt(nrm)
    if nrm <= t:
        return
    if nrm <= -t:
        for i in range(size):
            s[i] = 0.0
        return
    scale = 0.5 * (t + nrm)
    s[0] = scale
    scale /= nrm
    for i in range(1, size):
        s[i] *= scale


def soc_project_blocks(double[::1] s, const Py_ssize_t[::1] starts, const Py_ssize_t[::1] sizes):
    """Project every block ``s[starts[i]:starts[i]+sizes[i]]`` onto the SOC, in place."""
    cdef Py_ssize_t k
    if starts.shape[0] != sizes.shape[0]:
        raise ValueError("starts and sizes differ in length")
    with nogil:
        for k in range(starts.shape[0]):
            _project(&s[starts[k]], sizes[k])


def cone_update(const double[::1] vt, double[::1] v, double[::1] y,
                const double[::1] b, const double[::1] rho, double alpha,
                Py_ssize_t m_eq, const Py_ssize_t[::1] starts,
                const Py_ssize_t[::1] sizes, double[::1] work):
    """Relaxed projection onto ``b - K`` and dual update; updates ``v`` and ``y``."""
    cdef Py_ssize_t i, k, m = v.shape[0]
    cdef double w
    if starts.shape[0] != sizes.shape[0]:
        raise ValueError("starts and sizes differ in length")
    with nogil:
        for i in range(m):
            w = alpha * vt[i] + (1.0 - alpha) * v[i]
            work[i] = w
            if i >= m_eq:
                v[i] = b[i] - (w + y[i] / rho[i])
        for k in range(starts.shape[0]):
            _project(&v[starts[k]], sizes[k])
        for i in range(m):
            if i < m_eq:
                v[i] = b[i]
            else:
                v[i] = b[i] - v[i]
            y[i] += rho[i] * (work[i] - v[i])
