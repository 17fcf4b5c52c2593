# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels.

Every routine evaluates the same expression tree, in the same order, as its
counterpart in ``_pykernels`` so both backends agree bit for bit.
"""

NAME = "cython"


def predprey(const double[::1] u, const double[::1] v, double a, double b, double c,
             double[::1] fu, double[::1] fv):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double au, h, vh
    with nogil:
        for i in range(n):
            au = a * u[i]
            h = au / (1.0 + au)
            vh = v[i] * h
            fu[i] = u[i] * (1.0 - u[i]) - vh
            fv[i] = b * vh - c * v[i]


def fisher(const double[::1] u, double r, double k, double[::1] out):
    cdef Py_ssize_t i, n = u.shape[0]
    with nogil:
        for i in range(n):
            out[i] = r * u[i] * (1.0 - u[i] / k)


def lincomb(const double[::1] e, const double[::1] x, const double[::1] w,
            const double[::1] f, double[::1] out):
    cdef Py_ssize_t i, n = x.shape[0]
    with nogil:
        for i in range(n):
            out[i] = e[i] * x[i] + w[i] * f[i]


def correct(const double[::1] base, const double[::1] q, const double[::1] f1,
            const double[::1] f0, double[::1] out):
    cdef Py_ssize_t i, n = base.shape[0]
    with nogil:
        for i in range(n):
            out[i] = base[i] + q[i] * (f1[i] - f0[i])
