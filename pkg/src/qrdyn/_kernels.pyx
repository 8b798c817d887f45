# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit classification for power-type maps.

Scalar per-point loops over the same formulas as the numpy path
(automorphic.p2_embed / p2_embed_inverse and SchroederMap evaluation),
with the same saturation rule and the same class codes.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, exp, sin, cos, atan2, floor, fabs, hypot, isnan, M_PI, INFINITY

cnp.import_array()

DEF TO_ZERO = 0
DEF TO_INFINITY = 1
DEF BOUNDED = 2
DEF UNDECIDED = 3

cdef double HALF_PI = 0.5 * M_PI
cdef double TWO_PI = 2.0 * M_PI
cdef double HEIGHT_LIMIT = 700.0
# |y| within this of 1 is treated as on the unit sphere (height exactly 0)
cdef double SPHERE_SNAP = 4.0 * 2.220446049250313e-16


cdef inline double _mod(double a, double m) noexcept nogil:
    cdef double r = a - m * floor(a / m)
    if r >= m:
        r -= m
    if r < 0.0:
        r += m
    return r


cdef inline double _clip(double a, double lo, double hi) noexcept nogil:
    if a < lo:
        return lo
    if a > hi:
        return hi
    return a


cdef inline void _p2_fold(double *x1, double *x2) noexcept nogil:
    cdef double a = _mod(x1[0] + 1.0, 2.0) - 1.0
    cdef double b = _mod(x2[0], 2.0)
    cdef bint edge
    if b > 1.0:
        a = -a
        b = 2.0 - b
    edge = (b == 0.0) or (b == 1.0)
    if edge and a < 0.0:
        a = -a
    if a >= 1.0 and not edge:
        a -= 2.0
    if a < -1.0:
        a += 2.0
    x1[0] = a
    x2[0] = b


cdef inline void _embed(double q1, double q2, double *out) noexcept nogil:
    """Pillowcase embedding of a reduced point into the unit sphere."""
    cdef bint neg = q1 < 0.0
    cdef double p1 = 2.0 * fabs(q1) - 1.0
    cdef double p2 = 2.0 * q2 - 1.0
    cdef double linf = fabs(p1) if fabs(p1) > fabs(p2) else fabs(p2)
    cdef double l2 = hypot(p1, p2)
    cdef double phi = HALF_PI * linf
    cdef double scale = sin(phi) / l2 if l2 > 0.0 else 0.0
    out[0] = scale * p1
    out[1] = scale * p2
    out[2] = -cos(phi) if neg else cos(phi)


cdef inline void _embed_inverse(double s1, double s2, double s3, double *q1, double *q2) noexcept nogil:
    cdef bint lower = s3 < 0.0
    cdef double rho = hypot(s1, s2)
    cdef double linf = atan2(rho, fabs(s3)) / HALF_PI
    cdef double m = fabs(s1) if fabs(s1) > fabs(s2) else fabs(s2)
    cdef double k = linf / m if m > 0.0 else 0.0
    cdef double a = _clip(0.5 * (_clip(s1 * k, -1.0, 1.0) + 1.0), 0.0, 1.0)
    cdef double b = _clip(0.5 * (_clip(s2 * k, -1.0, 1.0) + 1.0), 0.0, 1.0)
    if lower:
        a = -a
    _p2_fold(&a, &b)
    q1[0] = a
    q2[0] = b


cdef inline int _step_p2(double *y, double d) noexcept nogil:
    """One application of the p2 power map; returns 0, or 1/2 when the
    result saturates to infinity / zero."""
    cdef double r = sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
    cdef double t = 0.0 if fabs(r - 1.0) <= SPHERE_SNAP else log(r)
    cdef double q1, q2, h
    cdef double u[3]
    _embed_inverse(y[0] / r, y[1] / r, y[2] / r, &q1, &q2)
    h = d * t
    if h > HEIGHT_LIMIT:
        return 1
    if h < -HEIGHT_LIMIT:
        return 2
    q1 *= d
    q2 *= d
    _p2_fold(&q1, &q2)
    _embed(q1, q2, u)
    h = exp(h)
    y[0] = h * u[0]
    y[1] = h * u[1]
    y[2] = h * u[2]
    return 0


cdef inline int _step_plane(double *y, double d) noexcept nogil:
    cdef double r = hypot(y[0], y[1])
    cdef double t = 0.0 if fabs(r - 1.0) <= SPHERE_SNAP else log(r)
    cdef double a = _mod(atan2(y[1], y[0]), TWO_PI)
    cdef double h = d * t
    if h > HEIGHT_LIMIT:
        return 1
    if h < -HEIGHT_LIMIT:
        return 2
    h = exp(h)
    y[0] = h * cos(d * a)
    y[1] = h * sin(d * a)
    return 0


def classify_power(points, int d, str group, int max_iter, double r_small, double r_large):
    """Classify orbits of the degree-d power map over ``group`` ("p2" or
    "zorich2").  Returns (classes uint8, iterations int32)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef int dim = pts.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] cls = np.full(n, UNDECIDED, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] its = np.zeros(n, dtype=np.int32)
    cdef double[:, ::1] pv = pts
    cdef unsigned char[::1] cv = cls
    cdef int[::1] iv = its
    cdef bint plane
    cdef Py_ssize_t i
    cdef int m, status, c
    cdef double y[3]
    cdef double r, dd = d
    if group == "p2" and dim == 3:
        plane = False
    elif group == "zorich2" and dim == 2:
        plane = True
    else:
        raise ValueError(f"no compiled kernel for group {group!r} in dimension {dim}")
    with nogil:
        for i in range(n):
            y[0] = pv[i, 0]
            y[1] = pv[i, 1]
            y[2] = 0.0 if plane else pv[i, 2]
            c = UNDECIDED
            m = 0
            while True:
                r = sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
                if isnan(r):
                    c = UNDECIDED
                    break
                if r < r_small:
                    c = TO_ZERO
                    break
                if r > r_large:
                    c = TO_INFINITY
                    break
                if m == max_iter:
                    c = BOUNDED
                    break
                status = _step_plane(y, dd) if plane else _step_p2(y, dd)
                m += 1
                if status == 1:
                    y[0] = INFINITY
                elif status == 2:
                    y[0] = 0.0
                    y[1] = 0.0
                    y[2] = 0.0
            cv[i] = c
            iv[i] = m
    return cls, its
