# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics match weylsim._kernels._ref exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, sin, sqrt

cnp.import_array()

cdef double SMALL_PHASE = 1e-8
cdef double PI = 3.141592653589793238462643383279502884


def weyl_propagate(const double complex[::1] c0, const double complex[::1] c1,
                   const double[::1] px, const double[::1] py, double t):
    cdef Py_ssize_t i, npts = c0.shape[0]
    out0 = np.empty(npts, dtype=np.complex128)
    out1 = np.empty(npts, dtype=np.complex128)
    cdef double complex[::1] d0 = out0
    cdef double complex[::1] d1 = out1
    cdef double r, rt, ct, s
    cdef double complex pm, pp
    for i in range(npts):
        r = sqrt(px[i] * px[i] + py[i] * py[i])
        rt = r * t
        ct = cos(rt)
        if fabs(rt) < SMALL_PHASE:
            s = t * (1.0 - rt * rt / 6.0)
        else:
            s = sin(rt) / r
        pm = px[i] - 1j * py[i]
        pp = px[i] + 1j * py[i]
        d0[i] = ct * c0[i] + 1j * s * pm * c1[i]
        d1[i] = 1j * s * pp * c0[i] + ct * c1[i]
    return out0, out1


def trajectory_sums(const double[::1] px, const double[::1] py, const double[::1] wts,
                    double n, double m, double width, const double[::1] times):
    cdef Py_ssize_t i, j, npts = px.shape[0], nt = times.shape[0]
    gauss_arr = np.empty(npts, dtype=np.float64)
    sum_x = np.empty(nt, dtype=np.float64)
    sum_y = np.empty(nt, dtype=np.float64)
    cdef double[::1] g = gauss_arr
    cdef double[::1] out_x = sum_x
    cdef double[::1] out_y = sum_y
    cdef double w2 = 2.0 * width * width
    cdef double norm = w2 / PI
    cdef double dx_, dy_, p2, p, t, arg, sin_over_p, fx, fy, sx, sy
    for i in range(npts):
        dx_ = px[i] + n
        dy_ = py[i] + m
        g[i] = wts[i] * norm * exp(-w2 * (dx_ * dx_ + dy_ * dy_))
    for j in range(nt):
        t = times[j]
        sx = 0.0
        sy = 0.0
        for i in range(npts):
            p2 = px[i] * px[i] + py[i] * py[i]
            if p2 == 0.0:
                # analytic continuation to the origin: gx -> -t, gy -> 0
                sx += g[i] * (-t)
                continue
            p = sqrt(p2)
            arg = 2.0 * p * t
            if fabs(arg) < SMALL_PHASE:
                sin_over_p = 2.0 * t * (1.0 - arg * arg / 6.0)
            else:
                sin_over_p = sin(arg) / p
            fx = -(2.0 * px[i] * px[i] * t + py[i] * py[i] * sin_over_p) / (2.0 * p2)
            fy = -(px[i] * py[i] * (2.0 * t - sin_over_p)) / (2.0 * p2)
            sx += g[i] * fx
            sy += g[i] * fy
        out_x[j] = sx
        out_y[j] = sy
    return sum_x, sum_y
