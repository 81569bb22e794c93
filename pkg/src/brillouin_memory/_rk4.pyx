# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-step RK4 integrator for linear moment equations.

Integrates ``dV/dt = A V + V A^T + D`` and ``du/dt = A u`` and records the
moments at the requested grid points.  Every interval between grid points is
split into equal sub-steps no longer than ``h_max``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil

cnp.import_array()


cdef inline void _lyap_rhs(const double[:, ::1] A, const double[:, ::1] D,
                           double[:, ::1] V, double[:, ::1] AV,
                           double[:, ::1] out, Py_ssize_t n) noexcept nogil:
    # for symmetric V, V A^T = (A V)^T
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + A[i, k] * V[k, j]
            AV[i, j] = acc
    for i in range(n):
        for j in range(n):
            out[i, j] = AV[i, j] + AV[j, i] + D[i, j]


cdef inline void _mean_rhs(const double[:, ::1] A, double[::1] u,
                           double[::1] out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(n):
            acc = acc + A[i, k] * u[k]
        out[i] = acc


def lyapunov_rk4(const double[:, ::1] A, const double[:, ::1] D,
                 const double[:, ::1] V0, const double[::1] u0,
                 const double[::1] times, double h_max):
    """Return ``(covs, means)`` sampled at ``times`` (``times[0]`` is the start)."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t nt = times.shape[0]
    covs_np = np.empty((nt, n, n))
    means_np = np.empty((nt, n))
    cdef double[:, :, ::1] covs = covs_np
    cdef double[:, ::1] means = means_np

    V_np = np.array(V0, dtype=float, order="C")
    u_np = np.array(u0, dtype=float)
    cdef double[:, ::1] V = V_np
    cdef double[::1] u = u_np
    cdef double[:, ::1] Vs = np.empty((n, n))
    cdef double[:, ::1] AV = np.empty((n, n))
    cdef double[:, ::1] k1 = np.empty((n, n))
    cdef double[:, ::1] k2 = np.empty((n, n))
    cdef double[:, ::1] k3 = np.empty((n, n))
    cdef double[:, ::1] k4 = np.empty((n, n))
    cdef double[::1] us = np.empty(n)
    cdef double[::1] m1 = np.empty(n)
    cdef double[::1] m2 = np.empty(n)
    cdef double[::1] m3 = np.empty(n)
    cdef double[::1] m4 = np.empty(n)

    cdef Py_ssize_t it, step, nsub, i, j
    cdef double dt, h, sym

    covs[0, :, :] = V
    means[0, :] = u
    with nogil:
        for it in range(nt - 1):
            dt = times[it + 1] - times[it]
            nsub = <Py_ssize_t> ceil(dt / h_max - 1e-12)
            if nsub < 1:
                nsub = 1
            h = dt / nsub
            for step in range(nsub):
                _lyap_rhs(A, D, V, AV, k1, n)
                _mean_rhs(A, u, m1, n)
                for i in range(n):
                    us[i] = u[i] + 0.5 * h * m1[i]
                    for j in range(n):
                        Vs[i, j] = V[i, j] + 0.5 * h * k1[i, j]
                _lyap_rhs(A, D, Vs, AV, k2, n)
                _mean_rhs(A, us, m2, n)
                for i in range(n):
                    us[i] = u[i] + 0.5 * h * m2[i]
                    for j in range(n):
                        Vs[i, j] = V[i, j] + 0.5 * h * k2[i, j]
                _lyap_rhs(A, D, Vs, AV, k3, n)
                _mean_rhs(A, us, m3, n)
                for i in range(n):
                    us[i] = u[i] + h * m3[i]
                    for j in range(n):
                        Vs[i, j] = V[i, j] + h * k3[i, j]
                _lyap_rhs(A, D, Vs, AV, k4, n)
                _mean_rhs(A, us, m4, n)
                for i in range(n):
                    u[i] = u[i] + h / 6.0 * (m1[i] + 2.0 * m2[i] + 2.0 * m3[i] + m4[i])
                    for j in range(n):
                        V[i, j] = V[i, j] + h / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
                # local symmetrisation
                for i in range(n):
                    for j in range(i + 1, n):
                        sym = 0.5 * (V[i, j] + V[j, i])
                        V[i, j] = sym
                        V[j, i] = sym
            covs[it + 1, :, :] = V
            means[it + 1, :] = u
    return covs_np, means_np
