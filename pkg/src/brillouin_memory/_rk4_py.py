"""Pure-numpy fallback of the fixed-step RK4 moment integrator.

Same algorithm and step rule as the compiled ``_rk4`` extension.
"""
import numpy as np


def lyapunov_rk4(A, D, V0, u0, times, h_max):
    """Return ``(covs, means)`` sampled at ``times`` (``times[0]`` is the start)."""
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    V = np.array(V0, dtype=float)
    u = np.array(u0, dtype=float)
    times = np.asarray(times, dtype=float)
    nt = len(times)
    covs = np.empty((nt,) + V.shape)
    means = np.empty((nt,) + u.shape)
    covs[0] = V
    means[0] = u

    def rhs(V):
        AV = A @ V
        return AV + AV.T + D

    for it in range(nt - 1):
        dt = times[it + 1] - times[it]
        nsub = max(1, int(np.ceil(dt / h_max - 1e-12)))
        h = dt / nsub
        for _ in range(nsub):
            k1 = rhs(V)
            k2 = rhs(V + 0.5 * h * k1)
            k3 = rhs(V + 0.5 * h * k2)
            k4 = rhs(V + h * k3)
            m1 = A @ u
            m2 = A @ (u + 0.5 * h * m1)
            m3 = A @ (u + 0.5 * h * m2)
            m4 = A @ (u + h * m3)
            V = V + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            V = 0.5 * (V + V.T)
            u = u + h / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4)
        covs[it + 1] = V
        means[it + 1] = u
    return covs, means
