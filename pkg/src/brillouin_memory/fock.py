"""Brute-force truncated number-basis representation of Gaussian states.

Used only as an independent validation oracle for the closed-form fidelities.

The density matrix is generated from the Husimi function.  With
``w = (alpha_1..alpha_N, alpha_1^*..alpha_N^*)`` treated as independent
variables, ``e^{|alpha|^2} <alpha|rho|alpha>`` is the generating function

    sum_{m,n} rho_{mn} (alpha^*)^m alpha^n / sqrt(m! n!)

and is a Gaussian ``C exp(-w^T A w / 2 + b^T w)``.  Its Taylor coefficients
follow from the multivariate Hermite recursion, so no integrals are needed.
"""
from __future__ import annotations

import numpy as np

from .gaussian import GaussianState

__all__ = ["ConvergenceError", "density_matrix", "uhlmann_fidelity", "fock_fidelity_oracle"]


class ConvergenceError(RuntimeError):
    """The Fock cutoff is too small to represent the state faithfully."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def _hermite_grid(A, b, cutoff):
    """Normalised coefficients ``g_k = G_k / sqrt(k!)`` on a hypercube grid."""
    dim = len(b)
    g = np.zeros((cutoff,) * dim, dtype=complex)
    if dim == 1:
        g[0] = 1.0
        for k in range(cutoff - 1):
            val = b[0] * g[k]
            if k > 0:
                val -= A[0, 0] * np.sqrt(k) * g[k - 1]
            g[k + 1] = val / np.sqrt(k + 1)
        return g
    # slice k0 = 0 is the same problem in the remaining variables
    g[0] = _hermite_grid(A[1:, 1:], b[1:], cutoff)
    sq = np.sqrt(np.arange(cutoff))
    for k0 in range(cutoff - 1):
        cur = g[k0]
        val = b[0] * cur
        if k0 > 0:
            val = val - A[0, 0] * sq[k0] * g[k0 - 1]
        for j in range(1, dim):
            axis = j - 1
            shifted = np.zeros_like(cur)
            dst = [slice(None)] * (dim - 1)
            src = [slice(None)] * (dim - 1)
            dst[axis] = slice(1, None)
            src[axis] = slice(0, -1)
            shape = [1] * (dim - 1)
            shape[axis] = cutoff - 1
            shifted[tuple(dst)] = sq[1:].reshape(shape) * cur[tuple(src)]
            val = val - A[0, j] * shifted
        g[k0 + 1] = val / sq[k0 + 1]
    return g


def density_matrix(state: GaussianState, cutoff: int) -> np.ndarray:
    """Truncated density matrix of a 1- or 2-mode Gaussian state.

    Returns an array of shape ``(cutoff**N, cutoff**N)`` with the number basis
    ordered lexicographically (mode 1 slowest).
    """
    n = state.n_modes
    if n not in (1, 2):
        raise ValueError("Fock oracle supports one or two modes")
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    sigma = state.cov + 0.5 * np.eye(2 * n)
    sigma_inv = np.linalg.inv(sigma)
    mu = state.mean
    # quadratures r = L w, per mode x = (alpha + alpha^*)/sqrt2, p = (alpha - alpha^*)/(i sqrt2)
    L = np.zeros((2 * n, 2 * n), dtype=complex)
    for m in range(n):
        L[2 * m, m] = L[2 * m, n + m] = 1 / np.sqrt(2)
        L[2 * m + 1, m] = -1j / np.sqrt(2)
        L[2 * m + 1, n + m] = 1j / np.sqrt(2)
    X = np.zeros((2 * n, 2 * n))
    X[:n, n:] = X[n:, :n] = np.eye(n)
    A = L.T @ sigma_inv @ L - X
    b = L.T @ sigma_inv @ mu
    C = np.exp(-0.5 * mu @ sigma_inv @ mu) / np.sqrt(np.linalg.det(sigma))
    g = C * _hermite_grid(A, b, cutoff)
    # g is indexed (n_1..n_N, m_1..m_N) with rho_{m n} = g[n, m]
    rho = np.moveaxis(g, list(range(n)), list(range(n, 2 * n)))
    rho = rho.reshape(cutoff**n, cutoff**n)
    return 0.5 * (rho + rho.conj().T)


def uhlmann_fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """``[Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))]^2`` for Hermitian PSD matrices."""
    w, U = np.linalg.eigh(rho1)
    sq1 = (U * np.sqrt(np.clip(w, 0, None))) @ U.conj().T
    M = sq1 @ rho2 @ sq1
    ev = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)


def fock_fidelity_oracle(s1: GaussianState, s2: GaussianState, cutoff: int) -> float:
    """Fidelity of two Gaussian states computed in a truncated number basis.

    Raises
    ------
    ConvergenceError
        If either truncated density matrix has trace below ``1 - 1e-6``.
    """
    if s1.n_modes != s2.n_modes:
        raise ValueError("states must have the same number of modes")
    rhos = []
    for s in (s1, s2):
        rho = density_matrix(s, cutoff)
        tr = float(np.trace(rho).real)
        if tr < 1 - 1e-6:
            raise ConvergenceError(
                f"cutoff {cutoff} captures only trace {tr:.8f} of the state", tr
            )
        rhos.append(rho)
    return uhlmann_fidelity(*rhos)
