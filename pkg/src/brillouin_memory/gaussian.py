"""Gaussian-state algebra in the vacuum-variance-1/2 convention.

Quadratures are ordered ``(X1, P1, X2, P2, ...)`` with ``X = (a + a^dag)/sqrt(2)``
and ``P = (a - a^dag)/(i sqrt(2))``, so the vacuum covariance is ``I/2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GaussianState",
    "PhysicalityError",
    "NumericalError",
    "symplectic_form",
    "make_vacuum",
    "make_thermal",
    "make_coherent",
    "make_squeezed_vacuum",
    "make_squeezed_thermal",
    "make_squeezed_coherent",
    "make_entangled_pair",
    "squeezed_thermal_occupation",
    "rotation_matrix",
    "fidelity_one_mode",
    "fidelity_two_mode",
    "log_negativity",
    "min_symplectic_eigenvalue_pt",
    "squeezing_factor",
    "squeezing_factor_db",
]

PHYSICAL_TOL = 1e-9


class PhysicalityError(ValueError):
    """Covariance matrix violates the uncertainty principle."""


class NumericalError(ArithmeticError):
    """A radicand or determinant is negative beyond round-off tolerance."""


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with ``[[0, 1], [-1, 0]]`` blocks."""
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    return np.kron(np.eye(n_modes, dtype=int), np.array([[0, 1], [-1, 0]]))


def rotation_matrix(angle: float) -> np.ndarray:
    """Quadrature rotation taking ``(X, P)`` to the frame of phase ``angle``.

    The rotated quadrature is ``X' = (a e^{-i angle} + h.c.)/sqrt(2)
    = cos(angle) X + sin(angle) P``.
    """
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


def _symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    n = cov.shape[-1] // 2
    J = symplectic_form(n)
    ev = np.linalg.eigvals(1j * J @ cov)
    return np.sort(np.abs(ev.real))[::2]


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Covariance matrix and mean vector of an N-mode Gaussian state.

    Parameters
    ----------
    cov : array_like, shape (2N, 2N)
        Symmetrised quadrature covariance matrix.
    mean : array_like, shape (2N,), optional
        Quadrature means; zero by default.
    check : bool
        Validate symmetry and physicality on construction.
    tol : float
        Allowed violation of ``nu_min >= 1/2``.
    """

    cov: np.ndarray
    mean: np.ndarray = field(default=None)
    check: bool = field(default=True, repr=False)
    tol: float = field(default=PHYSICAL_TOL, repr=False)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise ValueError(f"covariance must be 2N x 2N, got shape {cov.shape}")
        mean = np.zeros(cov.shape[0]) if self.mean is None else np.array(self.mean, dtype=float)
        if mean.shape != (cov.shape[0],):
            raise ValueError(f"mean must have length {cov.shape[0]}, got {mean.shape}")
        if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(mean))):
            raise ValueError("covariance and mean must be finite")
        if self.check:
            scale = max(1.0, np.max(np.abs(cov)))
            if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
                raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)
        if self.check:
            nu = self.symplectic_eigenvalues()
            if nu.min() < 0.5 - self.tol:
                raise PhysicalityError(
                    f"minimum symplectic eigenvalue {nu.min():.3e} < 1/2"
                )

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def symplectic_eigenvalues(self) -> np.ndarray:
        """Williamson symplectic eigenvalues, ascending."""
        return _symplectic_eigenvalues(self.cov)

    def is_physical(self, tol: float = PHYSICAL_TOL) -> bool:
        return bool(self.symplectic_eigenvalues().min() >= 0.5 - tol)

    def reduced(self, modes) -> "GaussianState":
        """Marginal state of the listed modes (in the given order)."""
        idx = np.ravel([[2 * m, 2 * m + 1] for m in modes])
        return GaussianState(self.cov[np.ix_(idx, idx)], self.mean[idx], check=False)

    def rotated(self, mode: int, angle: float) -> "GaussianState":
        """State seen in the quadrature frame of phase ``angle`` for ``mode``."""
        S = np.eye(2 * self.n_modes)
        S[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = rotation_matrix(angle)
        return GaussianState(S @ self.cov @ S.T, S @ self.mean, check=False)

    def __repr__(self):
        return f"GaussianState(n_modes={self.n_modes}, cov={self.cov.tolist()}, mean={self.mean.tolist()})"


# ---------------------------------------------------------------------------
# constructors


def _require_finite(**values):
    for name, v in values.items():
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name} must be finite, got {v!r}")


def make_vacuum(n_modes: int = 1) -> GaussianState:
    return GaussianState(0.5 * np.eye(2 * n_modes))


def make_thermal(n_bar: float) -> GaussianState:
    """Single-mode thermal state with mean occupation ``n_bar``."""
    if n_bar < 0:
        raise ValueError("thermal occupation must be non-negative")
    return GaussianState((n_bar + 0.5) * np.eye(2))


def make_coherent(alpha: complex) -> GaussianState:
    alpha = complex(alpha)
    _require_finite(alpha=alpha)
    return GaussianState(0.5 * np.eye(2), np.sqrt(2.0) * np.array([alpha.real, alpha.imag]))


def make_squeezed_vacuum(r: float) -> GaussianState:
    """Squeezed vacuum with the X quadrature squeezed, ``diag(e^{-2r}, e^{2r})/2``."""
    _require_finite(r=r)
    return GaussianState(0.5 * np.diag([np.exp(-2 * r), np.exp(2 * r)]))


def squeezed_thermal_occupation(u: float) -> float:
    """Thermal occupation of the seed state of a squeezed thermal state.

    The seed state has covariance ``I/(2u)``, so ``n_bar + 1/2 = 1/(2u)``.
    """
    if not (0 < u <= 1):
        raise ValueError(f"purity parameter u must lie in (0, 1], got {u!r}")
    return 0.5 * (1.0 / u - 1.0)


def make_squeezed_thermal(r: float, u: float) -> GaussianState:
    """Squeezed thermal state ``diag(e^{-2r}, e^{2r})/(2u)`` with purity ``u``."""
    _require_finite(r=r, u=u)
    squeezed_thermal_occupation(u)
    return GaussianState(np.diag([np.exp(-2 * r), np.exp(2 * r)]) / (2.0 * u))


def make_squeezed_coherent(r: float, alpha: complex) -> GaussianState:
    """Displaced squeezed state ``S(r)|alpha>``.

    The complex amplitude is ``<a> = alpha cosh r - alpha^* sinh r``.
    """
    alpha = complex(alpha)
    _require_finite(r=r, alpha=alpha)
    amp = alpha * np.cosh(r) - np.conj(alpha) * np.sinh(r)
    cov = 0.5 * np.diag([np.exp(-2 * r), np.exp(2 * r)])
    return GaussianState(cov, np.sqrt(2.0) * np.array([amp.real, amp.imag]))


def make_entangled_pair(eta: float) -> GaussianState:
    """Idler/signal pair generated with source strength ``eta``.

    Mode moments are ``<a^dag a> = 2 eta^2`` and ``<a_id a_sg> = -2 eta^2 - i eta``.
    """
    _require_finite(eta=eta)
    if eta < 0:
        raise ValueError("source strength eta must be non-negative")
    a = 0.5 + 2 * eta**2
    c = -2 * eta**2
    d = -eta
    cov = np.array([
        [a, 0, c, d],
        [0, a, d, -c],
        [c, d, a, 0],
        [d, -c, 0, a],
    ])
    return GaussianState(cov)


# ---------------------------------------------------------------------------
# figures of merit


def _fidelity_one_mode_arrays(V1, u1, V2, u2):
    """Vectorised single-mode fidelity over leading batch dimensions."""
    V1 = np.asarray(V1, dtype=float)
    V2 = np.asarray(V2, dtype=float)
    S = V1 + V2
    delta = np.asarray(u1, dtype=float) - np.asarray(u2, dtype=float)
    det_s = S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]
    det1 = V1[..., 0, 0] * V1[..., 1, 1] - V1[..., 0, 1] ** 2
    det2 = V2[..., 0, 0] * V2[..., 1, 1] - V2[..., 0, 1] ** 2
    lam = np.maximum(4.0 * (det1 - 0.25) * (det2 - 0.25), 0.0)
    # delta^T S^{-1} delta via the adjugate of S
    quad = (S[..., 1, 1] * delta[..., 0] ** 2 - 2 * S[..., 0, 1] * delta[..., 0] * delta[..., 1]
            + S[..., 0, 0] * delta[..., 1] ** 2) / det_s
    # 1/(sqrt(D+L) - sqrt(L)) written without cancellation
    return np.exp(-0.5 * quad) * (np.sqrt(det_s + lam) + np.sqrt(lam)) / det_s


def fidelity_one_mode(s1: GaussianState, s2: GaussianState) -> float:
    """Uhlmann fidelity (squared convention) of two single-mode Gaussian states.

    ``F = exp(-1/2 d^T (V1+V2)^{-1} d) / (sqrt(Delta + Lambda) - sqrt(Lambda))``
    with ``Delta = det(V1+V2)`` and ``Lambda = 4 (det V1 - 1/4)(det V2 - 1/4)``.
    """
    if s1.n_modes != 1 or s2.n_modes != 1:
        raise ValueError("fidelity_one_mode requires single-mode states")
    f = _fidelity_one_mode_arrays(s1.cov, s1.mean, s2.cov, s2.mean)
    return float(min(f, 1.0))


def _fidelity_two_mode_arrays(V1, V2):
    V1 = np.asarray(V1, dtype=float)
    V2 = np.asarray(V2, dtype=float)
    J = symplectic_form(2).astype(float)
    E = np.eye(4)
    delta_f = np.linalg.det(V1 + V2)
    gamma_f = 16.0 * np.linalg.det(J @ V1 @ J @ V2 - E / 4.0)
    lam_f = 16.0 * (np.linalg.det(V1 + 0.5j * J) * np.linalg.det(V2 + 0.5j * J)).real
    s = np.sqrt(np.maximum(gamma_f, 0.0)) + np.sqrt(np.maximum(lam_f, 0.0))
    # 1/(s - sqrt(s^2 - Delta)) = (s + sqrt(s^2 - Delta))/Delta
    return (s + np.sqrt(np.maximum(s * s - delta_f, 0.0))) / delta_f


def fidelity_two_mode(s1: GaussianState, s2: GaussianState) -> float:
    """Uhlmann fidelity of two zero-mean two-mode Gaussian states."""
    if s1.n_modes != 2 or s2.n_modes != 2:
        raise ValueError("fidelity_two_mode requires two-mode states")
    if np.linalg.norm(s1.mean) >= 1e-9 or np.linalg.norm(s2.mean) >= 1e-9:
        raise NotImplementedError("two-mode fidelity is implemented for zero-mean states only")
    return float(min(_fidelity_two_mode_arrays(s1.cov, s2.cov), 1.0))


def _lambda_minus_pt_arrays(V):
    """Smallest symplectic eigenvalue of the partial transpose, batched."""
    V = np.asarray(V, dtype=float)
    det_a = V[..., 0, 0] * V[..., 1, 1] - V[..., 0, 1] * V[..., 1, 0]
    det_b = V[..., 2, 2] * V[..., 3, 3] - V[..., 2, 3] * V[..., 3, 2]
    det_c = V[..., 0, 2] * V[..., 1, 3] - V[..., 0, 3] * V[..., 1, 2]
    sigma = det_a + det_b - 2.0 * det_c
    disc = sigma**2 - 4.0 * np.linalg.det(V)
    if np.any(disc < -1e-9):
        raise NumericalError("negative discriminant in partial-transpose eigenvalues")
    inner = (sigma - np.sqrt(np.maximum(disc, 0.0))) / 2.0
    if np.any(inner < -1e-9):
        raise NumericalError("negative radicand in partial-transpose eigenvalues")
    return np.sqrt(np.maximum(inner, 0.0))


def min_symplectic_eigenvalue_pt(s: GaussianState) -> float:
    """``lambda_-`` of the partially transposed two-mode covariance matrix."""
    if s.n_modes != 2:
        raise ValueError("requires a two-mode state")
    return float(_lambda_minus_pt_arrays(s.cov))


def _log_negativity_from_lambda(lam):
    with np.errstate(divide="ignore"):
        return np.maximum(0.0, -np.log(2.0 * np.asarray(lam)))


def log_negativity(s: GaussianState) -> float:
    """Logarithmic negativity ``max(0, -ln(2 lambda_-))`` of a two-mode state."""
    return float(_log_negativity_from_lambda(min_symplectic_eigenvalue_pt(s)))


def squeezing_factor(s: GaussianState, quad_index: int = 0) -> float:
    """Quadrature variance relative to the vacuum variance 1/2 (<1 means squeezed)."""
    return float(s.cov[quad_index, quad_index] / 0.5)


def squeezing_factor_db(s: GaussianState, quad_index: int = 0) -> float:
    """Squeezing factor as a power ratio in decibels, ``10 log10(ratio)``."""
    return float(10.0 * np.log10(squeezing_factor(s, quad_index)))
