"""Numerical moment integrator for the linearised photon-phonon Langevin system.

Each stage is written in real quadratures as ``dV/dt = A V + V A^T + D`` and
``du/dt = A u``.  A mode with complex rate ``lam`` (``da/dt = lam a``)
contributes the block ``[[Re lam, -Im lam], [Im lam, Re lam]]``; the
beam-splitter term ``-i g b`` contributes ``[[0, g], [-g, 0]]``.  Optical
modes diffuse at ``gamma/2`` and acoustic modes at ``Gamma (n_th + 1/2)`` per
quadrature, so that the uncoupled steady states are vacuum and thermal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .gaussian import GaussianState, symplectic_form
from .params import SystemParams

__all__ = [
    "LinearSystem",
    "Trajectory",
    "ResourceError",
    "build_stage_system",
    "integrate_moments",
    "population_from_state",
    "mode_block",
    "coupling_block",
    "STAGES",
    "SCENARIOS",
    "MAX_STEPS",
    "DEFAULT_RESOLUTION",
]

STAGES = ("write", "store", "readout")
SCENARIOS = ("squeezed", "entangled")
MAX_STEPS = 100_000_000
# steps per unit of the fastest rate; 50 is the coarsest allowed, the finer
# default keeps the global error of the Lyapunov flow (frequencies up to 2g)
# far below the 1e-6 comparison tolerance
DEFAULT_RESOLUTION = 400


class ResourceError(RuntimeError):
    """The requested integration would exceed the step budget."""


def mode_block(lam: complex) -> np.ndarray:
    """Quadrature drift block of ``da/dt = lam a``."""
    lam = complex(lam)
    return np.array([[lam.real, -lam.imag], [lam.imag, lam.real]])


def coupling_block(g: float) -> np.ndarray:
    """Quadrature drift block of the beam-splitter term ``-i g b``."""
    return np.array([[0.0, g], [-g, 0.0]])


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Drift and diffusion matrices of one protocol stage."""

    A: np.ndarray
    D: np.ndarray
    labels: tuple = ()
    rate_scale: float = 0.0

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        D = np.array(self.D, dtype=float)
        if A.shape != D.shape or A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise ValueError("A and D must be matching 2N x 2N matrices")
        if not np.all(np.isfinite(A)):
            raise ValueError("drift matrix must be finite")
        if np.max(np.abs(D - D.T)) > 1e-12 * max(1.0, np.max(np.abs(D))):
            raise ValueError("diffusion matrix must be symmetric")
        if np.linalg.eigvalsh(D).min() < -1e-12 * max(1.0, np.max(np.abs(D))):
            raise ValueError("diffusion matrix must be positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "D", D)
        if not self.rate_scale:
            object.__setattr__(self, "rate_scale", float(np.max(np.abs(A), initial=0.0)))

    @property
    def n_modes(self) -> int:
        return self.A.shape[0] // 2


def _assemble(modes, couplings):
    """Build a LinearSystem from ``[(label, lam, diffusion), ...]`` and ``{(i, j): g}``."""
    n = len(modes)
    A = np.zeros((2 * n, 2 * n))
    D = np.zeros((2 * n, 2 * n))
    rates = [0.0]
    for i, (_, lam, diff) in enumerate(modes):
        A[2 * i:2 * i + 2, 2 * i:2 * i + 2] = mode_block(lam)
        D[2 * i:2 * i + 2, 2 * i:2 * i + 2] = diff * np.eye(2)
        rates += [2 * abs(lam.real), abs(lam.imag)]
    for (i, j), g in couplings.items():
        A[2 * i:2 * i + 2, 2 * j:2 * j + 2] = coupling_block(g)
        A[2 * j:2 * j + 2, 2 * i:2 * i + 2] = coupling_block(g)
        rates.append(abs(g))
    return LinearSystem(A, D, tuple(m[0] for m in modes), max(rates))


def build_stage_system(stage: str, scenario: str, params: SystemParams,
                       n_th: float | None = None) -> LinearSystem:
    """Quadrature drift/diffusion of one protocol stage.

    Parameters
    ----------
    stage : {"write", "store", "readout"}
    scenario : {"squeezed", "entangled"}
        The entangled scenario prepends a decoupled idler mode that decays at
        ``gamma_smf`` with detuning ``Delta_id``.
    params : SystemParams
    n_th : float, optional
        Thermal phonon occupation; defaults to ``params.n_th``.

    Returns
    -------
    LinearSystem
        Modes ordered ``[idler,] optical, acoustic`` (store: ``[idler,] acoustic``).
    """
    if stage not in STAGES or scenario not in SCENARIOS:
        raise ValueError(f"unsupported stage/scenario combination {stage!r}/{scenario!r}")
    if n_th is None:
        n_th = params.n_th
    if n_th < 0:
        raise ValueError("thermal occupation must be non-negative")
    gamma, Gamma = params.gamma, params.Gamma
    acoustic = ("acoustic", complex(-Gamma / 2, params.Delta_ac), Gamma * (n_th + 0.5))
    modes = []
    if scenario == "entangled":
        modes.append(("idler", complex(-params.gamma_smf / 2, params.Delta_id), params.gamma_smf / 2))
    if stage == "write":
        modes += [("signal", complex(-gamma / 2, params.Delta_sg), gamma / 2), acoustic]
        g = params.g1
    elif stage == "readout":
        modes += [("retrieval", complex(-gamma / 2, params.Delta_re), gamma / 2), acoustic]
        g = params.g2
    else:
        modes.append(acoustic)
        g = None
    couplings = {}
    if g is not None:
        couplings[(len(modes) - 2, len(modes) - 1)] = g
    return _assemble(modes, couplings)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Moments sampled on a time grid."""

    times: np.ndarray
    covs: np.ndarray
    means: np.ndarray

    @property
    def states(self) -> list[GaussianState]:
        return [GaussianState(V, u, check=False) for V, u in zip(self.covs, self.means)]

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i) -> GaussianState:
        return GaussianState(self.covs[i], self.means[i], check=False)

    @property
    def final(self) -> GaussianState:
        return self[-1]

    def min_symplectic_eigenvalues(self) -> np.ndarray:
        n = self.covs.shape[-1] // 2
        J = symplectic_form(n)
        ev = np.abs(np.linalg.eigvals(1j * J @ self.covs).real)
        return ev.min(axis=-1)


def integrate_moments(system: LinearSystem, initial: GaussianState, t_grid: Sequence[float],
                      *, resolution: float = DEFAULT_RESOLUTION, kernel: str | None = None,
                      check_physical: bool = True) -> Trajectory:
    """Integrate first and second moments with fixed-step classical RK4.

    Parameters
    ----------
    system : LinearSystem
    initial : GaussianState
        State at ``t_grid[0] == 0``.
    t_grid : sequence of float
        Strictly increasing sample times starting at 0.
    resolution : float
        The step is at most ``1 / (resolution * rate_scale)`` where
        ``rate_scale`` is the largest coupling, damping or detuning rate.
    kernel : {"cython", "python"}, optional
        Force a kernel; defaults to the one selected at import.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 1 or t[0] != 0.0:
        raise ValueError("t_grid must be one-dimensional and start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if initial.n_modes != system.n_modes:
        raise ValueError(f"initial state has {initial.n_modes} modes, system has {system.n_modes}")
    if resolution < 50:
        raise ValueError("resolution below 50 steps per unit rate is not allowed")
    rate = system.rate_scale
    h_max = np.inf if rate == 0 else 1.0 / (resolution * rate)
    if np.isfinite(h_max):
        n_steps = np.sum(np.maximum(1, np.ceil(np.diff(t) / h_max - 1e-12)))
        if n_steps > MAX_STEPS:
            raise ResourceError(f"integration needs {n_steps:.3g} steps (limit {MAX_STEPS:.0e})")
    fn = kernels.get_kernel(kernel)
    covs, means = fn(
        np.ascontiguousarray(system.A), np.ascontiguousarray(system.D),
        np.ascontiguousarray(initial.cov), np.ascontiguousarray(initial.mean),
        np.ascontiguousarray(t), float(h_max),
    )
    traj = Trajectory(t, covs, means)
    if check_physical and initial.is_physical():
        nu = traj.min_symplectic_eigenvalues()
        if nu.min() < 0.5 - 1e-7:
            raise ArithmeticError(f"trajectory left the physical set (nu_min = {nu.min():.3e})")
    return traj


def population_from_state(state: GaussianState, mode_index: int) -> float:
    """Mean occupation ``<a^dag a>`` of one mode from its quadrature moments."""
    i = 2 * mode_index
    V = state.cov
    u = state.mean
    return float((V[i, i] + V[i + 1, i + 1] - 1.0) / 2.0 + (u[i] ** 2 + u[i + 1] ** 2) / 2.0)
