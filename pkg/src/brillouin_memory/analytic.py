"""Closed-form solutions of the linearised photon-phonon dynamics.

The beam-splitter stage ``da/dt = (-gamma/2 + i Delta_opt) a - i g b``,
``db/dt = (-Gamma/2 + i Delta_ac) b - i g a`` is solved by

    b(t) = mu1 E(t) a(0) + (mu2 e^{w- t} - mu3 e^{w+ t}) b(0) + noise
    a(t) = (mu2 e^{w+ t} - mu3 e^{w- t}) a(0) + mu1 E(t) b(0) + noise

with ``E(t) = e^{w+ t} - e^{w- t}``.  Thermal acoustic noise adds
``Gamma n_th`` times a sum of ``(e^{alpha_j t} - 1)/alpha_j`` terms to the
phonon and photon numbers.  Gaussian states are propagated through these maps
as complex moments (``<c>``, ``<cc>``, ``<c^dag c>`` and cross moments) and
converted to quadrature covariances in the frame of the chosen phase.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .gaussian import (
    GaussianState,
    make_entangled_pair,
    make_squeezed_coherent,
    make_squeezed_thermal,
    make_squeezed_vacuum,
)
from .params import SystemParams, detunings_for_k

__all__ = [
    "CoefficientSet",
    "coefficient_set",
    "stage_coefficients",
    "expm1_over",
    "SqueezedVacuum",
    "SqueezedThermal",
    "SqueezedCoherent",
    "Write",
    "Store",
    "Readout",
    "Phases",
    "ValidityWarning",
    "closed_form_valid",
    "stage_state_squeezed",
    "stage_state_entangled",
    "squeezed_stage_moments",
    "entangled_stage_moments",
    "transduction_populations_exact",
    "transduction_populations_approx",
    "conversion_efficiency",
    "conversion_efficiency_max",
    "SqueezingApprox",
    "EntanglementApprox",
    "approx_squeezing_metrics",
    "approx_entanglement_metrics",
]


class ValidityWarning(UserWarning):
    """A closed form or approximation is used outside its stated regime."""


# ---------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True)
class CoefficientSet:
    """Eigen-rates and amplitude coefficients of one beam-splitter stage."""

    omega_plus: complex
    omega_minus: complex
    tau_plus: complex
    tau_minus: complex
    mu1: complex
    mu2: complex
    mu3: complex
    alpha1: complex
    alpha2: complex
    alpha3: complex
    alpha4: complex

    def swap_amplitude(self, t):
        """``mu1 E(t)``: amplitude transferred between optical and acoustic mode."""
        t = np.asarray(t, dtype=float)
        return self.mu1 * (np.exp(self.omega_plus * t) - np.exp(self.omega_minus * t))

    def acoustic_amplitude(self, t):
        """Amplitude remaining in the acoustic mode, ``mu2 e^{w- t} - mu3 e^{w+ t}``."""
        t = np.asarray(t, dtype=float)
        return self.mu2 * np.exp(self.omega_minus * t) - self.mu3 * np.exp(self.omega_plus * t)

    def optical_amplitude(self, t):
        """Amplitude remaining in the optical mode, ``mu2 e^{w+ t} - mu3 e^{w- t}``."""
        t = np.asarray(t, dtype=float)
        return self.mu2 * np.exp(self.omega_plus * t) - self.mu3 * np.exp(self.omega_minus * t)

    def acoustic_noise(self, t):
        """Integral of ``|acoustic amplitude|^2``; multiply by ``Gamma n_th``."""
        mu2, mu3 = self.mu2, self.mu3
        val = (abs(mu3) ** 2 * expm1_over(self.alpha1, t)
               - mu3 * np.conj(mu2) * expm1_over(self.alpha2, t)
               - mu2 * np.conj(mu3) * expm1_over(self.alpha3, t)
               + abs(mu2) ** 2 * expm1_over(self.alpha4, t))
        return np.real(val)

    def optical_noise(self, t):
        """Integral of ``|mu1 E|^2``; multiply by ``Gamma n_th``."""
        val = (expm1_over(self.alpha1, t) - expm1_over(self.alpha2, t)
               - expm1_over(self.alpha3, t) + expm1_over(self.alpha4, t))
        return abs(self.mu1) ** 2 * np.real(val)

    @property
    def degenerate(self) -> bool:
        """True near the exceptional point where ``tau+ = tau-``."""
        return abs(self.tau_plus - self.tau_minus) < 1e-8


def expm1_over(alpha: complex, t):
    """``(e^{alpha t} - 1)/alpha`` with the removable singularity at ``alpha = 0``."""
    t = np.asarray(t, dtype=float)
    z = alpha * t
    small = np.abs(z) < 1e-6
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (np.exp(z) - 1.0) / alpha if alpha != 0 else np.zeros_like(z)
    series = t * (1.0 + z / 2.0 + z * z / 6.0)
    return np.where(small, series, direct)


def coefficient_set(gamma: float, Gamma: float, g: float, Delta_opt: float,
                    Delta_ac: float) -> CoefficientSet:
    """Coefficients of the stage with coupling ``g`` and the given detunings.

    ``D = (Gamma - gamma) + 2i(Delta_opt - Delta_ac)``, ``S = sqrt(16 g^2 - D^2)``
    (principal branch), ``w+- = -(gamma+Gamma)/4 + i(Delta_opt+Delta_ac)/2 -+ iS/4``,
    ``tau+- = (iD +- S)/(4g)``, ``mu1 = 1/(tau+ - tau-)``, ``mu2 = tau+ mu1``,
    ``mu3 = tau- mu1`` and ``alpha`` the pairwise sums ``w + w'^*``.
    """
    if not g > 0:
        raise ValueError("coupling g must be positive for the closed-form solution")
    D = (Gamma - gamma) + 2j * (Delta_opt - Delta_ac)
    S = np.sqrt(complex(16 * g * g) - D * D)
    centre = -(gamma + Gamma) / 4 + 0.5j * (Delta_opt + Delta_ac)
    w_p = centre - 0.25j * S
    w_m = centre + 0.25j * S
    t_p = (1j * D + S) / (4 * g)
    t_m = (1j * D - S) / (4 * g)
    # at the exceptional point tau+ = tau- and mu1 diverges; callers check .degenerate
    with np.errstate(divide="ignore", invalid="ignore"):
        mu1 = 1.0 / (t_p - t_m) if t_p != t_m else complex(np.inf, np.nan)
        mu2, mu3 = t_p * mu1, t_m * mu1
    return CoefficientSet(
        omega_plus=complex(w_p), omega_minus=complex(w_m),
        tau_plus=complex(t_p), tau_minus=complex(t_m),
        mu1=complex(mu1), mu2=complex(mu2), mu3=complex(mu3),
        alpha1=complex(w_p + np.conj(w_p)), alpha2=complex(w_p + np.conj(w_m)),
        alpha3=complex(w_m + np.conj(w_p)), alpha4=complex(w_m + np.conj(w_m)),
    )


def stage_coefficients(params: SystemParams, stage: str) -> CoefficientSet:
    """Coefficients of the write (``g1``, signal) or readout (``g2``, retrieval) stage."""
    if stage == "write":
        return coefficient_set(params.gamma, params.Gamma, params.g1, params.Delta_sg, params.Delta_ac)
    if stage == "readout":
        return coefficient_set(params.gamma, params.Gamma, params.g2, params.Delta_re, params.Delta_ac)
    raise ValueError(f"stage {stage!r} has no beam-splitter coefficients")


def closed_form_valid(params: SystemParams) -> bool:
    """Whether both beam-splitter stages admit the closed-form solution."""
    if not (params.g1 > 0 and params.g2 > 0):
        return False
    return not (stage_coefficients(params, "write").degenerate
                or stage_coefficients(params, "readout").degenerate)


# ---------------------------------------------------------------------------
# complex-moment <-> quadrature conversion


def _single_moments(state: GaussianState, mode: int = 0):
    """``(<c>, <cc> - <c>^2, <c^dag c> - |<c>|^2)`` of one mode."""
    i = 2 * mode
    V = state.cov[i:i + 2, i:i + 2]
    u = state.mean[i:i + 2]
    mean = (u[0] + 1j * u[1]) / np.sqrt(2)
    s = 0.5 * (V[0, 0] - V[1, 1]) + 1j * V[0, 1]
    n = 0.5 * (V[0, 0] + V[1, 1] - 1.0)
    return mean, s, n


def _cross_moments(state: GaussianState, i: int, j: int):
    """Centred ``(<c_i c_j>, <c_i^dag c_j>)`` of two distinct modes."""
    C = state.cov[2 * i:2 * i + 2, 2 * j:2 * j + 2]
    m = 0.5 * (C[0, 0] - C[1, 1]) + 0.5j * (C[0, 1] + C[1, 0])
    p = 0.5 * (C[0, 0] + C[1, 1]) + 0.5j * (C[0, 1] - C[1, 0])
    return m, p


def _single_block(mean, s, n, beta):
    """Quadrature covariance/mean in the frame ``c -> c e^{-i beta}`` (batched)."""
    mean = np.asarray(mean) * np.exp(-1j * beta)
    s = np.asarray(s) * np.exp(-2j * beta)
    n = np.asarray(n, dtype=float)
    shape = np.broadcast(mean, s, n).shape
    V = np.empty(shape + (2, 2))
    V[..., 0, 0] = n + 0.5 + s.real
    V[..., 1, 1] = n + 0.5 - s.real
    V[..., 0, 1] = V[..., 1, 0] = s.imag
    u = np.empty(shape + (2,))
    u[..., 0] = np.sqrt(2) * np.broadcast_to(mean.real, shape)
    u[..., 1] = np.sqrt(2) * np.broadcast_to(mean.imag, shape)
    return V, u


def _cross_block(m, p):
    """Quadrature cross-covariance of modes with moments ``<c1 c2>``, ``<c1^dag c2>``."""
    m = np.asarray(m)
    p = np.asarray(p)
    shape = np.broadcast(m, p).shape
    C = np.empty(shape + (2, 2))
    C[..., 0, 0] = m.real + p.real
    C[..., 0, 1] = m.imag + p.imag
    C[..., 1, 0] = m.imag - p.imag
    C[..., 1, 1] = -m.real + p.real
    return C


# ---------------------------------------------------------------------------
# scenario and stage descriptors


@dataclass(frozen=True)
class SqueezedVacuum:
    r: float
    phase: float = 0.0
    default_beta_b = np.pi / 2

    def state(self) -> GaussianState:
        return make_squeezed_vacuum(self.r).rotated(0, -self.phase)


@dataclass(frozen=True)
class SqueezedThermal:
    r: float
    u: float
    phase: float = 0.0
    default_beta_b = np.pi / 2

    def state(self) -> GaussianState:
        return make_squeezed_thermal(self.r, self.u).rotated(0, -self.phase)


@dataclass(frozen=True)
class SqueezedCoherent:
    r: float
    alpha: complex
    phase: float = 0.0
    default_beta_b = 3 * np.pi / 2

    def state(self) -> GaussianState:
        return make_squeezed_coherent(self.r, self.alpha).rotated(0, -self.phase)


SqueezedKind = Union[SqueezedVacuum, SqueezedThermal, SqueezedCoherent]


@dataclass(frozen=True)
class Write:
    """Write stage evaluated at time ``t`` after the first pump turns on."""

    t: float


@dataclass(frozen=True)
class Store:
    """Storage stage: write of length ``tau1`` followed by ``t`` of free evolution."""

    tau1: float
    t: float


@dataclass(frozen=True)
class Readout:
    """Readout stage: write ``tau1``, storage ``tau_s``, then ``t`` of readout."""

    tau1: float
    tau_s: float
    t: float


Stage = Union[Write, Store, Readout]

# quadrature phase of the retrieval mode that undoes the sign of the double swap
DEFAULT_BETA_RE = np.pi
DEFAULT_BETA_B_ENTANGLED = 3 * np.pi / 2


@dataclass(frozen=True)
class Phases:
    """Quadrature phases of the acoustic (``beta_b``) and retrieval (``beta_re``) frames.

    ``None`` selects the scenario default.
    """

    beta_b: Optional[float] = None
    beta_re: Optional[float] = None

    def resolve(self, default_beta_b: float) -> tuple[float, float]:
        beta_b = default_beta_b if self.beta_b is None else self.beta_b
        beta_re = DEFAULT_BETA_RE if self.beta_re is None else self.beta_re
        return beta_b, beta_re


def _check_times(stage):
    for name in ("tau1", "tau_s"):
        if hasattr(stage, name) and getattr(stage, name) < 0:
            raise ValueError(f"{name} must be non-negative")
    if np.any(np.asarray(stage.t) < 0):
        raise ValueError("stage time must be non-negative")


def _store_rates(params):
    return complex(-params.Gamma / 2, params.Delta_ac)


# ---------------------------------------------------------------------------
# squeezed scenarios


def _propagate_single(params, stage, mean, s, n):
    """Propagate complex moments of the signal to the reported mode of ``stage``."""
    n_th = params.n_th
    heat = params.Gamma * n_th
    cw = stage_coefficients(params, "write")
    if isinstance(stage, Write):
        K = cw.swap_amplitude(stage.t)
        return K * mean, K * K * s, abs(K) ** 2 * n + heat * cw.acoustic_noise(stage.t)
    K1 = cw.swap_amplitude(stage.tau1)
    mean, s, n = K1 * mean, K1 * K1 * s, abs(K1) ** 2 * n + heat * cw.acoustic_noise(stage.tau1)
    lam = _store_rates(params)
    ts = stage.t if isinstance(stage, Store) else stage.tau_s
    ts = np.asarray(ts, dtype=float)
    decay = np.exp(-params.Gamma * ts)
    mean, s, n = np.exp(lam * ts) * mean, np.exp(2 * lam * ts) * s, decay * n + n_th * (1 - decay)
    if isinstance(stage, Store):
        return mean, s, n
    cr = stage_coefficients(params, "readout")
    K2 = cr.swap_amplitude(stage.t)
    return K2 * mean, K2 * K2 * s, abs(K2) ** 2 * n + heat * cr.optical_noise(stage.t)


def squeezed_stage_moments(kind: SqueezedKind, stage: Stage, params: SystemParams,
                           phases: Phases = Phases(), signal: GaussianState | None = None):
    """Batched covariance ``(..., 2, 2)`` and mean ``(..., 2)`` of the reported mode.

    ``stage.t`` may be an array.  ``signal`` overrides the input state built
    from ``kind`` (``kind`` then only selects the default phase frame).
    """
    _check_times(stage)
    if signal is None:
        signal = kind.state()
    if signal.n_modes != 1:
        raise ValueError("squeezed scenarios take a single-mode signal")
    mean, s, n = _propagate_single(params, stage, *_single_moments(signal))
    beta_b, beta_re = phases.resolve(kind.default_beta_b)
    beta = beta_re if isinstance(stage, Readout) else beta_b
    return _single_block(mean, s, n, beta)


def stage_state_squeezed(kind: SqueezedKind, stage: Stage, params: SystemParams,
                         phases: Phases = Phases()) -> GaussianState:
    """Single-mode state of the acoustic (write/store) or retrieval (readout) mode.

    Examples
    --------
    >>> p = SystemParams()
    >>> s = stage_state_squeezed(SqueezedVacuum(1.0), Write(0.0), p)
    >>> s.cov.round(12).tolist()
    [[0.5, 0.0], [0.0, 0.5]]
    """
    if np.ndim(stage.t):
        raise ValueError("stage_state_squeezed takes a scalar time; use squeezed_stage_moments")
    V, u = squeezed_stage_moments(kind, stage, params, phases)
    return GaussianState(V, u, check=False)


# ---------------------------------------------------------------------------
# entangled scenario


def _propagate_pair(params, stage, pair: GaussianState):
    """Moments of (idler, partner) with the partner the reported mode of ``stage``."""
    m1, s1, n1 = _single_moments(pair, 0)
    m2, s2, n2 = _single_moments(pair, 1)
    cm, cp = _cross_moments(pair, 0, 1)
    lam_id = complex(-params.gamma_smf / 2, params.Delta_id)
    t_total = stage.t
    if isinstance(stage, Store):
        t_total = stage.tau1 + stage.t
    elif isinstance(stage, Readout):
        t_total = stage.tau1 + stage.tau_s + stage.t
    t_total = np.asarray(t_total, dtype=float)
    idler = (np.exp(lam_id * t_total) * m1, np.exp(2 * lam_id * t_total) * s1,
             np.exp(-params.gamma_smf * t_total) * n1)
    # the partner picks up one factor of the idler's evolution in each cross moment
    partner = _propagate_single(params, stage, m2, s2, n2)
    ratio = _partner_amplitude(params, stage)
    cross_m = np.exp(lam_id * t_total) * ratio * cm
    cross_p = np.exp(np.conj(lam_id) * t_total) * ratio * cp
    return idler, partner, (cross_m, cross_p)


def _partner_amplitude(params, stage):
    """Total linear amplitude from the signal to the reported partner mode."""
    cw = stage_coefficients(params, "write")
    if isinstance(stage, Write):
        return cw.swap_amplitude(stage.t)
    amp = cw.swap_amplitude(stage.tau1)
    ts = stage.t if isinstance(stage, Store) else stage.tau_s
    amp = amp * np.exp(_store_rates(params) * np.asarray(ts, dtype=float))
    if isinstance(stage, Store):
        return amp
    return amp * stage_coefficients(params, "readout").swap_amplitude(stage.t)


def entangled_stage_moments(stage: Stage, params: SystemParams, eta: float,
                            phases: Phases = Phases(), pair: GaussianState | None = None):
    """Batched 4x4 covariance and mean of (idler, partner) for the entangled scenario."""
    _check_times(stage)
    if pair is None:
        pair = make_entangled_pair(eta)
    (m1, s1, n1), (m2, s2, n2), (cm, cp) = _propagate_pair(params, stage, pair)
    beta_b, beta_re = phases.resolve(DEFAULT_BETA_B_ENTANGLED)
    beta = beta_re if isinstance(stage, Readout) else beta_b
    A, ua = _single_block(m1, s1, n1, 0.0)
    B, ub = _single_block(m2, s2, n2, beta)
    C = _cross_block(cm * np.exp(-1j * beta), cp * np.exp(-1j * beta))
    shape = np.broadcast_shapes(A.shape, B.shape, C.shape)[:-2]
    V = np.empty(shape + (4, 4))
    V[..., :2, :2] = A
    V[..., 2:, 2:] = B
    V[..., :2, 2:] = C
    V[..., 2:, :2] = np.swapaxes(C, -1, -2)
    u = np.empty(shape + (4,))
    u[..., :2] = ua
    u[..., 2:] = ub
    return V, u


def stage_state_entangled(stage: Stage, params: SystemParams, eta: float,
                          phases: Phases = Phases()) -> GaussianState:
    """Two-mode state of (idler, acoustic) for write/store or (idler, retrieval) for readout."""
    if np.ndim(stage.t):
        raise ValueError("stage_state_entangled takes a scalar time; use entangled_stage_moments")
    if eta < 0:
        raise ValueError("source strength eta must be non-negative")
    V, u = entangled_stage_moments(stage, params, eta, phases)
    return GaussianState(V, u, check=False)


# ---------------------------------------------------------------------------
# transduction populations


def _strong_coupling_check(params):
    if not (params.g1 > params.gamma and params.g1 > params.Gamma):
        warnings.warn("population closed form assumes g > gamma, Gamma", ValidityWarning, stacklevel=3)


def transduction_populations_exact(params: SystemParams, n_a0: float, n_b0: float,
                                   k: float | None, t):
    """Photon and phonon numbers of the write-stage beam splitter with coupling ``g1``.

    Parameters
    ----------
    k : float or None
        Wave-number offset; ``None`` uses ``params`` (``Delta_sg``).
    t : float or array_like
    """
    if n_a0 < 0 or n_b0 < 0:
        raise ValueError("initial populations must be non-negative")
    _strong_coupling_check(params)
    g, gam, Gam = params.g1, params.gamma, params.Gamma
    n_th = params.n_th
    Da = params.Delta_sg if k is None else detunings_for_k(k, params.waveguide)[0]
    X = 8 * g**2 + 2 * Da**2 - (Gam - gam) ** 2 / 2
    # oscillation frequency of the populations: 2g in the lossless, resonant limit
    Om = 0.5 * np.sqrt(np.sqrt(X**2 + 4 * (Gam - gam) ** 2 * Da**2) + X)
    if not Om > 0:
        raise ValueError("populations do not oscillate (overdamped coupling); use the integrator")
    den = (4 * g**2 + gam * Gam) * (Gam + gam) ** 2 + 4 * gam * Gam * Da**2
    na_ss = 4 * g**2 * (Gam + gam) / den * Gam * n_th
    nb_ss = (4 * g**2 * (Gam + gam) + gam * (Gam + gam) ** 2 + 4 * gam * Da**2) / den * Gam * n_th
    O2 = Om**2
    A1 = ((-8 * g**2 + (Gam - gam) ** 2 + 4 * O2) / (4 * O2) * n_a0 + 2 * g**2 / O2 * n_b0
          - ((Gam + gam) ** 2 + 4 * O2) / (4 * O2) * na_ss)
    A2 = ((8 * g**2 - (Gam - gam) ** 2) / (4 * O2) * n_a0 - 2 * g**2 / O2 * n_b0
          + (Gam + gam) ** 2 / (4 * O2) * na_ss)
    A3 = (Gam - gam) / (2 * Om) * n_a0 - (Gam + gam) / (2 * Om) * na_ss
    B1 = (2 * g**2 / O2 * n_a0 + (-8 * g**2 + (Gam - gam) ** 2 + 4 * O2) / (4 * O2) * n_b0
          - ((Gam + gam) ** 2 + 4 * O2) / (4 * O2) * nb_ss + gam * Gam / O2 * n_th)
    B2 = (-2 * g**2 / O2 * n_a0 + (8 * g**2 - (Gam - gam) ** 2) / (4 * O2) * n_b0
          + (Gam + gam) ** 2 / (4 * O2) * nb_ss - gam * Gam / O2 * n_th)
    B3 = -(Gam - gam) / (2 * Om) * n_b0 + Gam / Om * n_th - (Gam + gam) / (2 * Om) * nb_ss
    t = np.asarray(t, dtype=float)
    env = np.exp(-(gam + Gam) / 2 * t)
    c, s = np.cos(Om * t), np.sin(Om * t)
    n_a = env * (A1 + A2 * c + A3 * s) + na_ss
    n_b = env * (B1 + B2 * c + B3 * s) + nb_ss
    if np.any(n_a < -1e-9) or np.any(n_b < -1e-9):
        warnings.warn("closed-form populations negative beyond round-off", ValidityWarning, stacklevel=2)
    return np.maximum(n_a, 0.0), np.maximum(n_b, 0.0)


def transduction_populations_approx(params: SystemParams, n_a0: float, n_b0: float,
                                    n_th: float, t):
    """Strong-coupling approximation of the photon and phonon numbers (coupling ``g1``)."""
    _strong_coupling_check(params)
    t = np.asarray(t, dtype=float)
    env = np.exp(-(params.gamma + params.Gamma) / 2 * t)
    c = np.cos(2 * params.g1 * t)
    heat = (1 - env) * n_th
    n_a = n_a0 / 2 * (1 + c) * env + n_b0 / 2 * (1 - c) * env + heat
    n_b = n_a0 / 2 * (1 - c) * env + n_b0 / 2 * (1 + c) * env + heat
    return n_a, n_b


def conversion_efficiency(params: SystemParams, t, k: float | None = None):
    """Fraction of the initial photon number found as phonons at time ``t``.

    Only the signal-driven part is counted: thermal phonons that would be
    present without any input photons are subtracted.
    """
    zero_t = params.with_updates(n_th_override=0.0)
    return transduction_populations_exact(zero_t, 1.0, 0.0, k, t)[1]


def conversion_efficiency_max(params: SystemParams) -> float:
    """Peak swap efficiency ``1 - pi (gamma + Gamma)/(4 g1)``, clamped to [0, 1]."""
    g = params.g1
    if not g > 0:
        raise ValueError("coupling must be positive")
    return float(np.clip(1 - np.pi * (params.gamma + params.Gamma) / (4 * g), 0.0, 1.0))


# ---------------------------------------------------------------------------
# main-text approximations


class SqueezingApprox(NamedTuple):
    var_write: np.ndarray
    var_write_min: float
    var_read: np.ndarray
    var_read_min: float


class EntanglementApprox(NamedTuple):
    lambda_write: np.ndarray
    E_N_write_max: float
    lambda_read: np.ndarray
    E_N_read_max: float


def approx_squeezing_metrics(params: SystemParams, r: float, g1: float, g2: float,
                             tau1: float, tau_s: float, t, *,
                             include_write_loss: bool = False) -> SqueezingApprox:
    """Strong-coupling approximations of the squeezed-quadrature variances.

    ``var_write(t)`` and ``var_read(t)`` are the time-dependent acoustic and
    retrieval variances; the ``*_min`` values are their minima at
    ``t = pi/(2g)``.  The readout expressions neglect storage decay and warn
    when ``Gamma tau_s > 0.1``.

    By default the readout squeezing decays only during the readout pulse,
    ``exp(-Gamma t/2)``.  With ``include_write_loss=True`` it also carries the
    acoustic decay of the write pulse, ``exp(-Gamma (tau1 + t)/2)``, which adds
    ``pi Gamma (1 - e^{-2r}) / (8 g1)`` to the minimum and brings the
    approximation in line with the exact closed form for ``g1 ~ 50 Gamma``.
    """
    if params.Gamma * tau_s > 0.1:
        warnings.warn("readout approximation assumes tau_s << 1/Gamma", ValidityWarning, stacklevel=2)
    Gam = params.Gamma
    heat = Gam * params.n_th
    t = np.asarray(t, dtype=float)
    sq = 1 - np.exp(-2 * r)
    env = np.exp(-Gam / 2 * t)
    var_write = 0.5 - sq / 2 * env * np.sin(g1 * t) ** 2 + heat / 2 * t
    var_write_min = 0.5 * np.exp(-2 * r) + np.pi / 4 * (heat / g1 + Gam / (2 * g1) * sq)
    s2 = np.sin(g2 * t) ** 2
    carried = np.exp(-Gam / 2 * tau1) if include_write_loss else 1.0
    var_read = 0.5 - sq / 2 * carried * env * s2 + heat * (t / 2 + np.pi / (4 * g1) * env * s2)
    loss = Gam / (2 * g2) + (Gam / (2 * g1) if include_write_loss else 0.0)
    var_read_min = 0.5 * np.exp(-2 * r) + np.pi / 4 * (heat / g1 + heat / g2 + loss * sq)
    return SqueezingApprox(var_write, float(var_write_min), var_read, float(var_read_min))


def approx_entanglement_metrics(params: SystemParams, g1: float, g2: float, tau1: float,
                                t) -> EntanglementApprox:
    """Strong-coupling approximations of ``lambda_-`` and the peak log-negativities.

    Valid in the limit of a strongly entangled source; the idler loss is
    neglected.  The oscillating write-stage term carries ``Gamma n_th/(2 g1)``,
    the coefficient that matches the exact ``lambda_-`` off the optimum.
    The ``E_N`` maxima are returned as printed, without clamping at zero.
    """
    Gam = params.Gamma
    n = params.n_th
    heat = Gam * n
    t = np.asarray(t, dtype=float)
    env = np.exp(-Gam / 2 * t)
    lam_w = 0.5 * (1 + 2 * n * (1 - env) + heat / (2 * g1) * env * np.sin(2 * g1 * t)) / (
        1 + env * np.sin(g1 * t) ** 2)
    e_w = -np.log(0.5 * (1 + np.pi * heat / (2 * g1)))
    s2 = np.sin(g2 * t) ** 2
    lam_r = (1 + 2 * n * (1 - env) - heat / 2 * env * (np.sin(2 * g2 * t) / g2 - np.pi * s2 / g1)) / (
        2 * (1 + np.exp(-Gam / 2 * (t + tau1)) * s2))
    e_r = -np.log(0.5 * (1 + np.pi * heat / (2 * g2) + np.pi * heat / (2 * g1) * np.exp(-np.pi * Gam / (4 * g2))))
    return EntanglementApprox(lam_w, float(e_w), lam_r, float(e_r))
