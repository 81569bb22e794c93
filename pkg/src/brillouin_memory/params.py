"""Physical rates, environment and derived scalars.

All rates are angular (rad/s), times in seconds, temperatures in kelvin.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import constants

__all__ = [
    "WaveguideParams",
    "Environment",
    "StageCoupling",
    "ModeSelector",
    "SystemParams",
    "thermal_occupation",
    "detunings_for_k",
    "heating_rate",
    "optimal_pulse_duration",
    "coupling_for_pulse",
    "TWO_PI",
]

TWO_PI = 2.0 * np.pi


def _check_positive(**values):
    for name, v in values.items():
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be finite and strictly positive, got {v!r}")


@dataclass(frozen=True)
class WaveguideParams:
    """Loss rates, group velocities and acoustic frequency of the waveguide.

    Defaults are representative of a chalcogenide waveguide with
    ``Gamma/2pi = 1 MHz``, ``gamma = 0.2 Gamma`` and ``Omega_ac/2pi = 7.6 GHz``.
    """

    gamma: float = TWO_PI * 0.2e6
    Gamma: float = TWO_PI * 1.0e6
    v_o: float = 1.2e8
    v_ac: float = 2.6e3
    Omega_ac: float = TWO_PI * 7.6e9

    def __post_init__(self):
        _check_positive(gamma=self.gamma, Gamma=self.Gamma, v_o=self.v_o,
                        v_ac=self.v_ac, Omega_ac=self.Omega_ac)
        if not self.v_ac < self.v_o:
            raise ValueError("acoustic group velocity must be below the optical one")


@dataclass(frozen=True)
class Environment:
    T_en: float = 1.0

    def __post_init__(self):
        _check_positive(T_en=self.T_en)


@dataclass(frozen=True)
class StageCoupling:
    """Effective optoacoustic coupling during the write (``g1``) and readout (``g2``) pulses."""

    g1: float
    g2: float

    def __post_init__(self):
        for name in ("g1", "g2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v!r}")


@dataclass(frozen=True)
class ModeSelector:
    """Wave-number offset, reference-fibre loss and optional detuning overrides."""

    k: float = 0.0
    gamma_smf: float = 0.0
    Delta_id: Optional[float] = None
    Delta_sg: Optional[float] = None
    Delta_re: Optional[float] = None
    Delta_ac: Optional[float] = None

    def __post_init__(self):
        for name in ("k", "gamma_smf", "Delta_id", "Delta_sg", "Delta_re", "Delta_ac"):
            v = getattr(self, name)
            if v is not None and not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.gamma_smf < 0:
            raise ValueError("gamma_smf must be non-negative")


def thermal_occupation(Omega_ac: float, T_en: float) -> float:
    """Bose-Einstein occupation ``1/(exp(hbar Omega / k_B T) - 1)``."""
    _check_positive(Omega_ac=Omega_ac, T_en=T_en)
    x = constants.hbar * Omega_ac / (constants.k * T_en)
    if x > 700:
        return 0.0
    return float(1.0 / np.expm1(x))


def detunings_for_k(k: float, params: WaveguideParams) -> tuple[float, float]:
    """Group-velocity frequency shifts ``(k v_o, k v_ac)`` of a wave-number offset."""
    return k * params.v_o, k * params.v_ac


def heating_rate(Gamma: float, n_th: float) -> float:
    """Environment-induced decoherence rate ``Gamma n_th``."""
    return Gamma * n_th


def optimal_pulse_duration(g: float) -> float:
    """Duration ``pi/(2g)`` of a complete photon-phonon swap."""
    if not g > 0:
        raise ValueError(f"coupling must be positive, got {g!r}")
    return np.pi / (2.0 * g)


def coupling_for_pulse(duration: float) -> float:
    """Coupling whose swap duration is ``duration`` (inverse of :func:`optimal_pulse_duration`)."""
    _check_positive(duration=duration)
    return np.pi / (2.0 * duration)


@dataclass(frozen=True)
class SystemParams:
    """Aggregate of all physical inputs of one protocol run."""

    waveguide: WaveguideParams = field(default_factory=WaveguideParams)
    environment: Environment = field(default_factory=Environment)
    coupling: StageCoupling = field(default_factory=lambda: StageCoupling(TWO_PI * 100e6, TWO_PI * 100e6))
    modes: ModeSelector = field(default_factory=ModeSelector)
    n_th_override: Optional[float] = None

    def __post_init__(self):
        if self.n_th_override is not None and not (np.isfinite(self.n_th_override)
                                                   and self.n_th_override >= 0):
            raise ValueError("n_th_override must be finite and non-negative")

    @property
    def gamma(self) -> float:
        return self.waveguide.gamma

    @property
    def Gamma(self) -> float:
        return self.waveguide.Gamma

    @property
    def g1(self) -> float:
        return self.coupling.g1

    @property
    def g2(self) -> float:
        return self.coupling.g2

    @property
    def gamma_smf(self) -> float:
        return self.modes.gamma_smf

    @property
    def n_th(self) -> float:
        if self.n_th_override is not None:
            return self.n_th_override
        return thermal_occupation(self.waveguide.Omega_ac, self.environment.T_en)

    @property
    def Delta_as(self) -> float:
        return detunings_for_k(self.modes.k, self.waveguide)[0]

    @property
    def Delta_ac(self) -> float:
        if self.modes.Delta_ac is not None:
            return self.modes.Delta_ac
        return detunings_for_k(self.modes.k, self.waveguide)[1]

    @property
    def Delta_sg(self) -> float:
        return self.Delta_as if self.modes.Delta_sg is None else self.modes.Delta_sg

    @property
    def Delta_re(self) -> float:
        return self.Delta_as if self.modes.Delta_re is None else self.modes.Delta_re

    @property
    def Delta_id(self) -> float:
        return 0.0 if self.modes.Delta_id is None else self.modes.Delta_id

    def with_updates(self, **changes) -> "SystemParams":
        """Copy with fields of the nested records replaced by keyword."""
        groups = {"waveguide": {}, "environment": {}, "coupling": {}, "modes": {}}
        top = {}
        for key, value in changes.items():
            for group in groups:
                if key in getattr(self, group).__dataclass_fields__:
                    groups[group][key] = value
                    break
            else:
                if key in self.__dataclass_fields__:
                    top[key] = value
                else:
                    raise KeyError(f"unknown parameter {key!r}")
        for group, vals in groups.items():
            if vals:
                top[group] = replace(getattr(self, group), **vals)
        return replace(self, **top)

    @classmethod
    def from_ratios(cls, g1_over_Gamma, g2_over_Gamma=None, *, Gamma=TWO_PI * 1e6,
                    gamma_over_Gamma=0.2, T_en=1.0, Delta_as_over_Gamma=0.0, **modes):
        """Convenience constructor with couplings and detuning in units of ``Gamma``."""
        if g2_over_Gamma is None:
            g2_over_Gamma = g1_over_Gamma
        wg = WaveguideParams(gamma=gamma_over_Gamma * Gamma, Gamma=Gamma)
        k = Delta_as_over_Gamma * Gamma / wg.v_o
        return cls(
            waveguide=wg,
            environment=Environment(T_en),
            coupling=StageCoupling(g1_over_Gamma * Gamma, g2_over_Gamma * Gamma),
            modes=ModeSelector(k=k, **modes),
        )
