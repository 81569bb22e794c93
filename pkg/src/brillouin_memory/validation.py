"""Oracle-equivalence suite: closed forms against the moment integrator."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .analytic import (
    Phases,
    Readout,
    SqueezedCoherent,
    SqueezedThermal,
    SqueezedVacuum,
    Store,
    Write,
)
from .gaussian import GaussianState
from .params import TWO_PI, Environment, ModeSelector, StageCoupling, SystemParams, WaveguideParams
from .protocol import Entangled, ProtocolConfig, Schedule, _Analytic, _Numeric

__all__ = ["CheckResult", "ValidationReport", "random_strong_coupling_params", "run_validation",
           "PHYSICALITY_TOL"]

PHYSICALITY_TOL = 1e-7


@dataclass(frozen=True)
class CheckResult:
    draw: int
    scenario: str
    stage: str
    max_abs_error: float
    min_symplectic_eigenvalue: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    tolerance: float
    runtime_s: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_abs_error(self) -> float:
        return max((c.max_abs_error for c in self.checks), default=0.0)

    @property
    def min_symplectic_eigenvalue(self) -> float:
        return min((c.min_symplectic_eigenvalue for c in self.checks), default=np.inf)


def random_strong_coupling_params(rng: np.random.Generator) -> SystemParams:
    """Random parameter point with ``g1, g2`` between 50 and 200 ``Gamma``."""
    G = TWO_PI * rng.uniform(0.5, 2.0) * 1e6
    wg = WaveguideParams(gamma=rng.uniform(0.05, 0.5) * G, Gamma=G)
    return SystemParams(
        waveguide=wg,
        environment=Environment(rng.uniform(0.1, 4.0)),
        coupling=StageCoupling(rng.uniform(50, 200) * G, rng.uniform(50, 200) * G),
        modes=ModeSelector(k=rng.uniform(-0.5, 0.5) * G / wg.v_o,
                           gamma_smf=rng.uniform(0.0, 0.1) * G,
                           Delta_id=rng.uniform(-0.5, 0.5) * G),
    )


def _random_scenarios(rng):
    return [
        SqueezedVacuum(rng.uniform(0, 1.5), rng.uniform(0, 2 * np.pi)),
        SqueezedThermal(rng.uniform(0, 1.5), rng.uniform(0.3, 1.0), rng.uniform(0, 2 * np.pi)),
        SqueezedCoherent(rng.uniform(0, 1.5), complex(*rng.normal(0, 1, 2)), rng.uniform(0, 2 * np.pi)),
        Entangled(rng.uniform(0, 2)),
    ]


def _min_nu(V):
    return GaussianState(V, check=False).symplectic_eigenvalues().min()


def run_validation(n_draws: int = 50, seed: int = 0, tol: float = 1e-6) -> ValidationReport:
    """Compare closed-form and integrated stage states on random draws.

    Every draw checks all four scenarios at the write, store and readout
    stages with random pulse durations, storage time and frame phases.  A
    check passes if covariance and mean agree to ``tol`` per element and the
    closed-form state is physical to within :data:`PHYSICALITY_TOL`.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    rng = np.random.default_rng(seed)
    checks = []
    start = time.perf_counter()
    for draw in range(n_draws):
        p = random_strong_coupling_params(rng)
        tau1 = rng.uniform(0.5, 1.5) * np.pi / (2 * p.g1)
        tau_s = rng.uniform(0, 50e-9)
        tau2 = rng.uniform(0.5, 1.5) * np.pi / (2 * p.g2)
        phases = Phases(*rng.uniform(0, 2 * np.pi, 2))
        stages = {"write": Write(tau1), "store": Store(tau1, tau_s), "readout": Readout(tau1, tau_s, tau2)}
        for scn in _random_scenarios(rng):
            cfg = ProtocolConfig(scn, p, Schedule(tau1, tau_s, tau2), phases=phases)
            ana, num = _Analytic(cfg), _Numeric(cfg)
            for name, stage in stages.items():
                Va, ua = ana.evaluate(stage)
                Vn, un = num.evaluate(stage)
                err = float(max(np.max(np.abs(Va - Vn)), np.max(np.abs(ua - un))))
                nu = float(_min_nu(Va[0]))
                ok = err <= tol and nu >= 0.5 - PHYSICALITY_TOL
                checks.append(CheckResult(draw, type(scn).__name__, name, err, nu, ok))
    return ValidationReport(tuple(checks), tol, time.perf_counter() - start)
