"""Write / store / readout protocol, optimal pulse timing and ensemble fidelity."""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .analytic import (
    Phases,
    Readout,
    SqueezedCoherent,
    SqueezedThermal,
    SqueezedVacuum,
    Store,
    Write,
    closed_form_valid,
    entangled_stage_moments,
    squeezed_stage_moments,
)
from .dynamics import build_stage_system, integrate_moments
from .gaussian import (
    GaussianState,
    _fidelity_one_mode_arrays,
    _fidelity_two_mode_arrays,
    _lambda_minus_pt_arrays,
    _log_negativity_from_lambda,
    make_entangled_pair,
    rotation_matrix,
)
from .params import SystemParams, optimal_pulse_duration

__all__ = [
    "Entangled",
    "Schedule",
    "ProtocolConfig",
    "StageTrace",
    "ProtocolResult",
    "BoundaryExtremumWarning",
    "run_protocol",
    "find_extremum",
    "classical_benchmark",
    "EnsembleResult",
    "ensemble_average_fidelity",
    "sample_squeezing",
    "ENSEMBLE_CONVENTIONS",
    "BACKENDS",
]

BACKENDS = ("analytic", "numeric", "both")
ENSEMBLE_CONVENTIONS = ("complex", "real")


class BoundaryExtremumWarning(UserWarning):
    """The best sample of a curve lies on the edge of its window."""


@dataclass(frozen=True)
class Entangled:
    """Idler/signal pair source of strength ``eta``."""

    eta: float

    def state(self) -> GaussianState:
        return make_entangled_pair(self.eta)


Scenario = Union[SqueezedVacuum, SqueezedThermal, SqueezedCoherent, Entangled]


@dataclass(frozen=True)
class Schedule:
    """Pulse timing in seconds; ``None`` durations are chosen automatically."""

    tau1: Optional[float] = None
    tau_s: float = 0.0
    tau2: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.tau_s) and self.tau_s >= 0):
            raise ValueError("storage time must be finite and non-negative")
        for name in ("tau1", "tau2"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative")


@dataclass(frozen=True)
class ProtocolConfig:
    scenario: Scenario
    params: SystemParams = field(default_factory=SystemParams)
    schedule: Schedule = field(default_factory=Schedule)
    backend: str = "analytic"
    phases: Phases = field(default_factory=Phases)
    n_grid: int = 201
    record_traces: bool = True

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.n_grid < 3:
            raise ValueError("n_grid must be at least 3")
        if self.schedule.tau1 is None and not self.params.g1 > 0:
            raise ValueError("automatic write duration requires g1 > 0")
        if self.schedule.tau2 is None and not self.params.g2 > 0:
            raise ValueError("automatic readout duration requires g2 > 0")

    @property
    def entangled(self) -> bool:
        return isinstance(self.scenario, Entangled)


@dataclass(frozen=True, eq=False)
class StageTrace:
    """Figures of merit of one stage sampled on its time grid.

    ``variance`` and ``squeezing_factor`` refer to the X quadrature of the
    reported mode (squeezed scenarios); ``lambda_minus`` and ``log_negativity``
    to the idler/partner pair (entangled scenario).  Unused fields are NaN.
    """

    times: np.ndarray
    covs: np.ndarray
    means: np.ndarray
    fidelity: np.ndarray
    variance: np.ndarray
    squeezing_factor: np.ndarray
    lambda_minus: np.ndarray
    log_negativity: np.ndarray


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    config: ProtocolConfig
    tau1: float
    tau2: float
    initial_state: GaussianState
    write_state: GaussianState
    stored_state: GaussianState
    final_state: GaussianState
    stages: dict
    backend_used: str
    fallback: bool = False
    messages: tuple = ()
    backend_max_diff: Optional[float] = None

    def figures_of_merit(self, state: GaussianState) -> dict:
        """Fidelity, variance, squeezing and entanglement of a reported state."""
        V, u = state.cov[None], state.mean[None]
        return {k: float(v[0]) for k, v in _metrics(self.config, self.initial_state, V, u).items()}

    def summary(self) -> dict:
        """Scalar figures of merit at the chosen pulse durations."""
        w = self.figures_of_merit(self.write_state)
        s = self.figures_of_merit(self.stored_state)
        r = self.figures_of_merit(self.final_state)
        return {
            "tau1": self.tau1,
            "tau2": self.tau2,
            "F_write": w["fidelity"],
            "F_store": s["fidelity"],
            "F_read": r["fidelity"],
            "var_write": w["variance"],
            "var_read": r["variance"],
            "squeezing_factor_read": r["squeezing_factor"],
            "squeezing_factor_read_db": float(10 * np.log10(r["squeezing_factor"])),
            "E_N_write": w["log_negativity"],
            "E_N_read": r["log_negativity"],
            "backend": self.backend_used,
            "fallback": self.fallback,
            "backend_max_diff": np.nan if self.backend_max_diff is None else self.backend_max_diff,
        }


def classical_benchmark(beta: float) -> float:
    """Best measure-and-prepare average fidelity ``(1 + beta)/(2 + beta)``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return (1.0 + beta) / (2.0 + beta)


def find_extremum(times, values, kind: str = "min") -> tuple[float, float]:
    """Locate the extremum of a sampled curve with parabolic refinement.

    Parameters
    ----------
    times, values : array_like
        At least three samples of a curve that is unimodal in the window.
    kind : {"min", "max"}

    Returns
    -------
    (t_opt, value)

    Warns
    -----
    BoundaryExtremumWarning
        If the best sample is the first or last point of the window.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(t) < 3 or t.shape != y.shape:
        raise ValueError("need at least three samples with matching times")
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    sign = 1.0 if kind == "min" else -1.0
    z = sign * y
    i = int(np.argmin(z))
    if i == 0 or i == len(t) - 1:
        warnings.warn("extremum lies on the window boundary", BoundaryExtremumWarning, stacklevel=2)
        return float(t[i]), float(y[i])
    t0, t1, t2 = t[i - 1:i + 2]
    z0, z1, z2 = z[i - 1:i + 2]
    den = (t0 - t1) * (t0 - t2) * (t1 - t2)
    a = (t2 * (z1 - z0) + t1 * (z0 - z2) + t0 * (z2 - z1)) / den
    b = (t2**2 * (z0 - z1) + t1**2 * (z2 - z0) + t0**2 * (z1 - z2)) / den
    if a <= 0:
        return float(t1), float(y[i])
    tv = float(np.clip(-b / (2 * a), t0, t2))
    c = z1 - a * t1**2 - b * t1
    return tv, float(sign * (a * tv**2 + b * tv + c))


# ---------------------------------------------------------------------------
# figures of merit


def _metrics(config, initial, covs, means):
    n = len(covs)
    nan = np.full(n, np.nan)
    if config.entangled:
        lam = _lambda_minus_pt_arrays(covs)
        return {
            "fidelity": np.minimum(_fidelity_two_mode_arrays(initial.cov, covs), 1.0),
            "variance": nan,
            "squeezing_factor": nan,
            "lambda_minus": lam,
            "log_negativity": _log_negativity_from_lambda(lam),
        }
    fid = _fidelity_one_mode_arrays(initial.cov, initial.mean, covs, means)
    return {
        "fidelity": np.minimum(fid, 1.0),
        "variance": covs[:, 0, 0].copy(),
        "squeezing_factor": covs[:, 0, 0] / 0.5,
        "lambda_minus": nan,
        "log_negativity": nan,
    }


def _timing_metric(config, covs):
    """Curve minimised by automatic pulse timing."""
    if config.entangled:
        return _lambda_minus_pt_arrays(covs)
    # smallest quadrature variance, independent of the squeezing orientation
    tr = covs[:, 0, 0] + covs[:, 1, 1]
    det = covs[:, 0, 0] * covs[:, 1, 1] - covs[:, 0, 1] ** 2
    return 0.5 * (tr - np.sqrt(np.maximum(tr * tr - 4 * det, 0.0)))


def _trace(config, initial, times, covs, means):
    m = _metrics(config, initial, covs, means)
    return StageTrace(np.asarray(times, dtype=float), covs, means, **m)


# ---------------------------------------------------------------------------
# stage evaluators


class _Analytic:
    """Closed-form evaluation of reported states."""

    def __init__(self, config):
        self.config = config

    def evaluate(self, stage):
        c = self.config
        if c.entangled:
            V, u = entangled_stage_moments(stage, c.params, c.scenario.eta, c.phases)
        else:
            V, u = squeezed_stage_moments(c.scenario, stage, c.params, c.phases)
        if np.ndim(stage.t) == 0:
            V, u = V[None], u[None]
        return V, u


class _Numeric:
    """Moment-integrator evaluation; carries physical-frame states between stages."""

    def __init__(self, config):
        self.config = config
        c = config
        self.scn = "entangled" if c.entangled else "squeezed"
        default_b = 3 * np.pi / 2 if c.entangled else c.scenario.default_beta_b
        self.beta_b, self.beta_re = c.phases.resolve(default_b)
        self.systems = {s: build_stage_system(s, self.scn, c.params) for s in ("write", "store", "readout")}
        self._cache = {}

    # mode index sets of the reported subsystem in each stage
    def _report_idx(self, stage_name):
        if self.scn == "squeezed":
            return {"write": [2, 3], "store": [0, 1], "readout": [0, 1]}[stage_name]
        return {"write": [0, 1, 4, 5], "store": [0, 1, 2, 3], "readout": [0, 1, 2, 3]}[stage_name]

    def _frame(self, covs, means, beta):
        n = covs.shape[-1]
        S = np.eye(n)
        S[n - 2:, n - 2:] = rotation_matrix(beta)
        return S @ covs @ S.T, means @ S.T

    def _run(self, stage_name, initial, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        grid = times if times[0] == 0 else np.concatenate([[0.0], times])
        if len(grid) == 1:
            covs, means = initial.cov[None], initial.mean[None]
        else:
            traj = integrate_moments(self.systems[stage_name], initial, grid)
            covs, means = traj.covs, traj.means
        if times[0] != 0:
            covs, means = covs[1:], means[1:]
        idx = self._report_idx(stage_name)
        return covs[:, idx][:, :, idx], means[:, idx]

    def _embed(self, parts, n_modes):
        V = 0.5 * np.eye(2 * n_modes)
        u = np.zeros(2 * n_modes)
        for idx, st in parts:
            V[np.ix_(idx, idx)] = st.cov
            u[idx] = st.mean
        return GaussianState(V, u, check=False)

    def _write_initial(self):
        sig = self.config.scenario.state()
        if self.scn == "squeezed":
            return self._embed([([0, 1], sig)], 2)
        return self._embed([([0, 1, 2, 3], sig)], 3)

    def _after_write(self, tau1):
        key = ("w", tau1)
        if key not in self._cache:
            V, u = self._run("write", self._write_initial(), [tau1])
            self._cache[key] = GaussianState(V[0], u[0], check=False)
        return self._cache[key]

    def _after_store(self, tau1, tau_s):
        key = ("s", tau1, tau_s)
        if key not in self._cache:
            V, u = self._run("store", self._after_write(tau1), [tau_s])
            self._cache[key] = GaussianState(V[0], u[0], check=False)
        return self._cache[key]

    def _readout_initial(self, stored):
        if self.scn == "squeezed":
            return self._embed([([2, 3], stored)], 2)
        return self._embed([([0, 1, 4, 5], stored)], 3)

    def evaluate(self, stage):
        if isinstance(stage, Write):
            V, u = self._run("write", self._write_initial(), stage.t)
            return self._frame(V, u, self.beta_b)
        if isinstance(stage, Store):
            V, u = self._run("store", self._after_write(stage.tau1), stage.t)
            return self._frame(V, u, self.beta_b)
        init = self._readout_initial(self._after_store(stage.tau1, stage.tau_s))
        V, u = self._run("readout", init, stage.t)
        return self._frame(V, u, self.beta_re)


def _auto_time(config, evaluator, make_stage, window, nominal, label, messages):
    times = np.linspace(0.0, window, config.n_grid)
    V, _ = evaluator.evaluate(make_stage(times))
    metric = _timing_metric(config, V)
    if np.ptp(metric) <= 1e-12 * max(1.0, np.max(np.abs(metric))):
        messages.append(f"{label}: flat timing metric, using pi/(2g)")
        return nominal
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryExtremumWarning)
        try:
            t_opt, _ = find_extremum(times, metric, "min")
        except BoundaryExtremumWarning:
            messages.append(f"{label}: optimum on window boundary, using pi/(2g)")
            return nominal
    return t_opt


def _run_with(config, evaluator):
    p = config.params
    sch = config.schedule
    messages = []
    initial = config.scenario.state()

    if sch.tau1 is None:
        nominal1 = optimal_pulse_duration(p.g1)
        tau1 = _auto_time(config, evaluator, Write, 2 * nominal1, nominal1, "write", messages)
    else:
        tau1 = sch.tau1
    if sch.tau2 is None:
        nominal2 = optimal_pulse_duration(p.g2)
        tau2 = _auto_time(config, evaluator, lambda t: Readout(tau1, sch.tau_s, t),
                          2 * nominal2, nominal2, "readout", messages)
    else:
        tau2 = sch.tau2

    def span(tau, g):
        return max(tau, 2 * optimal_pulse_duration(g)) if g > 0 else tau

    grids = {
        "write": np.linspace(0.0, span(tau1, p.g1), config.n_grid),
        "store": np.linspace(0.0, sch.tau_s, config.n_grid) if sch.tau_s > 0 else np.zeros(1),
        "readout": np.linspace(0.0, span(tau2, p.g2), config.n_grid),
    }
    makers = {
        "write": Write,
        "store": lambda t: Store(tau1, t),
        "readout": lambda t: Readout(tau1, sch.tau_s, t),
    }
    stages = {}
    for name, grid in (grids.items() if config.record_traces else ()):
        if len(grid) > 1 and grid[-1] == 0:
            grid = np.zeros(1)
        V, u = evaluator.evaluate(makers[name](grid))
        stages[name] = _trace(config, initial, grid, V, u)

    def at(stage):
        V, u = evaluator.evaluate(stage)
        return GaussianState(V[0], u[0], check=False)

    return dict(
        tau1=float(tau1), tau2=float(tau2), initial_state=initial,
        write_state=at(Write(tau1)), stored_state=at(Store(tau1, sch.tau_s)),
        final_state=at(Readout(tau1, sch.tau_s, tau2)), stages=stages,
        messages=tuple(messages),
    )


def _max_diff(a, b):
    return max(
        float(np.max(np.abs(a[k].cov - b[k].cov))) for k in ("write_state", "stored_state", "final_state")
    )


def run_protocol(config: ProtocolConfig) -> ProtocolResult:
    """Propagate the input state through write, storage and readout.

    Automatic durations start at ``pi/(2g)`` and are refined by
    :func:`find_extremum` on the smallest quadrature variance (squeezed
    scenarios) or on ``lambda_-`` (entangled scenario), searched over
    ``[0, pi/g]``.  Fidelities are taken against the input signal (or the
    input idler/signal pair).
    """
    backend = config.backend
    fallback = False
    pre = []
    if backend in ("analytic", "both") and not closed_form_valid(config.params):
        pre.append("closed form invalid for these parameters; using the moment integrator")
        fallback = True
        backend = "numeric"
    if backend == "numeric":
        res = _run_with(config, _Numeric(config))
        used, diff = "numeric", None
    elif backend == "analytic":
        res = _run_with(config, _Analytic(config))
        used, diff = "analytic", None
    else:
        res = _run_with(config, _Analytic(config))
        fixed = replace(config, schedule=Schedule(res["tau1"], config.schedule.tau_s, res["tau2"]))
        num = _run_with(fixed, _Numeric(fixed))
        used, diff = "both", _max_diff(res, num)
    res["messages"] = tuple(pre) + res["messages"]
    return ProtocolResult(config=config, backend_used=used, fallback=fallback,
                          backend_max_diff=diff, **res)


# ---------------------------------------------------------------------------
# ensemble


@dataclass(frozen=True)
class EnsembleResult:
    F_mean: float
    F_stderr: float
    exceeds_benchmark: bool
    benchmark: float
    beta: float
    n_samples: int
    convention: str


def sample_squeezing(beta: float, n_samples: int, seed: int, convention: str = "complex"):
    """Draw squeezing magnitudes and orientations for the random-phase ensemble.

    ``complex``: ``r`` is a complex Gaussian with density ``exp(-beta |r|^2)/(pi/beta)``,
    so ``|r|`` has density ``2 beta r exp(-beta r^2)``.  ``real``: ``r`` is a real
    Gaussian with variance ``1/(2 beta)`` and ``|r|`` is used.  In both cases the
    squeezing phase ``phi`` is uniform on ``[0, 2 pi)`` and rotates the squeezing
    axis by ``phi/2``.

    Returns
    -------
    (r, angle) : arrays of magnitudes and quadrature rotation angles
    """
    if convention not in ENSEMBLE_CONVENTIONS:
        raise ValueError(f"convention must be one of {ENSEMBLE_CONVENTIONS}")
    if not beta > 0:
        raise ValueError("beta must be positive")
    rng = np.random.default_rng(seed)
    if convention == "complex":
        r = np.sqrt(rng.exponential(1.0 / beta, n_samples))
    else:
        r = np.abs(rng.normal(0.0, np.sqrt(1.0 / (2.0 * beta)), n_samples))
    phi = rng.uniform(0.0, 2 * np.pi, n_samples)
    return r, phi / 2


def _sample_fidelity(args):
    config, r, angle = args
    cfg = replace(config, scenario=SqueezedVacuum(float(r), float(angle)), record_traces=False)
    return run_protocol(cfg).summary()["F_read"]


def ensemble_average_fidelity(config: ProtocolConfig, beta: float, n_samples: int, seed: int,
                              convention: str = "complex", jobs: int = 1) -> EnsembleResult:
    """Average retrieval fidelity over randomly oriented squeezed vacua.

    Samples are drawn up front from a seeded generator and reduced in sample
    order, so the result is independent of ``jobs``.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    r, angle = sample_squeezing(beta, n_samples, seed, convention)
    tasks = [(config, ri, ai) for ri, ai in zip(r, angle)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fids = list(pool.map(_sample_fidelity, tasks, chunksize=max(1, n_samples // (8 * jobs))))
    else:
        fids = [_sample_fidelity(t) for t in tasks]
    fids = np.asarray(fids)
    mean = float(np.mean(fids))
    stderr = float(np.std(fids, ddof=1) / np.sqrt(n_samples))
    bench = classical_benchmark(beta)
    return EnsembleResult(mean, stderr, bool(mean - stderr > bench), bench, beta, n_samples, convention)
