"""Scenario files: INI documents with unit-suffixed keys.

Every dimensioned key carries its unit in the name, e.g. ``Gamma_over_2pi_MHz``
(a frequency ``Gamma/2pi`` in MHz), ``Gamma_rad_per_s``, ``g1_over_Gamma`` or
``tau_s_ns``.  Values are converted once, at parse time, to rad/s, seconds and
kelvin.  :func:`serialize_scenario` writes the resolved values back in SI
units, so a parse/serialize round trip reproduces the same configuration hash.

Example
-------
::

    [waveguide]
    Gamma_over_2pi_MHz = 1
    gamma_over_Gamma = 0.2

    [environment]
    T_en_K = 1

    [coupling]
    g1_over_Gamma = 100

    [scenario]
    type = squeezed_vacuum
    r = 1

    [schedule]
    tau_s_ns = 5
"""
from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .analytic import Phases, SqueezedCoherent, SqueezedThermal, SqueezedVacuum
from .params import (
    TWO_PI,
    Environment,
    ModeSelector,
    StageCoupling,
    SystemParams,
    WaveguideParams,
    coupling_for_pulse,
)
from .protocol import BACKENDS, ENSEMBLE_CONVENTIONS, Entangled, ProtocolConfig, Schedule

__all__ = [
    "ScenarioError",
    "ParsedScenario",
    "SweepSpec",
    "EnsembleSpec",
    "SWEEP_AXES",
    "SCENARIO_TYPES",
    "parse_scenario",
    "load_scenario",
    "serialize_scenario",
    "apply_axis",
]

SCENARIO_TYPES = ("squeezed_vacuum", "squeezed_thermal", "squeezed_coherent", "entangled")

SWEEP_AXES = (
    "Delta_as_over_Gamma",
    "k_per_m",
    "T_en_K",
    "g_over_Gamma",
    "g1_over_Gamma",
    "g2_over_Gamma",
    "tau_s_ns",
    "eta",
    "r",
)


class ScenarioError(ValueError):
    """Invalid scenario document; the message names the offending key and line."""

    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where = f"key {key!r}"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)
        self.key = key
        self.line = line


# ---------------------------------------------------------------------------
# unit families

_FREQ = {
    "over_2pi_Hz": lambda v, G: TWO_PI * v,
    "over_2pi_kHz": lambda v, G: TWO_PI * 1e3 * v,
    "over_2pi_MHz": lambda v, G: TWO_PI * 1e6 * v,
    "over_2pi_GHz": lambda v, G: TWO_PI * 1e9 * v,
    "rad_per_s": lambda v, G: v,
}
_RATE = dict(_FREQ, over_Gamma=lambda v, G: v * G)
_TIME = {
    "s": lambda v, G: v,
    "ms": lambda v, G: 1e-3 * v,
    "us": lambda v, G: 1e-6 * v,
    "ns": lambda v, G: 1e-9 * v,
}
_COUPLING = dict(_RATE, **{f"pulse_{u}": (lambda f: lambda v, G: coupling_for_pulse(f(v, G)))(f)
                           for u, f in _TIME.items()})
_NONE = {"": lambda v, G: v}

# section -> base -> (unit family, kind); kind: "pos", "nonneg", "real", "auto_time", "str", "int"
_SCHEMA = {
    "waveguide": {
        "Gamma": (_FREQ, "pos"),
        "gamma": (_RATE, "pos"),
        "Omega_ac": (_FREQ, "pos"),
        "v_o": ({"m_per_s": lambda v, G: v}, "pos"),
        "v_ac": ({"m_per_s": lambda v, G: v}, "pos"),
    },
    "environment": {
        "T_en": ({"K": lambda v, G: v}, "pos"),
        "n_th": (_NONE, "nonneg"),
    },
    "coupling": {
        "g1": (_COUPLING, "nonneg"),
        "g2": (_COUPLING, "nonneg"),
    },
    "scenario": {
        "type": (_NONE, "str"),
        "r": (_NONE, "nonneg"),
        "u": (_NONE, "pos"),
        "alpha_re": (_NONE, "real"),
        "alpha_im": (_NONE, "real"),
        "eta": (_NONE, "nonneg"),
        "phase": ({"rad": lambda v, G: v}, "real"),
        "beta_b": ({"rad": lambda v, G: v}, "real"),
        "beta_re": ({"rad": lambda v, G: v}, "real"),
        "k": ({"per_m": lambda v, G: v}, "real"),
        "Delta_as": ({"over_Gamma": lambda v, G: v}, "real"),
        "gamma_smf": (_RATE, "nonneg"),
        "Delta_id": (_RATE, "real"),
        "Delta_sg": (_RATE, "real"),
        "Delta_re": (_RATE, "real"),
        "Delta_ac": (_RATE, "real"),
        "ensemble_beta": (_NONE, "pos"),
        "ensemble_samples": (_NONE, "int"),
        "ensemble_convention": (_NONE, "str"),
        "ensemble_target_F": (_NONE, "pos"),
        "ensemble_target_tol": (_NONE, "pos"),
    },
    "schedule": {
        "tau1": (_TIME, "auto_time"),
        "tau_s": (_TIME, "nonneg"),
        "tau2": (_TIME, "auto_time"),
        "backend": (_NONE, "str"),
        "n_grid": (_NONE, "int"),
    },
    "sweep": {
        "axis1": (_NONE, "str"),
        "grid1": (_NONE, "str"),
        "axis2": (_NONE, "str"),
        "grid2": (_NONE, "str"),
    },
    "output": {
        "seed": (_NONE, "int"),
    },
}

_REQUIRED = {
    "waveguide": ("Gamma", "gamma"),
    "environment": ("T_en",),
    "coupling": ("g1",),
    "scenario": ("type",),
}
_REQUIRED_BY_TYPE = {
    "squeezed_vacuum": ("r",),
    "squeezed_thermal": ("r", "u"),
    "squeezed_coherent": ("r", "alpha_re"),
    "entangled": ("eta",),
}


def _split_key(section, key):
    """Return ``(base, unit)`` for a key; raise for unknown keys or unit mismatches."""
    bases = _SCHEMA[section]
    # longest base first so that e.g. "gamma_smf" wins over "gamma"
    for base in sorted(bases, key=len, reverse=True):
        family = bases[base][0]
        if key == base:
            if "" in family or bases[base][1] == "auto_time":
                return base, ""
            raise ScenarioError(f"missing unit suffix; expected one of "
                                f"{', '.join(base + '_' + u for u in family)}", key)
        if key.startswith(base + "_"):
            unit = key[len(base) + 1:]
            if unit in family:
                return base, unit
            if any(key.startswith(b + "_") and key[len(b) + 1:] in bases[b][0]
                   for b in bases if b != base):
                continue
            if "" in family:
                continue
            raise ScenarioError(f"unit mismatch; {base!r} accepts "
                                f"{', '.join(base + '_' + u for u in family)}", key)
    raise ScenarioError(f"unknown key in section [{section}]", key)


def _line_numbers(text):
    """Map ``(section, key)`` to the 1-based line where the key is defined."""
    lines = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None and not raw[:1].isspace():
            lines.setdefault((section, m.group(1).strip()), i)
    return lines


# ---------------------------------------------------------------------------
# resolved records


@dataclass(frozen=True)
class SweepSpec:
    """One or two sweep axes with explicit, sorted grids."""

    axes: tuple = ()

    def __post_init__(self):
        for name, values in self.axes:
            if name not in SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {name!r}")
            if len(values) == 0:
                raise ValueError(f"sweep axis {name!r} has an empty grid")

    @property
    def names(self) -> tuple:
        return tuple(a[0] for a in self.axes)

    def points(self) -> list:
        """Grid points in lexicographic order of the axis values."""
        if not self.axes:
            return [()]
        grids = [sorted(v) for _, v in self.axes]
        return [tuple(p) for p in np.array(np.meshgrid(*grids, indexing="ij")).reshape(len(grids), -1).T]


@dataclass(frozen=True)
class EnsembleSpec:
    beta: float = 1.0
    n_samples: int = 10_000
    conventions: tuple = ENSEMBLE_CONVENTIONS
    target_F: Optional[float] = None
    target_tol: float = 0.03


@dataclass(frozen=True)
class ParsedScenario:
    config: ProtocolConfig
    sweep: SweepSpec
    ensemble: EnsembleSpec
    seed: int
    canonical: dict = field(repr=False)

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical (SI-unit) parameter set."""
        blob = json.dumps(self.canonical, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_grid(text, key, line):
    text = text.strip()
    m = re.fullmatch(r"(linspace|logspace)\(\s*([^,]+),\s*([^,]+),\s*([^,\)]+)\)", text)
    try:
        if m:
            a, b, n = float(m.group(2)), float(m.group(3)), int(m.group(4))
            if n < 1:
                raise ScenarioError("grid of size 0", key, line)
            fn = np.linspace if m.group(1) == "linspace" else np.geomspace
            return [float(x) for x in fn(a, b, n)]
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ScenarioError(f"cannot parse grid: {exc}", key, line) from None
    if not values:
        raise ScenarioError("grid of size 0", key, line)
    if not all(np.isfinite(values)):
        raise ScenarioError("grid values must be finite", key, line)
    return values


def parse_scenario(text: str) -> ParsedScenario:
    """Parse a scenario document into a protocol configuration and sweep.

    Raises
    ------
    ScenarioError
        For unknown keys, missing required keys, unit mismatches and invalid
        values; the message names the key and its line.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ScenarioError("duplicate key", exc.option, exc.lineno) from None
    except configparser.Error as exc:
        raise ScenarioError(f"malformed document: {exc}") from None
    lines = _line_numbers(text)

    raw = {}  # (section, base) -> (unit, value string, key, line)
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ScenarioError(f"unknown section [{section}]", line=None)
        for key, value in cp.items(section):
            line = lines.get((section, key))
            try:
                base, unit = _split_key(section, key)
            except ScenarioError as exc:
                raise ScenarioError(str(exc).split(": ", 1)[1], key, line) from None
            if (section, base) in raw:
                raise ScenarioError(f"{base!r} given twice with different units", key, line)
            raw[(section, base)] = (unit, value.strip(), key, line)

    for section, bases in _REQUIRED.items():
        for base in bases:
            if (section, base) not in raw:
                raise ScenarioError(f"missing required key [{section}] {base}_<unit>", base)

    def get(section, base, Gamma=None, default=None):
        if (section, base) not in raw:
            return default
        unit, value, key, line = raw[(section, base)]
        family, kind = _SCHEMA[section][base]
        if kind == "str":
            return value
        if kind == "auto_time" and value.lower() == "auto":
            return None
        if unit == "" and family is not _NONE:
            raise ScenarioError(f"missing unit suffix; only 'auto' may be given without one", key, line)
        try:
            number = int(value) if kind == "int" else float(value)
        except ValueError:
            raise ScenarioError(f"expected a number, got {value!r}", key, line) from None
        if not np.isfinite(number):
            raise ScenarioError("value must be finite", key, line)
        if kind == "pos" and not number > 0:
            raise ScenarioError(f"value must be positive, got {value}", key, line)
        if kind in ("nonneg", "auto_time") and number < 0:
            raise ScenarioError(f"value must be non-negative, got {value}", key, line)
        if unit.startswith("pulse_") and not number > 0:
            raise ScenarioError(f"pulse duration must be positive, got {value}", key, line)
        return float(family[unit](number, Gamma)) if kind != "int" else number

    def key_line(section, base):
        entry = raw.get((section, base))
        return (entry[2], entry[3]) if entry else (base, None)

    Gamma = get("waveguide", "Gamma")
    defaults = WaveguideParams()
    wg_vals = dict(
        Gamma=Gamma,
        gamma=get("waveguide", "gamma", Gamma),
        Omega_ac=get("waveguide", "Omega_ac", Gamma, defaults.Omega_ac),
        v_o=get("waveguide", "v_o", Gamma, defaults.v_o),
        v_ac=get("waveguide", "v_ac", Gamma, defaults.v_ac),
    )
    try:
        wg = WaveguideParams(**wg_vals)
    except ValueError as exc:
        raise ScenarioError(str(exc), *key_line("waveguide", "v_ac")) from None
    env = Environment(get("environment", "T_en", Gamma))
    n_th = get("environment", "n_th", Gamma)
    g1 = get("coupling", "g1", Gamma)
    g2 = get("coupling", "g2", Gamma, g1)
    coupling = StageCoupling(g1, g2)

    kind = get("scenario", "type")
    if kind not in SCENARIO_TYPES:
        raise ScenarioError(f"scenario type must be one of {SCENARIO_TYPES}, got {kind!r}",
                            *key_line("scenario", "type"))
    for base in _REQUIRED_BY_TYPE[kind]:
        if ("scenario", base) not in raw:
            raise ScenarioError(f"missing required key for {kind} scenario", base)
    if ("scenario", "k") in raw and ("scenario", "Delta_as") in raw:
        raise ScenarioError("give either k_per_m or Delta_as_over_Gamma, not both",
                            *key_line("scenario", "Delta_as"))
    k = get("scenario", "k", Gamma, 0.0)
    if ("scenario", "Delta_as") in raw:
        k = get("scenario", "Delta_as", Gamma) * Gamma / wg.v_o
    modes = ModeSelector(
        k=k,
        gamma_smf=get("scenario", "gamma_smf", Gamma, 0.0),
        Delta_id=get("scenario", "Delta_id", Gamma),
        Delta_sg=get("scenario", "Delta_sg", Gamma),
        Delta_re=get("scenario", "Delta_re", Gamma),
        Delta_ac=get("scenario", "Delta_ac", Gamma),
    )
    params = SystemParams(wg, env, coupling, modes, n_th_override=n_th)

    r = get("scenario", "r", Gamma)
    phase = get("scenario", "phase", Gamma, 0.0)
    if kind == "squeezed_vacuum":
        scenario = SqueezedVacuum(r, phase)
    elif kind == "squeezed_thermal":
        u = get("scenario", "u", Gamma)
        if u > 1:
            raise ScenarioError("purity u must lie in (0, 1]", *key_line("scenario", "u"))
        scenario = SqueezedThermal(r, u, phase)
    elif kind == "squeezed_coherent":
        alpha = complex(get("scenario", "alpha_re", Gamma), get("scenario", "alpha_im", Gamma, 0.0))
        scenario = SqueezedCoherent(r, alpha, phase)
    else:
        scenario = Entangled(get("scenario", "eta", Gamma))
    phases = Phases(get("scenario", "beta_b", Gamma), get("scenario", "beta_re", Gamma))

    tau1 = get("schedule", "tau1", Gamma)
    tau2 = get("schedule", "tau2", Gamma)
    tau_s = get("schedule", "tau_s", Gamma, 0.0)
    backend = get("schedule", "backend", Gamma, "analytic")
    if backend not in BACKENDS:
        raise ScenarioError(f"backend must be one of {BACKENDS}", *key_line("schedule", "backend"))
    n_grid = get("schedule", "n_grid", Gamma, 201)
    if n_grid < 3:
        raise ScenarioError("n_grid must be at least 3", *key_line("schedule", "n_grid"))
    for base, g in (("tau1", g1), ("tau2", g2)):
        if get("schedule", base, Gamma) is None and not g > 0:
            raise ScenarioError("automatic duration requires a positive coupling", *key_line("schedule", base))
    config = ProtocolConfig(scenario, params, Schedule(tau1, tau_s, tau2), backend, phases, n_grid)

    axes = []
    for i in (1, 2):
        name = get("sweep", f"axis{i}")
        grid_entry = raw.get(("sweep", f"grid{i}"))
        if name is None and grid_entry is None:
            continue
        if name is None or grid_entry is None:
            missing = f"grid{i}" if name is not None else f"axis{i}"
            raise ScenarioError("sweep axis needs both axis and grid keys", missing)
        if name not in SWEEP_AXES:
            raise ScenarioError(f"sweep axis must be one of {SWEEP_AXES}", *key_line("sweep", f"axis{i}"))
        axes.append((name, tuple(_parse_grid(grid_entry[1], grid_entry[2], grid_entry[3]))))
    if len(axes) == 2 and axes[0][0] == axes[1][0]:
        raise ScenarioError("sweep axes must differ", *key_line("sweep", "axis2"))
    sweep = SweepSpec(tuple(axes))

    conv = get("scenario", "ensemble_convention", Gamma, "both")
    if conv not in ENSEMBLE_CONVENTIONS + ("both",):
        raise ScenarioError(f"ensemble convention must be one of {ENSEMBLE_CONVENTIONS} or 'both'",
                            *key_line("scenario", "ensemble_convention"))
    n_samples = get("scenario", "ensemble_samples", Gamma, 10_000)
    if n_samples < 100:
        raise ScenarioError("at least 100 ensemble samples are required",
                            *key_line("scenario", "ensemble_samples"))
    ensemble = EnsembleSpec(
        beta=get("scenario", "ensemble_beta", Gamma, 1.0),
        n_samples=n_samples,
        conventions=ENSEMBLE_CONVENTIONS if conv == "both" else (conv,),
        target_F=get("scenario", "ensemble_target_F", Gamma),
        target_tol=get("scenario", "ensemble_target_tol", Gamma, 0.03),
    )
    seed = get("output", "seed", Gamma, 0)
    if seed < 0:
        raise ScenarioError("seed must be non-negative", *key_line("output", "seed"))

    parsed = ParsedScenario(config, sweep, ensemble, seed, {})
    return replace(parsed, canonical=_canonical(parsed))


def load_scenario(path) -> ParsedScenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# canonical form and serialization


def _canonical(parsed: ParsedScenario) -> dict:
    """Resolved values keyed by ``section.key`` in SI units (strings for exactness)."""
    c = parsed.config
    p = c.params
    out = {
        "waveguide.Gamma_rad_per_s": p.Gamma,
        "waveguide.gamma_rad_per_s": p.gamma,
        "waveguide.Omega_ac_rad_per_s": p.waveguide.Omega_ac,
        "waveguide.v_o_m_per_s": p.waveguide.v_o,
        "waveguide.v_ac_m_per_s": p.waveguide.v_ac,
        "environment.T_en_K": p.environment.T_en,
        "environment.n_th": p.n_th_override,
        "coupling.g1_rad_per_s": p.g1,
        "coupling.g2_rad_per_s": p.g2,
        "scenario.k_per_m": p.modes.k,
        "scenario.gamma_smf_rad_per_s": p.modes.gamma_smf,
        "scenario.Delta_id_rad_per_s": p.modes.Delta_id,
        "scenario.Delta_sg_rad_per_s": p.modes.Delta_sg,
        "scenario.Delta_re_rad_per_s": p.modes.Delta_re,
        "scenario.Delta_ac_rad_per_s": p.modes.Delta_ac,
        "scenario.beta_b_rad": c.phases.beta_b,
        "scenario.beta_re_rad": c.phases.beta_re,
        "schedule.tau1_s": "auto" if c.schedule.tau1 is None else c.schedule.tau1,
        "schedule.tau_s_s": c.schedule.tau_s,
        "schedule.tau2_s": "auto" if c.schedule.tau2 is None else c.schedule.tau2,
        "schedule.backend": c.backend,
        "schedule.n_grid": c.n_grid,
        "output.seed": parsed.seed,
    }
    scn = c.scenario
    if isinstance(scn, Entangled):
        out.update({"scenario.type": "entangled", "scenario.eta": scn.eta})
    else:
        out["scenario.r"] = scn.r
        out["scenario.phase_rad"] = scn.phase
        if isinstance(scn, SqueezedVacuum):
            out["scenario.type"] = "squeezed_vacuum"
        elif isinstance(scn, SqueezedThermal):
            out.update({"scenario.type": "squeezed_thermal", "scenario.u": scn.u})
        else:
            out.update({"scenario.type": "squeezed_coherent",
                        "scenario.alpha_re": complex(scn.alpha).real,
                        "scenario.alpha_im": complex(scn.alpha).imag})
    e = parsed.ensemble
    out.update({
        "scenario.ensemble_beta": e.beta,
        "scenario.ensemble_samples": e.n_samples,
        "scenario.ensemble_convention": e.conventions[0] if len(e.conventions) == 1 else "both",
        "scenario.ensemble_target_F": e.target_F,
        "scenario.ensemble_target_tol": e.target_tol,
    })
    for i, (name, values) in enumerate(parsed.sweep.axes, start=1):
        out[f"sweep.axis{i}"] = name
        out[f"sweep.grid{i}"] = ", ".join(repr(float(v)) for v in values)
    return {k: (repr(float(v)) if isinstance(v, float) else v) for k, v in out.items() if v is not None}


def serialize_scenario(parsed: ParsedScenario) -> str:
    """Scenario document in SI units that parses back to the same configuration."""
    sections = {}
    for key, value in parsed.canonical.items():
        section, name = key.split(".", 1)
        sections.setdefault(section, []).append((name, value))
    chunks = []
    for section in _SCHEMA:
        if section in sections:
            body = "\n".join(f"{k} = {v}" for k, v in sections[section])
            chunks.append(f"[{section}]\n{body}\n")
    return "\n".join(chunks)


def apply_axis(config: ProtocolConfig, name: str, value: float) -> ProtocolConfig:
    """Copy of ``config`` with one sweep-axis value applied."""
    p = config.params
    G = p.Gamma
    if name == "Delta_as_over_Gamma":
        p = p.with_updates(k=value * G / p.waveguide.v_o)
    elif name == "k_per_m":
        p = p.with_updates(k=value)
    elif name == "T_en_K":
        p = p.with_updates(T_en=value)
    elif name == "g_over_Gamma":
        p = p.with_updates(g1=value * G, g2=value * G)
    elif name == "g1_over_Gamma":
        p = p.with_updates(g1=value * G)
    elif name == "g2_over_Gamma":
        p = p.with_updates(g2=value * G)
    elif name == "tau_s_ns":
        return replace(config, schedule=replace(config.schedule, tau_s=value * 1e-9))
    elif name == "eta":
        if not isinstance(config.scenario, Entangled):
            raise ValueError("eta axis requires the entangled scenario")
        return replace(config, scenario=Entangled(value))
    elif name == "r":
        if isinstance(config.scenario, Entangled):
            raise ValueError("r axis requires a squeezed scenario")
        return replace(config, scenario=replace(config.scenario, r=value))
    else:
        raise ValueError(f"unknown sweep axis {name!r}")
    return replace(config, params=p)
