"""Gaussian-state simulator of a Brillouin optoacoustic quantum memory.

An optical signal is swapped into a travelling acoustic phonon by a pump
pulse (write), held while it thermalises (store) and swapped back into a
retrieval optical mode (readout).  States are tracked through their first
and second quadrature moments, either in closed form or by integrating the
moment equations.
"""
__version__ = "0.1.0"

from .gaussian import (
    GaussianState,
    NumericalError,
    PhysicalityError,
    fidelity_one_mode,
    fidelity_two_mode,
    log_negativity,
    make_coherent,
    make_entangled_pair,
    make_squeezed_coherent,
    make_squeezed_thermal,
    make_squeezed_vacuum,
    make_thermal,
    make_vacuum,
    min_symplectic_eigenvalue_pt,
    squeezing_factor,
    squeezing_factor_db,
)
from .params import (
    Environment,
    ModeSelector,
    StageCoupling,
    SystemParams,
    WaveguideParams,
    optimal_pulse_duration,
    thermal_occupation,
)
from .dynamics import build_stage_system, integrate_moments, population_from_state
from .analytic import (
    Phases,
    Readout,
    SqueezedCoherent,
    SqueezedThermal,
    SqueezedVacuum,
    Store,
    Write,
    stage_state_entangled,
    stage_state_squeezed,
)
from .protocol import (
    Entangled,
    ProtocolConfig,
    Schedule,
    classical_benchmark,
    ensemble_average_fidelity,
    find_extremum,
    run_protocol,
)
from .scenario import ScenarioError, parse_scenario, serialize_scenario
from .sweep import OutputTable, emit_csv, run_sweep
