import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from brillouin_memory.params import (
    TWO_PI,
    Environment,
    ModeSelector,
    StageCoupling,
    SystemParams,
    WaveguideParams,
    coupling_for_pulse,
    detunings_for_k,
    heating_rate,
    optimal_pulse_duration,
    thermal_occupation,
)

HBAR = 1.054571817e-34
KB = 1.380649e-23


def test_thermal_occupation_examples():
    omega = TWO_PI * 7.6e9
    assert thermal_occupation(omega, 1.0) == pytest.approx(2.2712, abs=1e-3)
    assert thermal_occupation(omega, 4.0) == pytest.approx(10.47, abs=0.01)
    assert thermal_occupation(omega, 1e-3) < 1e-100


@given(st.floats(1e-2, 300.0))
def test_thermal_occupation_matches_bose_einstein(T):
    omega = TWO_PI * 7.6e9
    expected = 1.0 / (np.exp(HBAR * omega / (KB * T)) - 1.0)
    # exp(x) - 1 cancels for small x, so the oracle itself is only good to ~1e-8
    assert thermal_occupation(omega, T) == pytest.approx(expected, rel=1e-6)


def test_thermal_occupation_high_temperature_limit():
    omega = TWO_PI * 7.6e9
    T = 300.0
    assert thermal_occupation(omega, T) == pytest.approx(KB * T / (HBAR * omega) - 0.5, rel=1e-4)


@pytest.mark.parametrize("T", [0.0, -1.0, np.nan])
def test_thermal_occupation_rejects_bad_temperature(T):
    with pytest.raises(ValueError):
        thermal_occupation(TWO_PI * 7.6e9, T)


@given(st.floats(-1e4, 1e4))
def test_detunings_linear_and_odd_in_k(k):
    wg = WaveguideParams()
    d_o, d_ac = detunings_for_k(k, wg)
    assert d_o == pytest.approx(k * 1.2e8)
    assert d_ac == pytest.approx(k * 2.6e3)
    assert detunings_for_k(-k, wg) == (-d_o, -d_ac)


def test_heating_rate_example():
    Gamma = TWO_PI * 1e6
    n_th = thermal_occupation(TWO_PI * 7.6e9, 1.0)
    assert heating_rate(Gamma, n_th) == pytest.approx(1.427e7, rel=1e-3)


def test_pulse_durations():
    assert optimal_pulse_duration(TWO_PI * 100e6) == pytest.approx(2.5e-9)
    assert coupling_for_pulse(7.8e-9) == pytest.approx(2.014e8, rel=1e-3)
    gs = np.geomspace(1e6, 1e10, 20)
    assert np.all(np.diff([optimal_pulse_duration(g) for g in gs]) < 0)
    with pytest.raises(ValueError):
        optimal_pulse_duration(0.0)
    with pytest.raises(ValueError):
        coupling_for_pulse(-1e-9)


@given(st.floats(1e-12, 1e-3))
def test_pulse_duration_round_trip(tau):
    assert optimal_pulse_duration(coupling_for_pulse(tau)) == pytest.approx(tau, rel=1e-12)


@pytest.mark.parametrize("kwargs", [{"gamma": -1.0}, {"Gamma": 0.0}, {"v_ac": 2e8}, {"Omega_ac": np.inf}])
def test_waveguide_validation(kwargs):
    with pytest.raises(ValueError):
        WaveguideParams(**kwargs)


def test_record_validation():
    with pytest.raises(ValueError):
        Environment(0.0)
    with pytest.raises(ValueError):
        StageCoupling(-1.0, 1.0)
    with pytest.raises(ValueError):
        ModeSelector(gamma_smf=-1.0)
    with pytest.raises(ValueError):
        ModeSelector(k=np.nan)
    with pytest.raises(ValueError):
        SystemParams(n_th_override=-0.1)


def test_system_params_derived_values():
    p = SystemParams.from_ratios(100, 50, T_en=1.0, Delta_as_over_Gamma=0.2)
    assert p.g1 == pytest.approx(100 * p.Gamma)
    assert p.g2 == pytest.approx(50 * p.Gamma)
    assert p.gamma == pytest.approx(0.2 * p.Gamma)
    assert p.Delta_as == pytest.approx(0.2 * p.Gamma)
    assert p.Delta_sg == p.Delta_re == p.Delta_as
    assert p.Delta_ac == pytest.approx(0.2 * p.Gamma * 2.6e3 / 1.2e8)
    assert p.Delta_id == 0.0
    assert p.n_th == pytest.approx(2.2712, abs=1e-3)


def test_with_updates_routes_to_nested_records():
    p = SystemParams()
    q = p.with_updates(T_en=4.0, g1=1.0, k=10.0, Delta_re=3.0, n_th_override=0.0)
    assert q.environment.T_en == 4.0
    assert q.g1 == 1.0 and q.g2 == p.g2
    assert q.modes.k == 10.0
    assert q.Delta_re == 3.0
    assert q.n_th == 0.0
    assert p.environment.T_en == 1.0
    with pytest.raises(KeyError):
        p.with_updates(bogus=1.0)
    with pytest.raises(ValueError):
        p.with_updates(T_en=-1.0)
