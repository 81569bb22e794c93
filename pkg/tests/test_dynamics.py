import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, solve_continuous_lyapunov

from brillouin_memory import kernels
from brillouin_memory.dynamics import (
    LinearSystem,
    ResourceError,
    build_stage_system,
    coupling_block,
    integrate_moments,
    mode_block,
    population_from_state,
)
from brillouin_memory.gaussian import GaussianState, make_coherent, make_squeezed_vacuum, make_vacuum
from brillouin_memory.params import SystemParams, optimal_pulse_duration


def _exact_moments(system, initial, t):
    """Closed-form Lyapunov flow: V(t) = e^{At} (V0 - Vss) e^{A^T t} + Vss."""
    A, D = system.A, system.D
    Vss = solve_continuous_lyapunov(A, -D)
    E = expm(A * t)
    return E @ (initial.cov - Vss) @ E.T + Vss, E @ initial.mean


def _params(g=100.0, T=1.0, **kw):
    return SystemParams.from_ratios(g, T_en=T, **kw)


def test_blocks():
    assert np.array_equal(mode_block(-1 + 2j), [[-1, -2], [2, -1]])
    assert np.array_equal(coupling_block(3.0), [[0, 3], [-3, 0]])


def test_linear_system_validation():
    with pytest.raises(ValueError):
        LinearSystem(np.zeros((3, 3)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        LinearSystem(np.zeros((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        LinearSystem(np.zeros((2, 2)), -np.eye(2))


def test_uncoupled_eigenvalues():
    p = _params(g=0.0, Delta_as_over_Gamma=0.3)
    sys = build_stage_system("write", "squeezed", p)
    ev = np.sort_complex(np.linalg.eigvals(sys.A))
    expected = np.sort_complex([-p.gamma / 2 + 1j * p.Delta_sg, -p.gamma / 2 - 1j * p.Delta_sg,
                                -p.Gamma / 2 + 1j * p.Delta_ac, -p.Gamma / 2 - 1j * p.Delta_ac])
    assert np.allclose(ev, expected, rtol=1e-12, atol=1e-6)


def test_stage_layouts():
    p = _params()
    assert build_stage_system("write", "squeezed", p).labels == ("signal", "acoustic")
    assert build_stage_system("readout", "entangled", p).labels == ("idler", "retrieval", "acoustic")
    assert build_stage_system("store", "entangled", p).labels == ("idler", "acoustic")
    with pytest.raises(ValueError):
        build_stage_system("erase", "squeezed", p)


def test_store_relaxes_to_thermal():
    p = _params()
    sys = build_stage_system("store", "squeezed", p)
    traj = integrate_moments(sys, make_squeezed_vacuum(1.0), np.linspace(0, 40 / p.Gamma, 5))
    assert np.allclose(traj.final.cov, (p.n_th + 0.5) * np.eye(2), rtol=1e-6)


def test_store_variance_decay_formula():
    p = _params(T=2.0)
    sys = build_stage_system("store", "squeezed", p)
    V0 = make_squeezed_vacuum(0.7).cov
    t = np.linspace(0, 3 / p.Gamma, 31)
    traj = integrate_moments(sys, GaussianState(V0), t)
    nbar = p.n_th + 0.5
    expected = V0[0, 0] * np.exp(-p.Gamma * t) + nbar * (1 - np.exp(-p.Gamma * t))
    assert np.allclose(traj.covs[:, 0, 0], expected, rtol=0, atol=1e-8)


def test_lossless_swap_conserves_excitations():
    p = _params(gamma_over_Gamma=1.0).with_updates(gamma=1e-30, Gamma=1e-30, n_th_override=0.0)
    # tiny but positive rates leave an effectively lossless beam splitter
    sys = build_stage_system("write", "squeezed", p)
    init = GaussianState(np.diag([0.5, 0.5, 0.5, 0.5]), np.array([2.0, 0.0, 0.0, 0.0]))
    t = np.linspace(0, optimal_pulse_duration(p.g1), 21)
    traj = integrate_moments(sys, init, t)
    total = [population_from_state(s, 0) + population_from_state(s, 1) for s in traj.states]
    assert np.allclose(total, 2.0, atol=1e-9)
    assert population_from_state(traj.final, 1) == pytest.approx(2.0, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(stage=st.sampled_from(["write", "store", "readout"]), scenario=st.sampled_from(["squeezed", "entangled"]),
       g=st.floats(5.0, 150.0), T=st.floats(0.05, 5.0), k=st.floats(-0.5, 0.5), frac=st.floats(0.1, 2.0))
def test_integrator_matches_matrix_exponential(stage, scenario, g, T, k, frac):
    p = _params(g=g, T=T, Delta_as_over_Gamma=k, gamma_smf=0.3 * 2 * np.pi * 1e6)
    sys = build_stage_system(stage, scenario, p)
    n = sys.n_modes
    V0 = 0.5 * np.eye(2 * n)
    V0[-2:, -2:] = make_squeezed_vacuum(0.6).cov
    u0 = np.linspace(0.2, 1.0, 2 * n)
    init = GaussianState(V0, u0)
    tf = frac * optimal_pulse_duration(p.g1)
    traj = integrate_moments(sys, init, [0.0, tf / 2, tf])
    V, u = _exact_moments(sys, init, tf)
    assert np.max(np.abs(traj.final.cov - V)) < 1e-9
    assert np.max(np.abs(traj.final.mean - u)) < 1e-9


def test_step_halving_converges():
    p = _params()
    sys = build_stage_system("write", "squeezed", p)
    t = np.linspace(0, optimal_pulse_duration(p.g1), 11)
    V0 = 0.5 * np.eye(4)
    V0[:2, :2] = make_squeezed_vacuum(1.0).cov
    a = integrate_moments(sys, GaussianState(V0), t, resolution=200)
    b = integrate_moments(sys, GaussianState(V0), t, resolution=400)
    assert np.max(np.abs(a.covs - b.covs)) < 1e-9


def test_grid_validation_and_resource_limit():
    p = _params()
    sys = build_stage_system("write", "squeezed", p)
    init = make_vacuum(2)
    with pytest.raises(ValueError):
        integrate_moments(sys, init, [1e-9, 2e-9])
    with pytest.raises(ValueError):
        integrate_moments(sys, init, [0.0, 2e-9, 1e-9])
    with pytest.raises(ValueError):
        integrate_moments(sys, make_vacuum(1), [0.0, 1e-9])
    with pytest.raises(ValueError):
        integrate_moments(sys, init, [0.0, 1e-9], resolution=10)
    with pytest.raises(ResourceError):
        integrate_moments(sys, init, [0.0, 1.0])


@pytest.mark.skipif("cython" not in kernels.available_kernels(), reason="compiled kernel not built")
def test_compiled_and_python_kernels_agree():
    p = _params(Delta_as_over_Gamma=0.2, gamma_smf=1e5)
    sys = build_stage_system("readout", "entangled", p)
    init = GaussianState(0.5 * np.eye(6), np.arange(6, dtype=float) / 10)
    t = np.linspace(0, 2 * optimal_pulse_duration(p.g2), 41)
    a = integrate_moments(sys, init, t, kernel="cython")
    b = integrate_moments(sys, init, t, kernel="python")
    assert np.max(np.abs(a.covs - b.covs)) < 1e-12
    assert np.max(np.abs(a.means - b.means)) < 1e-12


def test_unknown_kernel_rejected():
    with pytest.raises(ValueError):
        kernels.get_kernel("fortran")


def test_population_from_state_examples():
    assert population_from_state(make_vacuum(), 0) == 0.0
    assert population_from_state(make_coherent(1.5), 0) == pytest.approx(2.25)
    assert population_from_state(make_squeezed_vacuum(1.0), 0) == pytest.approx(np.sinh(1.0) ** 2)
