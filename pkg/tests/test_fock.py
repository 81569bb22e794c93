import numpy as np
import pytest
from scipy.special import gammaln

from brillouin_memory.fock import ConvergenceError, density_matrix, fock_fidelity_oracle, uhlmann_fidelity
from brillouin_memory.gaussian import (
    make_coherent,
    make_entangled_pair,
    make_squeezed_vacuum,
    make_thermal,
    make_vacuum,
)


def _coherent_ket(alpha, cutoff):
    n = np.arange(cutoff)
    log_mag = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha) + 1e-300) - 0.5 * gammaln(n + 1)
    ket = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    if alpha == 0:
        ket = np.eye(cutoff)[0].astype(complex)
    return ket


def test_vacuum_density_matrix():
    rho = density_matrix(make_vacuum(), 8)
    expected = np.zeros((8, 8))
    expected[0, 0] = 1
    assert np.allclose(rho, expected, atol=1e-14)


def test_thermal_density_matrix_is_geometric():
    n = 0.8
    rho = density_matrix(make_thermal(n), 40)
    k = np.arange(40)
    assert np.allclose(np.diag(rho).real, n**k / (1 + n) ** (k + 1), atol=1e-12)
    assert np.allclose(rho - np.diag(np.diag(rho)), 0, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.7, -0.4 + 0.9j, 1.3j])
def test_coherent_density_matrix_is_projector(alpha):
    ket = _coherent_ket(alpha, 30)
    rho = density_matrix(make_coherent(alpha), 30)
    assert np.allclose(rho, np.outer(ket, ket.conj()), atol=1e-10)


def test_squeezed_vacuum_has_even_photon_numbers():
    r = 0.5
    rho = density_matrix(make_squeezed_vacuum(r), 40)
    p = np.diag(rho).real
    assert np.allclose(p[1::2], 0, atol=1e-14)
    # <0|S(r)|0>^2 = 1/cosh r
    assert p[0] == pytest.approx(1 / np.cosh(r), rel=1e-12)
    assert np.sum(np.arange(40) * p) == pytest.approx(np.sinh(r) ** 2, rel=1e-8)


def test_two_mode_pair_density_matrix_moments():
    eta = 0.3
    cutoff = 14
    rho = density_matrix(make_entangled_pair(eta), cutoff)
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-6)
    assert np.linalg.eigvalsh(rho).min() > -1e-9
    # each mode carries (V11 + V22 - 1)/2 = 2 eta^2 quanta
    n = np.arange(cutoff)
    p = np.diag(rho).real.reshape(cutoff, cutoff)
    assert np.sum(n[:, None] * p) == pytest.approx(2 * eta**2, abs=1e-5)
    assert np.sum(n[None, :] * p) == pytest.approx(2 * eta**2, abs=1e-5)


def test_oracle_examples():
    assert fock_fidelity_oracle(make_vacuum(), make_vacuum(), 10) == pytest.approx(1.0, abs=1e-9)
    assert fock_fidelity_oracle(make_vacuum(), make_thermal(1.0), 60) == pytest.approx(0.5, abs=1e-4)
    assert fock_fidelity_oracle(make_coherent(1), make_vacuum(), 30) == pytest.approx(np.exp(-1), abs=1e-6)


def test_oracle_raises_on_truncation():
    with pytest.raises(ConvergenceError) as info:
        fock_fidelity_oracle(make_thermal(3.0), make_vacuum(), 5)
    assert info.value.trace < 1 - 1e-6


def test_uhlmann_fidelity_of_pure_states_is_overlap():
    a, b = _coherent_ket(0.5, 20), _coherent_ket(-0.2j, 20)
    expected = abs(np.vdot(a, b)) ** 2
    # the matrix square root of a rank-one matrix is only accurate to ~1e-8
    assert uhlmann_fidelity(np.outer(a, a.conj()), np.outer(b, b.conj())) == pytest.approx(expected, abs=1e-7)
