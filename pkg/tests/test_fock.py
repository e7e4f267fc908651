"""Tests for the truncated Fock-space engine.

The covariance-matrix engine serves as the independent oracle for every
channel: any Gaussian operation realized here on number-basis density
matrices must reproduce its first and second quadrature moments.
"""

import math
import warnings

import numpy as np
import pytest

from micromacro import fock as fk
from micromacro import gaussian as ga

# Frozen references (30-digit evaluation of the closed forms).
TMSV_P00_R05 = 0.786447732965927  # 1 - tanh(0.5)^2
TMSV_P11_R05 = 0.167947696278681
TMSV_P22_R05 = 0.0358656112834621
THERMAL1_MEAN_16 = 0.9997558556496529  # renormalized over 16 levels
THERMAL1_QUBIT_WEIGHT = 0.7500114442664225
THERMAL10_LEAKAGE_16 = 0.2176291357901488  # (10/11)^16


def test_annihilation_matrix_entries():
    a = fk.annihilation_matrix(4)
    expected = np.zeros((4, 4))
    expected[0, 1] = 1.0
    expected[1, 2] = math.sqrt(2.0)
    expected[2, 3] = math.sqrt(3.0)
    assert np.array_equal(a, expected)
    with pytest.raises(ValueError):
        fk.annihilation_matrix(1)


def test_cached_operators_are_read_only():
    a = fk.annihilation_matrix(6)
    with pytest.raises(ValueError):
        a[0, 0] = 5.0


def test_displacement_matrix_is_unitary_and_coherent():
    d = fk.displacement_matrix(0.5, 24)
    assert np.allclose(d @ d.conj().T, np.eye(24), atol=1e-12)
    ket = d[:, 0]
    n_mean = float(np.sum(np.arange(24) * np.abs(ket) ** 2))
    assert abs(n_mean - 0.25) < 1e-10  # Poisson mean |alpha|^2
    p0 = abs(ket[0]) ** 2
    assert abs(p0 - math.exp(-0.25)) < 1e-10


def test_beam_splitter_identity_and_swap():
    u0 = fk.beam_splitter_unitary(0.0, 0.3, (5, 5))
    assert np.allclose(u0, np.eye(25), atol=1e-12)
    swap = fk.beam_splitter_unitary(math.pi / 2.0, 0.0, (5, 5))
    ket10 = np.zeros(25)
    ket10[5] = 1.0  # |1, 0>
    out = swap @ ket10
    amp01 = out[1]  # |0, 1>
    assert abs(abs(amp01) - 1.0) < 1e-12


def test_beam_splitter_5050_amplitudes():
    for phi in (0.0, math.pi / 2.0, -math.pi / 2.0, math.pi):
        u = fk.beam_splitter_unitary(math.pi / 4.0, phi, (4, 4))
        ket10 = np.zeros(16)
        ket10[4] = 1.0
        out = u @ ket10
        assert abs(out[4] - 1.0 / math.sqrt(2)) < 1e-12
        assert abs(out[1] - np.exp(1j * phi) / math.sqrt(2)) < 1e-12


def test_beam_splitter_conserves_total_photon_number():
    rng = np.random.default_rng(5)
    n_tot = np.kron(fk.number_matrix(6), np.eye(6)) + np.kron(np.eye(6), fk.number_matrix(6))
    for _ in range(5):
        u = fk.beam_splitter_unitary(rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi), (6, 6))
        assert np.max(np.abs(u @ n_tot - n_tot @ u)) < 1e-12
        assert np.max(np.abs(u @ u.conj().T - np.eye(36))) < 1e-12


def test_thermal_state_vacuum_and_mean():
    vac = fk.thermal_state(0.0, 16)
    assert abs(vac.data[0, 0] - 1.0) < 1e-15
    th = fk.thermal_state(1.0, 16)
    n_mean = float(np.real(np.trace(th.data @ fk.number_matrix(16).astype(complex))))
    assert abs(n_mean - THERMAL1_MEAN_16) < 1e-12
    assert abs(th.trace - 1.0) < 1e-12


def test_thermal_state_truncation_warning_and_leakage():
    assert abs(fk.thermal_leakage(10.0, 16) - THERMAL10_LEAKAGE_16) < 1e-15
    with pytest.warns(fk.TruncationWarning):
        fk.thermal_state(10.0, 16)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fk.thermal_state(0.5, 16)  # leakage ~ 1e-8, no warning


def test_single_photon_entangled_input_structure():
    rho = fk.single_photon_entangled_input(0.0, (8, 8))
    assert abs(rho.trace - 1.0) < 1e-12
    purity = float(np.real(np.trace(rho.data @ rho.data)))
    assert abs(purity - 1.0) < 1e-10
    # Reduced state of the companion mode is an even photon mixture.
    r4 = rho.data.reshape(8, 8, 8, 8)
    reduced_c = np.einsum("abad->bd", r4)
    assert abs(reduced_c[0, 0] - 0.5) < 1e-12
    assert abs(reduced_c[1, 1] - 0.5) < 1e-12
    assert abs(reduced_c[0, 1]) < 1e-12
    qubits = fk.qubit_project(rho)
    assert abs(qubits.projection_probability - 1.0) < 1e-12
    assert abs(fk.concurrence(qubits) - 1.0) < 1e-10


def test_two_mode_squeezed_state_weights():
    # Renormalization over the cutoff shifts the weights by the discarded
    # tail, tanh(0.5)^32 ~ 2e-11, relative to the untruncated references.
    rho = fk.two_mode_squeezed_state(0.5, (16, 16))
    diag = np.real(np.diag(rho.data)).reshape(16, 16)
    assert abs(diag[0, 0] - TMSV_P00_R05) < 1e-10
    assert abs(diag[1, 1] - TMSV_P11_R05) < 1e-10
    assert abs(diag[2, 2] - TMSV_P22_R05) < 1e-10
    assert abs(np.sum(diag) - 1.0) < 1e-12


def test_two_mode_squeezed_state_moments_match_gaussian():
    for r in (0.1, 0.3):
        mean, cov = fk.quadrature_moments(fk.two_mode_squeezed_state(r, (16, 16)))
        ref = ga.tmsv_state(r)
        assert np.max(np.abs(mean - ref.mean)) < 1e-8
        assert np.max(np.abs(cov - ref.cov)) < 1e-6


def test_linear_channel_y1_replaces_input_with_vacuum():
    coeffs = ga.channel_coefficients(0.2, 1.0)
    rho = fk.single_photon_entangled_input(0.0, (12, 12))
    out = fk.linear_channel_apply(rho, coeffs, 0.0, 0.0)
    n_a = np.kron(fk.number_matrix(12), np.eye(12)).astype(complex)
    assert abs(np.real(np.trace(out.data @ n_a))) < 1e-10
    assert abs(out.trace - 1.0) < 1e-10


def test_linear_channel_single_photon_transmission():
    # x = 0, y = 0.1 on |1>_A: the retrieved mean photon number is c1^2.
    coeffs = ga.channel_coefficients(0.0, 0.1)
    one = np.zeros((12, 12), dtype=complex)
    one[1, 1] = 1.0
    vac_c = np.zeros((12, 12), dtype=complex)
    vac_c[0, 0] = 1.0
    rho = fk.FockDensityMatrix((12, 12), np.kron(one, vac_c))
    out = fk.linear_channel_apply(rho, coeffs, 0.0, 0.0)
    n_a = np.kron(fk.number_matrix(12), np.eye(12)).astype(complex)
    n_mean = float(np.real(np.trace(out.data @ n_a)))
    assert abs(n_mean - 0.9801) < 1e-10  # c1^2 = 0.99^2


def test_linear_channel_moments_match_gaussian():
    rng = np.random.default_rng(17)
    for _ in range(6):
        x = rng.uniform(0, 0.1)
        y = rng.uniform(0.1, 0.9)
        n_in = rng.uniform(0, 0.5)
        n_th = rng.uniform(0, 0.5)
        r = rng.uniform(0.02, 0.3)
        coeffs = ga.channel_coefficients(x, y)
        rho = fk.linear_channel_apply(
            fk.two_mode_squeezed_state(r, (16, 16)), coeffs, n_in, n_th
        )
        assert abs(rho.trace - 1.0) < 1e-3
        mean, cov = fk.quadrature_moments(rho)
        ref = ga.storage_retrieval_channel(ga.tmsv_state(r), coeffs, n_in, n_th)
        assert np.max(np.abs(mean - ref.mean)) < 1e-4
        assert np.max(np.abs(cov - ref.cov)) < 1e-4


def test_linear_channel_rejects_closure_violation():
    broken = ga.ChannelCoefficients(x=0.0, y=0.1, c1=0.9, c2_mag=0.9, f1=0.9, f2=0.9)
    rho = fk.single_photon_entangled_input(0.0, (8, 8))
    with pytest.raises(ValueError):
        fk.linear_channel_apply(rho, broken, 0.0, 0.0)


def test_phase_noise_average_zero_variance_is_identity():
    rho = fk.single_photon_entangled_input(0.0, (8, 8))
    assert fk.phase_noise_average(rho, 0.0) is rho


def test_phase_noise_average_adds_momentum_variance():
    # On a (small) coherent state the average adds exactly `variance` to <P^2>
    # (Gauss-Hermite is exact for second moments); 32 levels keep the kicked
    # states far from the cutoff.
    d = fk.displacement_matrix(0.3, 32)
    ket = np.kron(d[:, 0], np.eye(4)[0])
    rho = fk.FockDensityMatrix((32, 4), np.outer(ket, ket.conj()))
    noisy = fk.phase_noise_average(rho, 0.8, mode=0, n_nodes=21)
    _, cov0 = fk.quadrature_moments(rho)
    mean1, cov1 = fk.quadrature_moments(noisy)
    assert abs((cov1[1, 1] - cov0[1, 1]) - 0.8) < 1e-6
    assert abs(cov1[0, 0] - cov0[0, 0]) < 1e-6
    assert abs(mean1[0] - 0.3 * math.sqrt(2)) < 1e-6
    assert abs(noisy.trace - 1.0) < 1e-8


def test_phase_noise_average_mixes_pure_states():
    # Random momentum kicks mix the state (purity drops) while the linear
    # moment <a> is preserved exactly (the kicks have zero mean) and <P^2>
    # grows by the kick variance.
    ket = np.zeros(32 * 4, dtype=complex)
    ket[0] = ket[4] = 1.0 / math.sqrt(2)  # (|0> + |1>)_A |0>_C
    rho = fk.FockDensityMatrix((32, 4), np.outer(ket, ket.conj()))
    noisy = fk.phase_noise_average(rho, 1.0, mode=0)
    purity = float(np.real(np.trace(noisy.data @ noisy.data)))
    assert purity < 0.7
    assert abs(noisy.trace - 1.0) < 1e-8
    mean0, cov0 = fk.quadrature_moments(rho)
    mean1, cov1 = fk.quadrature_moments(noisy)
    assert np.max(np.abs(mean1 - mean0)) < 1e-7
    assert abs((cov1[1, 1] - cov0[1, 1]) - 1.0) < 1e-6


def test_phase_noise_average_concurrence_non_increasing_in_variance():
    coeffs = ga.channel_coefficients(0.01, 0.1)
    rho = fk.linear_channel_apply(
        fk.single_photon_entangled_input(0.0, (16, 16)), coeffs, 1.0, 0.3
    )
    values = []
    for variance in (0.0, 0.5, 1.0, 2.0, 4.0, 6.0):
        noisy = fk.phase_noise_average(rho, variance, mode=0)
        values.append(fk.concurrence(fk.qubit_project(noisy)))
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:])), values


def test_pure_loss_channel_single_photon():
    one = np.zeros((6, 6), dtype=complex)
    one[1, 1] = 1.0
    vac = np.zeros((6, 6), dtype=complex)
    vac[0, 0] = 1.0
    rho = fk.FockDensityMatrix((6, 6), np.kron(one, vac))
    out = fk.pure_loss_channel(rho, 0, 0.8)
    diag = np.real(np.diag(out.data)).reshape(6, 6)
    assert abs(diag[1, 0] - 0.8) < 1e-12
    assert abs(diag[0, 0] - 0.2) < 1e-12


def test_pure_loss_channel_identity_and_commutation():
    rho = fk.two_mode_squeezed_state(0.2, (10, 10))
    assert fk.pure_loss_channel(rho, 0, 1.0) is rho
    ab = fk.pure_loss_channel(fk.pure_loss_channel(rho, 0, 0.7), 1, 0.4)
    ba = fk.pure_loss_channel(fk.pure_loss_channel(rho, 1, 0.4), 0, 0.7)
    assert np.max(np.abs(ab.data - ba.data)) < 1e-12
    with pytest.raises(ValueError):
        fk.pure_loss_channel(rho, 0, -0.1)


def test_pure_loss_channel_moments_match_gaussian():
    rng = np.random.default_rng(23)
    for _ in range(5):
        r = rng.uniform(0.05, 0.3)
        eta = rng.uniform(0.1, 0.95)
        rho = fk.pure_loss_channel(fk.two_mode_squeezed_state(r, (16, 16)), 0, eta)
        mean, cov = fk.quadrature_moments(rho)
        ref = ga.loss_channel(ga.tmsv_state(r), "A", eta)
        assert np.max(np.abs(mean - ref.mean)) < 1e-6
        assert np.max(np.abs(cov - ref.cov)) < 1e-5
        assert abs(rho.trace - 1.0) < 1e-10


def test_qubit_project_thermal_weight():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", fk.TruncationWarning)
        th = fk.thermal_state(1.0, 16)
    vac = np.zeros((16, 16), dtype=complex)
    vac[0, 0] = 1.0
    rho = fk.FockDensityMatrix((16, 16), np.kron(th.data, vac))
    qubits = fk.qubit_project(rho)
    assert abs(qubits.projection_probability - THERMAL1_QUBIT_WEIGHT) < 1e-12
    assert abs(np.real(np.trace(qubits.matrix)) - 1.0) < 1e-12


def test_qubit_project_degenerate_error():
    two = np.zeros((6, 6), dtype=complex)
    two[2, 2] = 1.0
    rho = fk.FockDensityMatrix((6, 6), np.kron(two, two))
    with pytest.raises(ArithmeticError):
        fk.qubit_project(rho)


def test_concurrence_bell_product_and_werner():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / math.sqrt(2)
    assert abs(fk.concurrence(np.outer(bell, bell.conj())) - 1.0) < 1e-12
    product = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
    assert fk.concurrence(product) == 0.0
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2)
    rng = np.random.default_rng(8)
    for _ in range(20):
        p = rng.uniform(0, 1)
        werner = p * np.outer(singlet, singlet) + (1 - p) * np.eye(4) / 4.0
        expected = max(0.0, (3.0 * p - 1.0) / 2.0)
        assert abs(fk.concurrence(werner) - expected) < 1e-10, f"p={p}"
    with pytest.raises(ValueError):
        fk.concurrence(np.eye(3))


def test_quadrature_moments_vacuum():
    vac = np.zeros((6 * 6, 6 * 6), dtype=complex)
    vac[0, 0] = 1.0
    mean, cov = fk.quadrature_moments(fk.FockDensityMatrix((6, 6), vac))
    assert np.max(np.abs(mean)) < 1e-14
    assert np.max(np.abs(cov - 0.5 * np.eye(4))) < 1e-14


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        fk.FockDensityMatrix((4, 4), np.eye(15, dtype=complex))
    bad = np.eye(16, dtype=complex)
    bad[0, 1] = 0.5  # not Hermitian
    with pytest.raises(ValueError):
        fk.FockDensityMatrix((4, 4), bad)
