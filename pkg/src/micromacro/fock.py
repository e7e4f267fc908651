"""Truncated Fock-space engine for the single-photon-level description.

Works with explicit density matrices on a photon-number basis truncated at
n_max = n_levels - 1 per mode (default 16 levels).  All Gaussian unitaries
(displacements, beam splitters) are exponentials of anti-Hermitian truncated
generators, so they remain exactly unitary at any cutoff; truncation shows up
as distorted dynamics near the cutoff, never as trace loss.  Mode ordering for
two-mode states is (A, C) with A the mode that enters the mechanical channel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import comb


class TruncationWarning(UserWarning):
    """Emitted when a state or channel leaks non-negligible weight past the cutoff."""


class QuadratureConvergenceWarning(UserWarning):
    """Emitted when the Gauss-Hermite phase-noise average has not converged."""


HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8
LEAKAGE_WARN = 1e-3


@dataclass(frozen=True)
class FockDensityMatrix:
    """Density operator on a truncated multi-mode Fock space.

    Attributes
    ----------
    dims : tuple of int
        Number of retained levels per mode (n_max + 1 each).
    data : ndarray
        Complex matrix of size prod(dims) x prod(dims); row/column indices
        run over the tensor basis |n_0, n_1, ...> with the *last* mode index
        varying fastest (numpy kron order).
    """

    dims: tuple
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise ValueError(f"every mode needs >= 2 levels, got {dims}")
        n = int(np.prod(dims))
        data = np.array(self.data, dtype=complex)
        if data.shape != (n, n):
            raise ValueError(f"data shape {data.shape} does not match dims {dims}")
        if np.max(np.abs(data - data.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        data.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    @property
    def trace(self):
        return float(np.real(np.trace(self.data)))


@dataclass(frozen=True)
class TwoQubitState:
    """4x4 density matrix in the {|0>,|1>}^2 subspace, basis order |a c>: 00,01,10,11."""

    matrix: np.ndarray
    projection_probability: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"expected 4x4 matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@lru_cache(maxsize=None)
def annihilation_matrix(n_levels):
    """Truncated annihilation operator: a|n> = sqrt(n)|n-1>."""
    if n_levels < 2:
        raise ValueError("need at least 2 levels")
    a = np.diag(np.sqrt(np.arange(1.0, n_levels)), k=1)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def number_matrix(n_levels):
    n = np.diag(np.arange(float(n_levels)))
    n.setflags(write=False)
    return n


def displacement_matrix(alpha, n_levels):
    """Truncated displacement D(alpha) = exp(alpha a^dag - alpha* a).

    Exactly unitary at any cutoff (anti-Hermitian generator); accurate as long
    as the displaced support stays below the cutoff (|alpha|^2 well under
    n_levels).
    """
    a = annihilation_matrix(n_levels)
    alpha = complex(alpha)
    return expm(alpha * a.conj().T - alpha.conjugate() * a)


def beam_splitter_unitary(theta, phi, dims):
    """Two-mode beam splitter exp(theta (e^{i phi} a b^dag - e^{-i phi} a^dag b)).

    In the Heisenberg picture U^dag a U = cos(theta) a - e^{-i phi} sin(theta) b
    and U^dag b U = cos(theta) b + e^{i phi} sin(theta) a.  The generator
    conserves total photon number, so number sectors below the cutoff evolve
    exactly.
    """
    da, db = dims
    a = np.kron(annihilation_matrix(da), np.eye(db))
    b = np.kron(np.eye(da), annihilation_matrix(db))
    gen = np.exp(1j * phi) * (a @ b.conj().T) - np.exp(-1j * phi) * (a.conj().T @ b)
    return expm(theta * gen)


def thermal_leakage(n_mean, n_levels):
    """Weight of a thermal state beyond the cutoff: (N/(N+1))^n_levels."""
    if n_mean == 0:
        return 0.0
    return (n_mean / (n_mean + 1.0)) ** n_levels


def thermal_weights(n_mean, n_levels, renormalize=True):
    """Diagonal Fock weights of a truncated thermal state with mean occupation n_mean.

    Geometric distribution p_n = N^n / (N+1)^{n+1}.  The weight lost past the
    cutoff is reported through a TruncationWarning when it exceeds
    LEAKAGE_WARN; with renormalize=True (default) the retained weights are
    rescaled to unit sum.
    """
    if n_mean < 0:
        raise ValueError(f"thermal occupation {n_mean} must be >= 0")
    n = np.arange(n_levels)
    if n_mean == 0:
        p = np.zeros(n_levels)
        p[0] = 1.0
        return p
    ratio = n_mean / (n_mean + 1.0)
    p = ratio**n / (n_mean + 1.0)
    leak = thermal_leakage(n_mean, n_levels)
    if leak > LEAKAGE_WARN:
        warnings.warn(
            f"thermal state with N={n_mean} leaks {leak:.3g} of its weight past "
            f"{n_levels} levels",
            TruncationWarning,
            stacklevel=2,
        )
    if renormalize:
        p = p / p.sum()
    return p


def thermal_state(n_mean, n_levels, renormalize=True):
    """Single-mode truncated thermal density matrix (see thermal_weights)."""
    p = thermal_weights(n_mean, n_levels, renormalize=renormalize)
    return FockDensityMatrix((n_levels,), np.diag(p.astype(complex)))


def two_mode_squeezed_state(r, dims):
    """Pure two-mode squeezed vacuum, psi_n = tanh(r)^n / cosh(r) on |n, n>.

    Renormalized after truncation; for r <= 0.5 and 16 levels the discarded
    weight is below 1e-10.
    """
    da, dc = dims
    t = math.tanh(r)
    psi = np.zeros((da, dc), dtype=complex)
    for n in range(min(da, dc)):
        psi[n, n] = t**n
    vec = psi.reshape(-1)
    vec = vec / np.linalg.norm(vec)
    return FockDensityMatrix(dims, np.outer(vec, vec.conj()))


def single_photon_entangled_input(alpha, dims):
    """Displaced single-photon path-entangled state on modes (A, C).

    (1/sqrt(2)) (D_A(alpha)|1, 0> + D_A(alpha)|0, 1>): one photon delocalized
    between the two modes, with the bright displacement carried by mode A.
    The pipeline works in the displaced frame (alpha = 0) and accounts for the
    displacement analytically, so nonzero alpha here is only for small-alpha
    checks: accuracy requires |alpha|^2 well below dims[0].
    """
    da, dc = dims
    d = displacement_matrix(alpha, da) if alpha != 0 else np.eye(da, dtype=complex)
    one = np.zeros(da, dtype=complex)
    one[1] = 1.0
    zero = np.zeros(da, dtype=complex)
    zero[0] = 1.0
    c0 = np.zeros(dc, dtype=complex)
    c0[0] = 1.0
    c1 = np.zeros(dc, dtype=complex)
    c1[1] = 1.0
    vec = (np.kron(d @ one, c0) + np.kron(d @ zero, c1)) / math.sqrt(2.0)
    return FockDensityMatrix(dims, np.outer(vec, vec.conj()))


def _as_tensor(rho):
    da, dc = rho.dims
    return rho.data.reshape(da, dc, da, dc)


def _apply_mode_matrix(rho, m, mode):
    """Conjugate one mode of a two-mode state by a single-mode matrix m."""
    r4 = _as_tensor(rho)
    if mode == 0:
        out = np.einsum("ab,bcde,fd->acfe", m, r4, m.conj(), optimize=True)
    elif mode == 1:
        out = np.einsum("ab,cbed,fd->caef", m, r4, m.conj(), optimize=True)
    else:
        raise ValueError(f"mode index {mode} out of range for a two-mode state")
    n = rho.data.shape[0]
    return FockDensityMatrix(rho.dims, out.reshape(n, n))


def _apply_transfer(rho, t, mode):
    """Apply a one-mode channel given as transfer tensor t[a,f,b,d] = sum_k K[a,b] K*[f,d]."""
    r4 = _as_tensor(rho)
    if mode == 0:
        out = np.einsum("afbd,bcde->acfe", t, r4, optimize=True)
    elif mode == 1:
        out = np.einsum("afbd,cbed->caef", t, r4, optimize=True)
    else:
        raise ValueError(f"mode index {mode} out of range for a two-mode state")
    n = rho.data.shape[0]
    return FockDensityMatrix(rho.dims, out.reshape(n, n))


def _beam_splitter_env_transfer(theta, phi, d_sys, env_weights):
    """Transfer tensor of 'mix with an environment mode, then trace it out'.

    The environment enters diagonal in the Fock basis with the given weights
    (thermal or vacuum), so the Kraus operators are E_{j,m} = sqrt(p_m) <j|U|m>
    and the channel is fully described by
        t[a,f,b,d] = sum_{j,m} p_m U[aj,bm] U*[fj,dm].
    """
    de = len(env_weights)
    u = beam_splitter_unitary(theta, phi, (d_sys, de))
    u4 = u.reshape(d_sys, de, d_sys, de)
    return np.einsum("ajbm,m,fjdm->afbd", u4, env_weights, u4.conj(), optimize=True)


def linear_channel_apply(rho, coeffs, n_initial, n_bath, env_levels=None):
    """Storage/retrieval channel on mode A of a two-mode (A, C) state.

    Realizes the Heisenberg relation
        A_out = -c1 A - i c2_mag B_in + f1 dA + f2 dB
    as a cascade of three beam splitters mixing A with B_in (thermal at
    n_initial), dA (vacuum) and dB (thermal at n_bath) in that order, tracing
    each environment mode out after it has interacted.  The cascade angles are
    solved triangularly from the coefficient 4-vector; theta_1 also carries
    the -1 phase on c1 (cos(theta_1) < 0), and the beam-splitter phases
    (-pi/2, pi, pi) reproduce the -i rotation onto the mechanical quadratures
    and the +f1/+f2 noise signs.
    """
    if coeffs.closure_defect > 1e-10:
        raise ValueError(f"channel coefficients violate closure by {coeffs.closure_defect}")
    if n_initial < 0 or n_bath < 0:
        raise ValueError("thermal occupations must be >= 0")
    d_sys = rho.dims[0]
    de = d_sys if env_levels is None else int(env_levels)
    c1, c2, f1, f2 = coeffs.c1, coeffs.c2_mag, coeffs.f1, coeffs.f2

    sin3 = min(max(f2, 0.0), 1.0)
    cos3 = math.sqrt(max(1.0 - sin3 * sin3, 0.0))
    theta3 = math.asin(sin3)
    sin2 = min(f1 / cos3, 1.0) if cos3 > 1e-12 else 0.0
    theta2 = math.asin(sin2)
    theta1 = math.atan2(c2, -c1)

    steps = [
        (theta1, -math.pi / 2.0, thermal_weights(n_initial, de)),
        (theta2, math.pi, thermal_weights(0.0, de)),
        (theta3, math.pi, thermal_weights(n_bath, de)),
    ]
    out = rho
    for theta, phi, weights in steps:
        t = _beam_splitter_env_transfer(theta, phi, d_sys, weights)
        out = _apply_transfer(out, t, mode=0)
    return out


def pure_loss_channel(rho, mode, eta):
    """Transmission eta on one mode via the photon-loss Kraus sum.

    K_k removes k photons: <n-k|K_k|n> = sqrt(C(n,k) eta^{n-k} (1-eta)^k).
    Trace is preserved exactly (binomial theorem).
    """
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"transmission eta={eta} outside [0, 1]")
    if eta == 1.0:
        return rho
    d = rho.dims[mode]
    n = np.arange(d)
    t = np.zeros((d, d, d, d), dtype=complex)
    for k in range(d):
        kraus = np.zeros((d, d))
        rows = n[k:] - k
        kraus[rows, n[k:]] = np.sqrt(comb(n[k:], k) * eta ** (n[k:] - k) * (1.0 - eta) ** k)
        t += np.einsum("ab,fd->afbd", kraus, kraus)
    return _apply_transfer(rho, t.astype(complex), mode)


def phase_noise_average(rho, variance, mode=0, n_nodes=21):
    """Average over Gaussian momentum kicks of the given variance on one mode.

    Phase noise on a bright displaced mode looks, in the displaced frame, like
    a random displacement along P with variance 2 |alpha|^2 (1-y^2)^2 sigma^2;
    this routine averages D(i dp/sqrt(2)) rho D^dag over dp ~ N(0, variance)
    by Gauss-Hermite quadrature (exact for moments up to degree 2 n_nodes - 1,
    so second moments gain exactly `variance` up to truncation).
    """
    if variance < 0:
        raise ValueError(f"variance {variance} must be >= 0")
    if variance == 0.0:
        return rho
    if n_nodes < 2:
        raise ValueError("need at least 2 quadrature nodes")
    nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)
    weights = weights / math.sqrt(math.pi)
    d = rho.dims[mode]
    r4 = _as_tensor(rho)
    out = np.zeros_like(r4)
    for t, w in zip(nodes, weights):
        dp = math.sqrt(2.0 * variance) * t
        disp = displacement_matrix(1j * dp / math.sqrt(2.0), d)
        if mode == 0:
            out += w * np.einsum("ab,bcde,fd->acfe", disp, r4, disp.conj(), optimize=True)
        else:
            out += w * np.einsum("ab,cbed,fd->caef", disp, r4, disp.conj(), optimize=True)
    n = rho.data.shape[0]
    return FockDensityMatrix(rho.dims, out.reshape(n, n))


def qubit_project(rho):
    """Project a two-mode state onto the {|0>,|1>} x {|0>,|1>} subspace.

    Returns the renormalized 4x4 block together with the weight it carried
    (projection_probability).  Raises if essentially no weight survives.
    """
    r4 = _as_tensor(rho)
    block = r4[:2, :2, :2, :2].reshape(4, 4).copy()
    p = float(np.real(np.trace(block)))
    if p < 1e-12:
        raise ArithmeticError(f"qubit projection weight {p} is degenerate")
    return TwoQubitState(block / p, p)


_Y_Y = np.kron(
    np.array([[0.0, -1.0j], [1.0j, 0.0]]), np.array([[0.0, -1.0j], [1.0j, 0.0]])
).real  # (sigma_y x sigma_y) is real in this basis


def concurrence(state):
    """Wootters concurrence of a two-qubit density matrix.

    C = max(0, l1 - l2 - l3 - l4) with l_i the decreasing square roots of the
    eigenvalues of rho (Y x Y) rho* (Y x Y).  1 for Bell states, 0 for
    separable states; a Werner state p|Psi-><Psi-| + (1-p) I/4 gives
    max(0, (3p-1)/2).
    """
    m = state.matrix if isinstance(state, TwoQubitState) else np.asarray(state, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got {m.shape}")
    spin_flipped = _Y_Y @ m.conj() @ _Y_Y
    ev = np.linalg.eigvals(m @ spin_flipped)
    if np.min(ev.real) < -1e-9:
        raise ArithmeticError(f"eigenvalue {np.min(ev.real)} too negative in concurrence")
    lam = np.sqrt(np.clip(ev.real, 0.0, None))
    lam[::-1].sort()
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def quadrature_moments(rho):
    """Mean vector and symmetrized covariance of a two-mode Fock state.

    Uses X = (a + a^dag)/sqrt(2), P = -i(a - a^dag)/sqrt(2) (vacuum variance
    1/2), ordering (X_A, P_A, X_C, P_C) — directly comparable with the
    Gaussian engine.
    """
    da, dc = rho.dims
    ops = []
    for mode, d in ((0, da), (1, dc)):
        a = annihilation_matrix(d)
        x = (a + a.conj().T) / math.sqrt(2.0)
        p = -1j * (a - a.conj().T) / math.sqrt(2.0)
        for op in (x, p):
            if mode == 0:
                ops.append(np.kron(op, np.eye(dc)))
            else:
                ops.append(np.kron(np.eye(da), op))
    mean = np.array([np.real(np.trace(rho.data @ o)) for o in ops])
    cov = np.zeros((4, 4))
    for i in range(4):
        for j in range(i, 4):
            sym = 0.5 * (ops[i] @ ops[j] + ops[j] @ ops[i])
            cov[i, j] = cov[j, i] = np.real(np.trace(rho.data @ sym)) - mean[i] * mean[j]
    return mean, cov
