"""Symplectic propagation of the three-mode Gaussian state.

This is an independent route to the homodyne moments: rather than composing the
Bogoliubov coefficients by hand, each optical element acts on the quadrature mean
vector and covariance matrix.

Conventions: ``X = a + a^dagger``, ``P = i (a^dagger - a)``, ordering
``(X0, P0, X1, P1, ...)``, vacuum covariance = identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadModeError
from .optics import FieldParams, ObjectPixel, SetupParams, SqueezerParams

SYMPLECTIC_TOL = 1e-10


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form with 2x2 blocks ``[[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    n_modes: int
    mean: np.ndarray
    cov: np.ndarray

    def block(self, mode: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean (2,) and covariance (2, 2) of a single mode."""
        _check_modes(self.n_modes, mode)
        sl = slice(2 * mode, 2 * mode + 2)
        return self.mean[sl], self.cov[sl, sl]


def _check_modes(n_modes: int, *modes: int) -> None:
    for m in modes:
        if not (isinstance(m, (int, np.integer)) and 0 <= m < n_modes):
            raise BadModeError(f"mode index {m!r} out of range for {n_modes} modes")
    if len(set(modes)) != len(modes):
        raise BadModeError(f"mode indices must be distinct, got {modes}")


def symplectic_from_bogoliubov(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Real quadrature matrix of the linear map ``a' = A a + B a^dagger``.

    With ``C = A + conj(B)`` and ``D = conj(A) - B``:
    ``X'_j = Re C_jk X_k - Im C_jk P_k`` and ``P'_j = -Im D_jk X_k + Re D_jk P_k``.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    C = A + B.conj()
    D = A.conj() - B
    S = np.empty((2 * n, 2 * n))
    S[0::2, 0::2] = C.real
    S[0::2, 1::2] = -C.imag
    S[1::2, 0::2] = -D.imag
    S[1::2, 1::2] = D.real
    return S


def is_symplectic(S: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    n = S.shape[0] // 2
    W = omega(n)
    return bool(np.max(np.abs(S @ W @ S.T - W)) <= tol)


def apply_symplectic(state: GaussianState, S: np.ndarray) -> GaussianState:
    cov = S @ state.cov @ S.T
    # keep exact symmetry; the product is symmetric only up to rounding
    cov = 0.5 * (cov + cov.T)
    return GaussianState(state.n_modes, S @ state.mean, cov)


def squeezer_matrix(n_modes: int, mode_a: int, mode_b: int, sq: SqueezerParams) -> np.ndarray:
    """``a' = G a + g e^{i phi} b^dagger``, ``b' = G b + g e^{i phi} a^dagger``."""
    _check_modes(n_modes, mode_a, mode_b)
    A = np.eye(n_modes, dtype=complex)
    B = np.zeros((n_modes, n_modes), dtype=complex)
    A[mode_a, mode_a] = A[mode_b, mode_b] = sq.G
    B[mode_a, mode_b] = B[mode_b, mode_a] = sq.g * np.exp(1j * sq.pump_phase)
    return symplectic_from_bogoliubov(A, B)


def object_unitary(pixel: ObjectPixel, completion_phase: float = 0.0) -> np.ndarray:
    """2x2 unitary on (a_in, a_loss). The first row is the physical one; the second
    row is a completion, and ``completion_phase`` picks among the equivalent ones."""
    t = pixel.T * np.exp(1j * pixel.phi_T)
    rho = pixel.R * np.exp(1j * pixel.phi_R)
    c = np.exp(1j * completion_phase)
    return np.array([[t, rho], [-rho.conjugate() * c, t.conjugate() * c]])


def beam_splitter_matrix(n_modes: int, mode_in: int, mode_loss: int, U: np.ndarray) -> np.ndarray:
    _check_modes(n_modes, mode_in, mode_loss)
    A = np.eye(n_modes, dtype=complex)
    idx = [mode_in, mode_loss]
    A[np.ix_(idx, idx)] = U
    return symplectic_from_bogoliubov(A, np.zeros_like(A))


def initial_state(field: FieldParams, n_modes: int = 3) -> GaussianState:
    """Coherent seed on mode 0, vacuum elsewhere."""
    mean = np.zeros(2 * n_modes)
    mean[0] = 2.0 * field.alpha * math.cos(field.phi_alpha)
    mean[1] = 2.0 * field.alpha * math.sin(field.phi_alpha)
    return GaussianState(n_modes, mean, np.eye(2 * n_modes))


def apply_two_mode_squeezer(state: GaussianState, mode_a: int, mode_b: int, sq: SqueezerParams) -> GaussianState:
    return apply_symplectic(state, squeezer_matrix(state.n_modes, mode_a, mode_b, sq))


def apply_object_bs(
    state: GaussianState, mode_in: int, mode_loss: int, pixel: ObjectPixel, completion_phase: float = 0.0
) -> GaussianState:
    U = object_unitary(pixel, completion_phase)
    return apply_symplectic(state, beam_splitter_matrix(state.n_modes, mode_in, mode_loss, U))


def homodyne_vector(phi_beta: float) -> np.ndarray:
    # e^{i phi} a + e^{-i phi} a^dagger = cos(phi) X - sin(phi) P
    return np.array([math.cos(phi_beta), -math.sin(phi_beta)])


def homodyne_moments(state: GaussianState, mode: int, field: FieldParams) -> tuple[float, float]:
    mu, cov = state.block(mode)
    u = homodyne_vector(field.phi_beta)
    return float(field.beta * u @ mu), float(field.beta**2 * u @ cov @ u)


def propagate(setup: SetupParams, pixel: ObjectPixel, completion_phase: float = 0.0) -> GaussianState:
    """Run the full optical chain and return the output three-mode state."""
    state = initial_state(setup.field)
    state = apply_two_mode_squeezer(state, 0, 1, setup.squeezer1)
    state = apply_object_bs(state, 1, 2, pixel, completion_phase)
    return apply_two_mode_squeezer(state, 0, 1, setup.squeezer2)


def oracle_chain(setup: SetupParams, pixel: ObjectPixel) -> tuple[float, float]:
    """Homodyne ``(mean, variance)`` of the signal mode via symplectic propagation."""
    return homodyne_moments(propagate(setup, pixel), 0, setup.field)
