"""Brute-force truncated Fock-space oracle for the homodyne moments.

Only meaningful at small gain and small seed amplitude (r <= 0.3, alpha <= 1),
where a cutoff of ~20 photons per mode holds the state. Each optical element is
applied as the exponential of its generator acting on the state vector, so no
Gaussian-state formalism is involved.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .errors import CutoffTooSmallError
from .optics import ObjectPixel, SetupParams, SqueezerParams
from .oracle import object_unitary

LEAK_TOL = 1e-8
N_MODES = 3


def annihilation(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr")


def mode_operators(cutoff: int, n_modes: int = N_MODES) -> list[sp.csr_matrix]:
    """Annihilation operators of each mode on the tensor-product space."""
    a = annihilation(cutoff)
    eye = sp.identity(cutoff + 1, format="csr")
    ops = []
    for m in range(n_modes):
        factors = [a if k == m else eye for k in range(n_modes)]
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op.astype(complex))
    return ops


def expm_multiply_taylor(A: sp.spmatrix, v: np.ndarray, tol: float = 1e-16) -> np.ndarray:
    """``exp(A) v`` by a scaled Taylor series: ``(exp(A/s))^s v`` with ``||A/s||_1 <= 1/2``."""
    norm = float(abs(A).sum(axis=0).max()) if A.nnz else 0.0
    steps = max(1, math.ceil(2.0 * norm))
    B = A / steps
    for _ in range(steps):
        term = v
        out = v.copy()
        k = 1
        while True:
            term = (B @ term) / k
            out += term
            if np.linalg.norm(term) <= tol * np.linalg.norm(out):
                break
            k += 1
        v = out
    return v


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    mag = abs(alpha)
    if mag == 0.0:
        out = np.zeros(cutoff + 1, dtype=complex)
        out[0] = 1.0
        return out
    amp = np.exp(-0.5 * mag**2 + n * math.log(mag) - 0.5 * log_fact)
    return amp * np.exp(1j * n * np.angle(alpha))


class FockOracle:
    """Three-mode truncated Fock simulator with per-mode cutoff ``cutoff``."""

    def __init__(self, cutoff: int):
        self.cutoff = cutoff
        self.dim = (cutoff + 1) ** N_MODES
        self.a = mode_operators(cutoff)
        levels = np.arange(self.dim)
        d = cutoff + 1
        occ = [(levels // d ** (N_MODES - 1 - m)) % d for m in range(N_MODES)]
        self._boundary = np.zeros(self.dim, dtype=bool)
        for o in occ:
            self._boundary |= o == cutoff
        self.leak = 0.0

    def _check_leak(self, psi: np.ndarray, stage: str) -> None:
        leak = float(np.sum(np.abs(psi[self._boundary]) ** 2))
        self.leak = max(self.leak, leak)
        if leak > LEAK_TOL:
            raise CutoffTooSmallError(
                f"cutoff {self.cutoff}: population {leak:.3e} at the truncation edge after {stage}"
            )

    def initial(self, alpha: complex) -> np.ndarray:
        c0 = coherent_amplitudes(alpha, self.cutoff)
        deficit = 1.0 - float(np.sum(np.abs(c0) ** 2))
        if deficit > LEAK_TOL:
            raise CutoffTooSmallError(f"cutoff {self.cutoff}: coherent seed norm deficit {deficit:.3e}")
        vac = np.zeros(self.cutoff + 1, dtype=complex)
        vac[0] = 1.0
        psi = np.kron(np.kron(c0, vac), vac)
        self._check_leak(psi, "state preparation")
        return psi

    def squeeze(self, psi: np.ndarray, m: int, n: int, sq: SqueezerParams) -> np.ndarray:
        a, b = self.a[m], self.a[n]
        e = np.exp(1j * sq.pump_phase)
        ab = a @ b
        gen = sq.r * (e * ab.conj().T - e.conjugate() * ab)
        out = expm_multiply_taylor(gen, psi)
        self._check_leak(out, "squeezer")
        return out

    def beam_splitter(self, psi: np.ndarray, m: int, n: int, U: np.ndarray) -> np.ndarray:
        # exp(X) with X = i sum_jk H_jk a_j^dagger a_k maps a -> e^{iH} a; H = -i log U
        w, V = np.linalg.eig(U)
        H = V @ np.diag(np.angle(w)) @ np.linalg.inv(V)
        ops = (self.a[m], self.a[n])
        gen = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for j in range(2):
            for k in range(2):
                if H[j, k] != 0:
                    gen = gen + 1j * H[j, k] * (ops[j].conj().T @ ops[k])
        out = expm_multiply_taylor(gen, psi)
        self._check_leak(out, "beam splitter")
        return out

    def homodyne(self, psi: np.ndarray, mode: int, beta: float, phi_beta: float) -> tuple[float, float]:
        a = self.a[mode]
        e = np.exp(1j * phi_beta)
        S = beta * (e * a + e.conjugate() * a.conj().T)
        s_psi = S @ psi
        mean = float(np.vdot(psi, s_psi).real)
        second = float(np.vdot(s_psi, s_psi).real)
        return mean, second - mean * mean


def fock_moments(setup: SetupParams, pixel: ObjectPixel, cutoff: int = 20) -> tuple[float, float]:
    """Homodyne ``(mean, variance)`` from a truncated Fock-space simulation.

    Raises
    ------
    CutoffTooSmallError
        If more than 1e-8 of the population reaches the truncation edge at any stage.
    """
    f = setup.field
    oracle = FockOracle(cutoff)
    psi = oracle.initial(f.alpha * np.exp(1j * f.phi_alpha))
    psi = oracle.squeeze(psi, 0, 1, setup.squeezer1)
    psi = oracle.beam_splitter(psi, 1, 2, object_unitary(pixel))
    psi = oracle.squeeze(psi, 0, 1, setup.squeezer2)
    return oracle.homodyne(psi, 0, f.beta, f.phi_beta)
