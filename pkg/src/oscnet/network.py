"""Quadratic bosonic networks and their normal-mode decomposition.

A network of N harmonic oscillators with local frequencies ``omega_n``,
beam-splitter couplings ``J_nm`` and active (two-mode-squeezing)
couplings ``K_nm`` is described by

    H0 = sum_n omega_n a_n^+ a_n
       + sum_{n<m} J_nm (a_n a_m^+ + a_n^+ a_m)
       + sum_{n<m} K_nm (a_n a_m + a_n^+ a_m^+),

with hbar = 1 and all frequencies in units of a common reference.
``diagonalize`` rewrites H0 as ``sum_k nu_k b_k^+ b_k`` through a
symplectic (Bogoliubov) transformation

    (b, b*) = S (a, a*),    S = [[S1, S2], [S2*, S1*]],

and records the weights ``G_k = (S1 - S2)*_{k, a1}`` with which a probe
attached to node ``a1`` couples to each collective mode.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from .errors import NearDegenerateWarning, UnstableNetwork

__all__ = [
    "NetworkSpec",
    "NormalModeDecomposition",
    "AssumptionReport",
    "SymplecticResiduals",
    "build_quadratic_form",
    "diagonalize",
    "verify_symplectic",
    "diagonal_form_residual",
    "check_assumptions",
    "local_normal_convert",
]

DEFAULT_G_TOL = 1e-8
DEFAULT_GAP_TOL = 1e-8
_NEAR_DEGENERATE_GAP = 1e-6


def _coupling_matrix(M, n: int, name: str) -> np.ndarray:
    """Validate/symmetrize a coupling matrix given either as a full
    symmetric matrix or as its (strict) triangular part."""
    if M is None:
        return np.zeros((n, n))
    M = np.array(M, dtype=float)
    if M.shape != (n, n):
        raise ValueError(f"{name} must be {n}x{n}, got {M.shape}")
    if np.abs(np.diag(M)).max(initial=0.0) > 0:
        raise ValueError(f"{name} must have zero diagonal")
    asym = np.abs(M - M.T).max()
    if asym == 0.0:
        return M
    if np.all(np.tril(M, -1) == 0) or np.all(np.triu(M, 1) == 0):
        return M + M.T  # triangular input: mirror it
    if asym <= 1e-12 * max(1.0, np.abs(M).max()):
        return (M + M.T) / 2
    raise ValueError(f"{name} must be symmetric or triangular")


@dataclass(frozen=True)
class NetworkSpec:
    """Local frequencies and coupling matrices of a quadratic network.

    Parameters
    ----------
    omega : array_like, shape (N,)
        Positive local frequencies.
    J, K : array_like, shape (N, N), optional
        Symmetric zero-diagonal coupling matrices (a strictly triangular
        matrix is accepted and mirrored).  ``None`` means uncoupled.
    """

    omega: np.ndarray
    J: np.ndarray = None
    K: np.ndarray = None

    def __post_init__(self):
        omega = np.atleast_1d(np.array(self.omega, dtype=float))
        if omega.ndim != 1 or omega.size < 1:
            raise ValueError("omega must be a non-empty 1-d sequence")
        if np.any(omega <= 0):
            raise ValueError("all local frequencies must be positive")
        n = omega.size
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "J", _coupling_matrix(self.J, n, "J"))
        object.__setattr__(self, "K", _coupling_matrix(self.K, n, "K"))

    @property
    def N(self) -> int:
        return self.omega.size

    def permuted(self, perm) -> "NetworkSpec":
        """Relabel oscillators by the given permutation."""
        p = np.asarray(perm)
        return NetworkSpec(self.omega[p], self.J[np.ix_(p, p)], self.K[np.ix_(p, p)])


@dataclass(frozen=True)
class NormalModeDecomposition:
    """Symplectic diagonalization of a network Hamiltonian.

    ``nu`` is sorted ascending; rows of ``S1``/``S2`` and entries of
    ``G`` follow that order.  The gauge is fixed so that every ``G_k``
    is real and non-negative.
    """

    nu: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    G: np.ndarray
    a1_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float))
        object.__setattr__(self, "S1", np.asarray(self.S1, dtype=complex))
        object.__setattr__(self, "S2", np.asarray(self.S2, dtype=complex))
        object.__setattr__(self, "G", np.asarray(self.G, dtype=complex))

    @property
    def N(self) -> int:
        return self.nu.size

    @property
    def S(self) -> np.ndarray:
        """Full 2N x 2N symplectic matrix [[S1, S2], [S2*, S1*]]."""
        return np.block([[self.S1, self.S2], [self.S2.conj(), self.S1.conj()]])

    @property
    def S_inv(self) -> np.ndarray:
        """Inverse of S, available in closed form from the blocks."""
        return np.block(
            [[self.S1.conj().T, -self.S2.T], [-self.S2.conj().T, self.S1.T]]
        )

    @property
    def min_gap(self) -> float:
        if self.N < 2:
            return np.inf
        return float(np.diff(self.nu).min())


class SymplecticResiduals(NamedTuple):
    """Max-norm violations of the two symplectic block constraints."""

    commutation: float  # S1^+ S1 - (S2^+ S2)* = 1
    pairing: float      # S1^+ S2 = (S2^+ S1)*


@dataclass(frozen=True)
class AssumptionReport:
    """Result of the protocol assumption check.

    A1 (``coupled``): every |G_k| exceeds ``g_tol``.
    A2 (``nondegenerate``): every spectral gap exceeds ``gap_tol``.
    """

    coupled: bool
    nondegenerate: bool
    weak_g_indices: tuple
    close_pairs: tuple
    min_coupling: float
    min_gap: float
    near_degenerate: bool

    @property
    def passed(self) -> bool:
        return self.coupled and self.nondegenerate


def build_quadratic_form(spec: NetworkSpec) -> np.ndarray:
    """Coefficient matrix of H0 over the ordered basis (a, a^+).

    Returns the 2N x 2N Hermitian matrix H_qf with
    ``H0 = 1/2 (a^+, a) H_qf (a, a^+)^T + const``: the diagonal block
    carries omega and J, the off-diagonal block carries K.
    """
    W = np.diag(spec.omega) + spec.J
    return np.block([[W, spec.K], [spec.K, W]]).astype(complex)


def _sigma_z(n: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def diagonalize(spec: NetworkSpec, a1_index: int = 0) -> NormalModeDecomposition:
    """Compute the normal-mode decomposition of a stable network.

    Pairs the +/-nu eigenvalue branches of Sigma_z H_qf and keeps the
    positive one, with eigenvectors normalized to symplectic norm +1.
    Implemented through the Cholesky reduction H_qf = L L^+, which turns
    the problem into a Hermitian eigenproblem for L^+ Sigma_z L and is
    exact for positive-definite quadratic forms.

    Raises
    ------
    UnstableNetwork
        If H_qf is not positive definite, i.e. some eigenfrequency would
        be non-positive or acquire an imaginary part.
    """
    n = spec.N
    if not 0 <= a1_index < n:
        raise ValueError(f"a1_index {a1_index} out of range for N={n}")
    H = build_quadratic_form(spec)
    sz = _sigma_z(n)

    evals = scipy.linalg.eigh(H, eigvals_only=True)
    if evals[0] <= 1e-12 * max(1.0, abs(evals[-1])):
        dyn = np.linalg.eigvals(sz @ H)
        bad = dyn[(dyn.real <= 0) | (np.abs(dyn.imag) > 1e-10)]
        raise UnstableNetwork(
            "network is not stable: quadratic form has min eigenvalue "
            f"{evals[0]:.3e}; dynamical eigenvalues include {bad[:4]}"
        )

    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:  # borderline PD
        raise UnstableNetwork("quadratic form numerically not positive definite") from exc

    A = L.conj().T @ sz @ L
    lam, U = np.linalg.eigh(A)
    nu = lam[n:]  # exactly N positive eigenvalues by Sylvester inertia
    if nu[0] <= 0:
        raise UnstableNetwork(f"non-positive eigenfrequency {nu[0]:.3e}")

    # Columns of T = S^-1 for the positive branch: T_k = L^-+ u_k sqrt(nu_k).
    T = scipy.linalg.solve_triangular(L.conj().T, U[:, n:], lower=False)
    T = T * np.sqrt(nu)[None, :]
    P, Q = T[:n, :], T[n:, :]

    # Gauge: rotate each mode so G_k = P[a1,k] + Q[a1,k] is real >= 0;
    # if G_k ~ 0 pin the largest entry of row k of S1 real positive.
    g = P[a1_index, :] + Q[a1_index, :]
    scale = np.abs(T).max()
    phase = np.ones(n, dtype=complex)
    for k in range(n):
        if abs(g[k]) > 1e-13 * scale:
            phase[k] = (g[k] / abs(g[k])).conj()
        else:
            i = int(np.argmax(np.abs(P[:, k])))
            phase[k] = (P[i, k] / abs(P[i, k])).conj()
    P = P * phase[None, :]
    Q = Q * phase[None, :]

    S1 = P.conj().T
    S2 = -Q.conj().T
    G = (S1 - S2)[:, a1_index].conj()
    return NormalModeDecomposition(nu=nu, S1=S1, S2=S2, G=G, a1_index=a1_index)


def verify_symplectic(decomp: NormalModeDecomposition) -> SymplecticResiduals:
    """Max-norm residuals of the two symplectic constraints on (S1, S2)."""
    S1, S2 = decomp.S1, decomp.S2
    n = decomp.N
    r1 = S1.conj().T @ S1 - (S2.conj().T @ S2).conj() - np.eye(n)
    r2 = S1.conj().T @ S2 - (S2.conj().T @ S1).conj()
    return SymplecticResiduals(
        commutation=float(np.abs(r1).max()), pairing=float(np.abs(r2).max())
    )


def diagonal_form_residual(spec: NetworkSpec, decomp: NormalModeDecomposition) -> float:
    """Max deviation of the transformed quadratic form from diag(nu, nu).

    Transforms H_qf with S^-1 and compares against the diagonal matrix
    with entries nu_k in both blocks; zero for an exact decomposition.
    """
    H = build_quadratic_form(spec)
    T = decomp.S_inv
    R = T.conj().T @ H @ T
    target = np.diag(np.concatenate([decomp.nu, decomp.nu]))
    return float(np.abs(R - target).max())


def check_assumptions(
    decomp: NormalModeDecomposition,
    g_tol: float = DEFAULT_G_TOL,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> AssumptionReport:
    """Check the two protocol assumptions, reporting offenders.

    A near-degenerate spectrum (gap below 1e-6 but above ``gap_tol``) is
    accepted with a warning: the protocol still works but needs long
    interaction times.
    """
    if g_tol <= 0 or gap_tol <= 0:
        raise ValueError("tolerances must be positive")
    absG = np.abs(decomp.G)
    weak = tuple(int(i) for i in np.nonzero(absG <= g_tol)[0])
    min_coupling = float(absG.min())

    nu = decomp.nu
    close = []
    min_gap = np.inf
    for j in range(decomp.N):
        for k in range(j + 1, decomp.N):
            gap = abs(nu[k] - nu[j])
            min_gap = min(min_gap, gap)
            if gap <= gap_tol:
                close.append((j, k))
    near = gap_tol < min_gap < _NEAR_DEGENERATE_GAP
    if near:
        warnings.warn(
            f"spectrum nearly degenerate (min gap {min_gap:.3e}); "
            "expect very long interaction times",
            NearDegenerateWarning,
            stacklevel=2,
        )
    return AssumptionReport(
        coupled=not weak,
        nondegenerate=not close,
        weak_g_indices=weak,
        close_pairs=tuple(close),
        min_coupling=min_coupling,
        min_gap=float(min_gap),
        near_degenerate=near,
    )


def local_normal_convert(
    decomp: NormalModeDecomposition,
    vec,
    direction: Literal["local_to_normal", "normal_to_local"],
) -> np.ndarray:
    """Map displacement parameters between the local and normal bases.

    Implements (-alpha*, alpha) = S^T (-beta*, beta) and its inverse;
    the round trip is the identity to machine precision.
    """
    v = np.asarray(vec, dtype=complex)
    if v.shape != (decomp.N,):
        raise ValueError(f"expected length-{decomp.N} vector, got shape {v.shape}")
    if direction == "local_to_normal":
        return decomp.S1 @ v + decomp.S2 @ v.conj()
    if direction == "normal_to_local":
        return decomp.S1.conj().T @ v - decomp.S2.T @ v.conj()
    raise ValueError(f"unknown direction {direction!r}")
