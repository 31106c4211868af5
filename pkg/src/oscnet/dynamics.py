"""Test states, characteristic functions and simulated qubit readout.

Conventions (frozen by the coherent-state validation test):
quadrature ordering (x_1..x_N, p_1..p_N), a = (x + i p)/sqrt(2), vacuum
covariance V = 1/2, and

    chi(xi) = tr{rho exp(xi . a^+ - xi* . a)}
            = exp(i u.d - u.V.u / 2),   u = (sqrt(2) Im xi, -sqrt(2) Re xi),

so the vacuum gives exp(-|xi|^2 / 2) and a coherent state |alpha> gives
exp(-|xi|^2/2 + xi alpha* - xi* alpha).

The probe readout obeys <s1> + i <s2> = chi(xi): the qubit starts in
the +1 eigenstate of s1, is displaced conditionally on s3, and s1 or s2
is measured (never both in the same run).  ``brute_force_evolve`` is the
independent oracle: it integrates the interaction-picture Schroedinger
equation in a truncated Fock space and must reproduce the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import NonPhysicalChi, TruncationLeak
from .network import NormalModeDecomposition
from .protocol import CouplingProfile, evaluate_g

__all__ = [
    "GaussianState",
    "FockState",
    "MeasurementRecord",
    "symplectic_form",
    "vacuum_state",
    "coherent_state",
    "thermal_state",
    "squeezed_state",
    "two_mode_squeezed_state",
    "chi_gaussian",
    "thermal_chi",
    "thermal_occupation",
    "ideal_measurement",
    "sample_shots",
    "point_seed",
    "reduced_chi",
    "destroy_op",
    "displacement_matrix",
    "fock_coherent",
    "fock_cat",
    "fock_thermal_dm",
    "chi_fock",
    "brute_force_evolve",
]


def symplectic_form(n: int) -> np.ndarray:
    """Standard form Omega = [[0, I], [-I, 0]] in (x.., p..) ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class GaussianState:
    """Quadrature mean d (length 2N) and covariance V (2N x 2N).

    Construction enforces the uncertainty relation V + i Omega/2 >= 0
    up to eigenvalue tolerance -1e-10.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.mean, dtype=float)
        V = np.asarray(self.cov, dtype=float)
        if d.ndim != 1 or d.size % 2:
            raise ValueError("mean must have even length 2N")
        n2 = d.size
        if V.shape != (n2, n2):
            raise ValueError(f"cov must be {n2}x{n2}")
        if np.abs(V - V.T).max() > 1e-10:
            raise ValueError("cov must be symmetric")
        V = (V + V.T) / 2
        w = np.linalg.eigvalsh(V + 0.5j * symplectic_form(n2 // 2))
        if w.min() < -1e-10:
            raise ValueError(f"uncertainty relation violated: min eig {w.min():.3e}")
        object.__setattr__(self, "mean", d)
        object.__setattr__(self, "cov", V)

    @property
    def N(self) -> int:
        return self.mean.size // 2


def vacuum_state(n: int) -> GaussianState:
    return GaussianState(np.zeros(2 * n), np.eye(2 * n) / 2)


def coherent_state(alpha) -> GaussianState:
    """Product coherent state with amplitudes alpha (length N)."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    d = np.sqrt(2) * np.concatenate([alpha.real, alpha.imag])
    return GaussianState(d, np.eye(2 * alpha.size) / 2)


def thermal_state(nbar) -> GaussianState:
    """Product thermal state with occupations nbar (length N)."""
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    diag = np.concatenate([nbar + 0.5, nbar + 0.5])
    return GaussianState(np.zeros(2 * nbar.size), np.diag(diag))


def squeezed_state(r: float, phi: float = 0.0) -> GaussianState:
    """Single-mode squeezed vacuum; phi = 0 squeezes x."""
    c, s = np.cos(phi), np.sin(phi)
    R = np.array([[c, -s], [s, c]])
    V = R @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) / 2 @ R.T
    return GaussianState(np.zeros(2), V)


def two_mode_squeezed_state(r: float) -> GaussianState:
    """Two-mode squeezed vacuum with cross-correlated quadratures."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    Vx = np.array([[c, s], [s, c]]) / 2
    Vp = np.array([[c, -s], [-s, c]]) / 2
    V = scipy.linalg.block_diag(Vx, Vp)
    return GaussianState(np.zeros(4), V)


def _real_embedding(xi: np.ndarray) -> np.ndarray:
    return np.concatenate([np.sqrt(2) * xi.imag, -np.sqrt(2) * xi.real])


def chi_gaussian(state: GaussianState, xi) -> complex:
    """Weyl characteristic function of a Gaussian state at point xi."""
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    if xi.size != state.N:
        raise ValueError(f"xi must have length {state.N}")
    u = _real_embedding(xi)
    return complex(np.exp(1j * u @ state.mean - 0.5 * u @ state.cov @ u))


def thermal_occupation(nu, T: float):
    """Bose occupation 1/(e^{nu/T} - 1), safe for nu/T large."""
    x = np.asarray(nu, dtype=float) / T
    out = np.zeros_like(x)
    mod = x < 700
    out[mod] = 1.0 / np.expm1(x[mod])
    return out


def thermal_chi(eta, T: float, nu) -> complex:
    """Thermal characteristic function over the normal modes,
    exp(-sum_k (N(nu_k) + 1/2) |eta_k|^2)."""
    if T <= 0:
        raise ValueError("T must be positive")
    eta = np.atleast_1d(np.asarray(eta, dtype=complex))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    occ = thermal_occupation(nu, T)
    return complex(np.exp(-np.sum((occ + 0.5) * np.abs(eta) ** 2)))


def ideal_measurement(chi_value: complex) -> tuple[float, float]:
    """Exact qubit expectations (<s1>, <s2>) = (Re chi, Im chi)."""
    if abs(chi_value) > 1 + 1e-9:
        raise NonPhysicalChi(f"|chi| = {abs(chi_value):.12g} exceeds 1")
    return (chi_value.real, chi_value.imag)


@dataclass(frozen=True)
class MeasurementRecord:
    """One phase-space point with shot-sampled qubit statistics."""

    point: np.ndarray
    basis: str
    shots: int
    est_s1: float
    est_s2: float
    stderr: float
    f: float = 0.0
    chi_corrected: complex = 0.0
    chi_err: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "point", np.atleast_1d(np.asarray(self.point, dtype=complex)))
        if max(abs(self.est_s1), abs(self.est_s2)) > 1:
            raise ValueError("estimated Pauli expectations must lie in [-1, 1]")


def _sample_one(rng: np.random.Generator, truth: float, shots: int) -> tuple[float, float]:
    p = (1 + truth) / 2
    k = rng.binomial(shots, p)
    est = 2 * k / shots - 1
    if shots > 1:
        var = shots * (1 - est**2) / (shots - 1)  # sample variance of the +/-1 draws
        se = math.sqrt(var / shots)
    else:
        se = 1.0  # single shot: report the worst-case spread of a +/-1 variable
    return est, se


def point_seed(master_seed: int, point_index: int) -> np.random.Generator:
    """Generator for one phase-space point, independent of scheduling."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, point_index)))


def sample_shots(
    truth: tuple[float, float],
    shots: int,
    seed,
    point=0j,
    basis: str = "normal",
) -> MeasurementRecord:
    """Simulate finite-shot estimation of (<s1>, <s2>).

    The two Pauli observables do not commute, so they are sampled from
    separate runs of ``shots`` single-shot +/-1 outcomes each.  ``seed``
    may be an int or a ready Generator; results are reproducible for a
    fixed seed.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    e1, se1 = _sample_one(rng, truth[0], shots)
    e2, se2 = _sample_one(rng, truth[1], shots)
    se = math.sqrt((se1**2 + se2**2) / 2)
    return MeasurementRecord(
        point=point,
        basis=basis,
        shots=shots,
        est_s1=e1,
        est_s2=e2,
        stderr=se,
        f=0.0,
        chi_corrected=complex(e1, e2),
        chi_err=se,
    )


def reduced_chi(chi_fn: Callable, keep: Sequence[int], total_modes: int) -> Callable:
    """Characteristic function of the reduced state over ``keep``.

    Tracing out a mode pins its argument to zero, so the reduced chi is
    the full chi with discarded components set to 0.
    """
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep must be non-empty")
    if any(not 0 <= j < total_modes for j in keep):
        raise ValueError("keep indices out of range")

    def chi_reduced(xi_keep):
        xi_keep = np.atleast_1d(np.asarray(xi_keep, dtype=complex))
        full = np.zeros(total_modes, dtype=complex)
        full[list(keep)] = xi_keep
        return chi_fn(full)

    return chi_reduced


# ---------------------------------------------------------------------------
# Truncated-Fock oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockState:
    """Pure state on the truncated product Fock basis (oracle only)."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"state not normalized: |psi| = {norm:.15g}")
        object.__setattr__(self, "amps", amps)

    @property
    def N(self) -> int:
        return self.amps.ndim

    @property
    def D(self) -> int:
        return self.amps.shape[0]

    def boundary_population(self) -> float:
        """Largest total population on any top Fock level."""
        pop = 0.0
        for ax in range(self.amps.ndim):
            sl = [slice(None)] * self.amps.ndim
            sl[ax] = -1
            pop = max(pop, float(np.sum(np.abs(self.amps[tuple(sl)]) ** 2)))
        return pop


def destroy_op(D: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, D)), 1).astype(complex)


def displacement_matrix(alpha: complex, D: int) -> np.ndarray:
    a = destroy_op(D)
    return scipy.linalg.expm(alpha * a.conj().T - np.conj(alpha) * a)


def fock_coherent(alpha: complex, D: int) -> FockState:
    if alpha == 0:
        amps = np.zeros(D, dtype=complex)
        amps[0] = 1.0
        return FockState(amps)
    n = np.arange(D)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))  # log n!
    amps = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(complex(alpha)) - log_fact / 2)
    return FockState(amps / np.linalg.norm(amps))


def fock_cat(alpha: complex, D: int) -> FockState:
    """Even cat state proportional to |alpha> + |-alpha>."""
    plus = fock_coherent(alpha, D).amps
    minus = fock_coherent(-alpha, D).amps
    amps = plus + minus
    return FockState(amps / np.linalg.norm(amps))


def fock_thermal_dm(nbar: float, D: int) -> np.ndarray:
    """Thermal density matrix, renormalized on the truncated space."""
    if nbar == 0:
        rho = np.zeros((D, D), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    p = (nbar / (1 + nbar)) ** np.arange(D)
    p = p / p.sum()
    return np.diag(p).astype(complex)


def chi_fock(state, xi) -> complex:
    """tr{rho D(xi)} on the truncated Fock space.

    ``state`` may be a FockState, a bare amplitude array (any number of
    modes) or a single-mode density matrix.
    """
    if isinstance(state, FockState):
        arr = state.amps
    else:
        arr = np.asarray(state, dtype=complex)
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1] and xi.size == 1:
        herm = np.abs(arr - arr.conj().T).max() <= 1e-12 * max(1.0, np.abs(arr).max())
        if herm and abs(np.trace(arr) - 1) < 1e-6:
            D = displacement_matrix(complex(xi[0]), arr.shape[0])
            return complex(np.trace(arr @ D))
    psi = arr
    if xi.size != psi.ndim:
        raise ValueError("xi length must match the number of modes")
    vec = psi.reshape(-1)
    op = np.eye(1, dtype=complex)
    for j in range(psi.ndim):
        op = np.kron(op, displacement_matrix(complex(xi[j]), psi.shape[j]))
    return complex(np.vdot(vec, op @ vec))


def _mode_operators(shape: tuple[int, ...]) -> list[np.ndarray]:
    ops = []
    for j, Dj in enumerate(shape):
        factors = [np.eye(d, dtype=complex) for d in shape]
        factors[j] = destroy_op(Dj)
        full = factors[0]
        for f in factors[1:]:
            full = np.kron(full, f)
        ops.append(full)
    return ops


def brute_force_evolve(
    initial: FockState,
    profile: CouplingProfile,
    decomp: Optional[NormalModeDecomposition] = None,
    t: Optional[float] = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> tuple[float, float]:
    """Oracle: direct Schroedinger integration of the probed network.

    Starts from |+> x |psi>, propagates the two s3 branches under
    +/- H_osc(t) with H_osc(t) = g(t) sum_k (G_k b_k e^{-i nu_k t} + h.c.)
    in the interaction picture, and returns
    (<s1>, <s2>) = (Re, Im) of <psi_+ | psi_->.

    Restricted to N <= 2 modes; raises TruncationLeak when population
    reaches the Fock boundary.
    """
    decomp = decomp if decomp is not None else profile.decomp
    if initial.N != decomp.N:
        raise ValueError("state and decomposition mode counts differ")
    if initial.N > 2:
        raise ValueError("oracle restricted to N <= 2")
    t_final = profile.t if t is None else t
    shape = initial.amps.shape
    b_ops = _mode_operators(shape)
    lowering = [G * b for G, b in zip(decomp.G, b_ops)]
    raising = [op.conj().T for op in lowering]
    nu = decomp.nu
    dim = initial.amps.size

    def rhs(s, y):
        g = evaluate_g(profile, s)
        H = np.zeros((dim, dim), dtype=complex)
        for k in range(len(b_ops)):
            ph = np.exp(-1j * nu[k] * s)
            H += g * (ph * lowering[k] + np.conj(ph) * raising[k])
        psi_p, psi_m = y[:dim], y[dim:]
        return np.concatenate([-1j * (H @ psi_p), 1j * (H @ psi_m)])

    y0 = np.concatenate([initial.amps.reshape(-1)] * 2)
    sol = solve_ivp(rhs, (0.0, t_final), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    psi_p = sol.y[:dim, -1]
    psi_m = sol.y[dim:, -1]

    for psi in (psi_p, psi_m):
        drift = abs(np.linalg.norm(psi) - 1)
        if drift > 1e-8:
            raise RuntimeError(f"norm drift {drift:.3e} exceeds 1e-8; tighten tolerances")
        leak = FockState(psi.reshape(shape) / np.linalg.norm(psi)).boundary_population()
        if leak > 1e-6:
            raise TruncationLeak(f"boundary population {leak:.3e} > 1e-6; increase D")

    val = np.vdot(psi_p, psi_m)
    return (float(val.real), float(val.imag))


def with_correction(record: MeasurementRecord, f: float) -> MeasurementRecord:
    """Internal helper shared with the decoherence module."""
    ef = math.exp(f)
    return replace(
        record,
        f=f,
        chi_corrected=complex(record.est_s1, record.est_s2) * ef,
        chi_err=record.stderr * ef,
    )
