"""Markovian decoherence: closed-form damping of the measured signal.

Each normal mode couples to its own thermal bath (rate kappa_k,
occupation Nbar_k) and the probe qubit thermalizes and dephases at
rates Gamma1, Gamma2.  The master equation admits a closed-form
solution: the qubit readout becomes

    <s1> + i <s2> = chi(eta) e^{-f(g, t)},

where eta is a damped displacement functional of the pulse and
f >= 0 is state-independent,

    f = gamma t + sum_k [ Delta_k (1 - e^{-kappa_k t}) |mu_k(t)|^2 + tau_k(t) ],
    gamma = Gamma1 (Nq + 1/2) + 2 Gamma2,    Delta_k = Nbar_k + 1/2,
    tau_k(t) = kappa_k Delta_k int_0^t |mu_k(s)|^2 ds.

Knowing f, the true characteristic function is recovered by
multiplying the data by e^f, which inflates the statistical error by
the same factor.  ``brute_force_lindblad`` integrates the master
equation directly in a truncated Fock space and is the module's
correctness oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from ._integrals import integral_exp, integral_s_exp
from .dynamics import FockState, MeasurementRecord, evaluate_g, with_correction
from .errors import OverAmplifiedWarning, TruncationLeak
from .network import NetworkSpec, NormalModeDecomposition
from .protocol import CouplingProfile

__all__ = [
    "DecoherenceSpec",
    "eta_from_profile",
    "mu_k",
    "damping_factor",
    "measured_signal",
    "correct_signal",
    "kappa_from_spectral_density",
    "validity_horizon",
    "brute_force_lindblad",
]

# below kappa*s the sinh-weighted integrals switch to their kappa -> 0 limit
_SMALL_KAPPA_S = 1e-6


@dataclass(frozen=True)
class DecoherenceSpec:
    """Mode damping rates/occupations and qubit rates."""

    kappa: np.ndarray
    Nbar: np.ndarray
    Gamma1: float = 0.0
    Gamma2: float = 0.0
    Nq: float = 0.0

    def __post_init__(self):
        kappa = np.atleast_1d(np.asarray(self.kappa, dtype=float))
        nbar = np.atleast_1d(np.asarray(self.Nbar, dtype=float))
        if kappa.shape != nbar.shape:
            raise ValueError("kappa and Nbar must have the same length")
        if np.any(kappa < 0) or np.any(nbar < 0):
            raise ValueError("rates and occupations must be non-negative")
        if min(self.Gamma1, self.Gamma2, self.Nq) < 0:
            raise ValueError("qubit rates must be non-negative")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "Nbar", nbar)

    @property
    def N(self) -> int:
        return self.kappa.size

    @property
    def gamma(self) -> float:
        """Qubit coherence decay rate Gamma1 (Nq + 1/2) + 2 Gamma2."""
        return self.Gamma1 * (self.Nq + 0.5) + 2 * self.Gamma2

    @property
    def Delta(self) -> np.ndarray:
        return self.Nbar + 0.5

    @classmethod
    def from_temperature(
        cls, kappa, nu, T: float, Gamma1: float = 0.0, Gamma2: float = 0.0, Nq: float = 0.0
    ) -> "DecoherenceSpec":
        """Occupations from a common bath temperature at each nu_k."""
        from .dynamics import thermal_occupation

        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        kappa = np.broadcast_to(np.asarray(kappa, dtype=float), nu.shape).copy()
        return cls(kappa=kappa, Nbar=thermal_occupation(nu, T), Gamma1=Gamma1, Gamma2=Gamma2, Nq=Nq)


def eta_from_profile(
    profile: CouplingProfile, decomp: NormalModeDecomposition, deco: DecoherenceSpec
) -> np.ndarray:
    """Damped displacement eta_k = 2i G_k* int_0^t g(s) e^{i nu_k s - kappa_k s/2} ds."""
    from .protocol import _displacement_sums

    if decomp is not profile.decomp and not np.array_equal(decomp.nu, profile.decomp.nu):
        raise ValueError("profile was synthesized against a different decomposition")
    return -2 * _displacement_sums(profile, deco.kappa, profile.t)


def mu_k(
    profile: CouplingProfile,
    decomp: NormalModeDecomposition,
    deco: DecoherenceSpec,
    t: Optional[float] = None,
) -> np.ndarray:
    """Auxiliary displacement mu_k(t) entering the damping factor.

    mu_k(t) = [2i G_k* / sinh(kappa_k t/2)] int_0^t g(s) e^{i nu_k s} sinh(kappa_k s/2) ds,
    with the analytic kappa -> 0 limit
    mu_k -> (2i G_k*/t) int_0^t g(s) s e^{i nu_k s} ds.
    """
    t = profile.t if t is None else float(t)
    return np.array(
        [_mu_single(profile, decomp, deco.kappa[k], k, t) for k in range(decomp.N)]
    )


def _mu_single(profile, decomp, kappa_k: float, k: int, s: float) -> complex:
    """mu_k evaluated at intermediate time s (profile prefactor keeps 1/t)."""
    nu, G, B = decomp.nu, decomp.G, profile.B
    zm = 1j * (nu[k] - nu)
    zp = 1j * (nu[k] + nu)
    coeff_minus = B / G.conj()
    coeff_plus = B.conj() / G
    if kappa_k * s <= _SMALL_KAPPA_S:
        if s == 0:
            return 0j
        inner = integral_s_exp(zm, s) @ coeff_minus - integral_s_exp(zp, s) @ coeff_plus
        return 2j * G[k].conj() * (1j / profile.t) * inner / s
    hk = kappa_k / 2
    inner = (
        (integral_exp(zm + hk, s) - integral_exp(zm - hk, s)) @ coeff_minus
        - (integral_exp(zp + hk, s) - integral_exp(zp - hk, s)) @ coeff_plus
    ) / 2
    return 2j * G[k].conj() * (1j / profile.t) * inner / math.sinh(hk * s)


def damping_factor(
    profile: CouplingProfile,
    decomp: NormalModeDecomposition,
    deco: DecoherenceSpec,
    t: Optional[float] = None,
    quad_rtol: float = 1e-8,
) -> float:
    """Positive exponent f suppressing the measured signal by e^{-f}.

    The tau_k integrals of |mu_k(s)|^2 have no convenient closed form
    for generic pulses and are evaluated by adaptive quadrature with
    mu_k(s) from its closed/limit form.
    """
    t = profile.t if t is None else float(t)
    f = deco.gamma * t
    mu_t = mu_k(profile, decomp, deco, t)
    for k in range(decomp.N):
        kap = deco.kappa[k]
        if kap == 0:
            continue
        f += deco.Delta[k] * (-np.expm1(-kap * t)) * abs(mu_t[k]) ** 2
        integrand = lambda s: abs(_mu_single(profile, decomp, kap, k, s)) ** 2
        val, _ = quad(integrand, 0.0, t, epsrel=quad_rtol, epsabs=1e-14, limit=4000)
        f += kap * deco.Delta[k] * val
    return float(f)


def measured_signal(chi_true: complex, f: float) -> complex:
    """Signal actually seen by the probe: chi e^{-f}."""
    if f < 0:
        raise ValueError("f must be non-negative")
    return chi_true * math.exp(-f)


def correct_signal(record: MeasurementRecord, f: float) -> MeasurementRecord:
    """Undo the known damping: chi_corrected = (est_s1 + i est_s2) e^f.

    The statistical error inflates by the same factor,
    chi_err = stderr e^f.
    """
    if f < 0:
        raise ValueError("f must be non-negative")
    if math.exp(f) > 100:
        warnings.warn(
            f"e^f = {math.exp(f):.3g}: correction amplifies noise beyond practical shot counts",
            OverAmplifiedWarning,
            stacklevel=2,
        )
    return with_correction(record, f)


def kappa_from_spectral_density(f_env: Callable[[float], float], nu) -> np.ndarray:
    """Mode-bath rates kappa_k = 2 pi [f_env(nu_k)]^2."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    return np.array([2 * np.pi * f_env(float(v)) ** 2 for v in nu])


def validity_horizon(deco: DecoherenceSpec, spec: NetworkSpec) -> float:
    """Largest time for which the diagonal master equation is trustworthy.

    t_max = min_k [1/(kappa_k Nbar_k)] * min_n omega_n / max_nm |K_nm|;
    infinite when K = 0 or every kappa_k Nbar_k vanishes.
    """
    rate = deco.kappa * deco.Nbar
    kmax = float(np.abs(spec.K).max())
    if kmax == 0 or np.all(rate == 0):
        return math.inf
    return float(1.0 / rate.max() * spec.omega.min() / kmax)


def _qubit_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    # basis ordering (|e>, |g>); right-handed tern s1 s2 = i s3
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    sp = np.array([[0, 1], [0, 0]], dtype=complex)  # |e><g|
    sm = sp.conj().T
    return s1, s2, s3, sp, sm


def _dissipator(A: np.ndarray, rho: np.ndarray) -> np.ndarray:
    AdA = A.conj().T @ A
    return 2 * A @ rho @ A.conj().T - AdA @ rho - rho @ AdA


def brute_force_lindblad(
    initial,
    profile: CouplingProfile,
    decomp: NormalModeDecomposition,
    deco: DecoherenceSpec,
    t: Optional[float] = None,
    rtol: float = 1e-9,
    atol: float = 1e-11,
) -> tuple[float, float]:
    """Oracle: density-matrix integration of the single-mode master equation.

    ``initial`` is the oscillator state (FockState or density matrix);
    the qubit starts in the +1 eigenstate of s1.  Returns (<s1>, <s2>)
    at time t.  Trace preservation is checked to 1e-8 and the spectrum
    floor to -1e-8.
    """
    if decomp.N != 1:
        raise ValueError("Lindblad oracle restricted to N = 1")
    t_final = profile.t if t is None else float(t)
    if isinstance(initial, FockState):
        psi = initial.amps.reshape(-1)
        rho_osc = np.outer(psi, psi.conj())
    else:
        rho_osc = np.asarray(initial, dtype=complex)
    D = rho_osc.shape[0]

    from .dynamics import destroy_op

    s1, s2, s3, sp, sm = _qubit_ops()
    eye_o = np.eye(D, dtype=complex)
    b = np.kron(np.eye(2, dtype=complex), destroy_op(D))
    S3 = np.kron(s3, eye_o)
    Sp = np.kron(sp, eye_o)
    Sm = np.kron(sm, eye_o)
    G = complex(decomp.G[0])
    nu = float(decomp.nu[0])
    lower = G * b
    raise_ = lower.conj().T
    kap = float(deco.kappa[0])
    nb = float(deco.Nbar[0])

    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    rho0 = np.kron(np.outer(plus, plus.conj()), rho_osc)
    dim = 2 * D

    def rhs(s, y):
        rho = y.reshape(dim, dim)
        g = evaluate_g(profile, s)
        ph = np.exp(-1j * nu * s)
        H = g * (ph * S3 @ lower + np.conj(ph) * S3 @ raise_)
        drho = -1j * (H @ rho - rho @ H)
        if kap > 0:
            drho += kap / 2 * (nb + 1) * _dissipator(b, rho)
            if nb > 0:
                drho += kap / 2 * nb * _dissipator(b.conj().T, rho)
        if deco.Gamma1 > 0:
            drho += deco.Gamma1 / 2 * (deco.Nq + 1) * _dissipator(Sm, rho)
            if deco.Nq > 0:
                drho += deco.Gamma1 / 2 * deco.Nq * _dissipator(Sp, rho)
        if deco.Gamma2 > 0:
            drho += deco.Gamma2 / 2 * _dissipator(S3, rho)
        return drho.reshape(-1)

    sol = solve_ivp(rhs, (0.0, t_final), rho0.reshape(-1), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    rho = sol.y[:, -1].reshape(dim, dim)

    tr = complex(np.trace(rho))
    if abs(tr - 1) > 1e-8:
        raise RuntimeError(f"trace drift {abs(tr - 1):.3e} exceeds 1e-8")
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if evals.min() < -1e-8:
        raise RuntimeError(f"negative population {evals.min():.3e} below -1e-8")
    # population on the top Fock level, summed over the qubit branches
    top = rho.reshape(2, D, 2, D)
    leak = float((top[0, -1, 0, -1] + top[1, -1, 1, -1]).real)
    if leak > 1e-6:
        raise TruncationLeak(f"boundary population {leak:.3e} > 1e-6; increase D")

    S1 = np.kron(s1, eye_o)
    S2 = np.kron(s2, eye_o)
    return (
        float(np.trace(rho @ S1).real),
        float(np.trace(rho @ S2).real),
    )
