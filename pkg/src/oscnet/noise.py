"""Phase-space resolution limits from white noise on the coupling.

A white-noise component zeta(s) of strength eps on top of g(s) jitters
the realized displacements by zero-mean complex random variables

    delta_beta_k = -i G_k* int_0^t zeta(s) e^{i nu_k s} ds

with covariance

    V_kk' = eps Re{ G_k* G_k' int_0^t e^{i (nu_k - nu_k') s} ds },

so that V_kk = |G_k|^2 eps t.  The square roots of the eigenvalues of V
measure the achievable resolution along the uncorrelated phase-space
directions; for large t they approach |G_k| sqrt(eps t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._integrals import integral_exp
from .network import NormalModeDecomposition

__all__ = [
    "NoiseSpec",
    "delta_beta_covariance",
    "resolution_spectrum",
    "monte_carlo_delta_beta",
    "MonteCarloResult",
]


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise strength on the tunable coupling, in frequency units."""

    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


def delta_beta_covariance(decomp: NormalModeDecomposition, t: float, eps: float) -> np.ndarray:
    """Closed-form covariance of the displacement jitter (see module doc)."""
    if t <= 0:
        raise ValueError("t must be positive")
    nu, G = decomp.nu, decomp.G
    E = integral_exp(1j * (nu[:, None] - nu[None, :]), t)
    V = eps * (G.conj()[:, None] * G[None, :] * E).real
    V = (V + V.T) / 2
    scale = max(np.abs(V).max(initial=0.0), 1e-300)
    if np.linalg.eigvalsh(V).min() < -1e-12 * scale:
        raise ArithmeticError("jitter covariance lost positive semidefiniteness")
    return V


def resolution_spectrum(V: np.ndarray) -> np.ndarray:
    """Square roots of the eigenvalues of V, ascending."""
    lam = np.linalg.eigvalsh(np.asarray(V, dtype=float))
    scale = max(np.abs(lam).max(initial=0.0), 1e-300)
    if lam.min() < -1e-12 * scale:
        raise ValueError("V is not positive semidefinite")
    return np.sqrt(np.clip(lam, 0.0, None))


@dataclass(frozen=True)
class MonteCarloResult:
    """Sampled jitter statistics with per-entry standard errors."""

    cov: np.ndarray
    cov_stderr: np.ndarray
    mean: np.ndarray
    mean_stderr: np.ndarray
    realizations: int
    dt: float


def monte_carlo_delta_beta(
    decomp: NormalModeDecomposition,
    t,
    eps: float,
    realizations: int,
    dt: Optional[float] = None,
    seed: int = 0,
    chunk: int = 512,
) -> MonteCarloResult:
    """Sample the jitter covariance by simulating the noise directly.

    zeta is piecewise constant over steps dt with per-step variance
    eps/dt (the standard Ito-consistent discretization of delta-
    correlated noise) and the per-realization delta_beta uses the exact
    integral of each constant piece.  The jitter is independent of the
    deterministic pulse, so ``t`` may be either a duration or a
    CouplingProfile (whose duration is used).  Per-realization seeds
    derive from (seed, index), so results do not depend on chunking or
    scheduling.
    """
    if hasattr(t, "t"):
        t = t.t
    t = float(t)
    if realizations < 1000:
        raise ValueError("need at least 1e3 realizations for stable statistics")
    nu_max = float(decomp.nu.max())
    if dt is None:
        dt = 0.005 / nu_max
    if dt > 0.01 / nu_max:
        raise ValueError("dt must resolve the fastest oscillation: dt <= 0.01/max(nu)")
    steps = int(np.ceil(t / dt))
    dt = t / steps
    nu, G = decomp.nu, decomp.G
    n = decomp.N

    # exact integral of e^{i nu s} over each step
    edges = dt * np.arange(steps)
    step_w = np.exp(1j * np.outer(edges, nu)) * integral_exp(1j * nu, dt)[None, :]

    sigma = np.sqrt(eps / dt)
    dbeta = np.empty((realizations, n), dtype=complex)
    done = 0
    while done < realizations:
        m = min(chunk, realizations - done)
        block = np.empty((m, steps))
        for i in range(m):
            rng = np.random.default_rng(np.random.SeedSequence((seed, done + i)))
            block[i] = rng.standard_normal(steps)
        dbeta[done : done + m] = (-1j * G.conj())[None, :] * (sigma * block @ step_w)
        done += m

    prods = (dbeta.conj()[:, :, None] * dbeta[:, None, :]).real
    cov = prods.mean(axis=0)
    cov_se = prods.std(axis=0, ddof=1) / np.sqrt(realizations)
    mean = dbeta.mean(axis=0)
    comp_var = dbeta.real.var(axis=0, ddof=1) + 1j * dbeta.imag.var(axis=0, ddof=1)
    mean_se = np.sqrt(comp_var.real / realizations) + 1j * np.sqrt(comp_var.imag / realizations)
    return MonteCarloResult(
        cov=cov,
        cov_stderr=cov_se,
        mean=mean,
        mean_stderr=mean_se,
        realizations=realizations,
        dt=dt,
    )
