"""Coupling-pulse synthesis for qubit-controlled displacements.

The probe-network coupling is shaped as a sum of tones at the normal
frequencies,

    g(s) = (i/t) sum_l [ (B_l / G_l*) e^{-i nu_l s} - (B_l* / G_l) e^{+i nu_l s} ],

which is real for any coefficient vector B.  The displacements reached
after time t depend linearly on B through a 2N x 2N matrix M built from
elementary exponential integrals; inverting M (well-conditioned for
long enough t) yields the pulse realizing an arbitrary target.  When
each normal mode is damped at rate kappa_k the same construction holds
with the substitution i*Delta -> i*Delta + kappa_k/2 and the modified
relation (-eta*, eta) = -2 M (-B*, B).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from ._integrals import integral_exp
from .errors import AssumptionViolation, DegenerateSpectrum, IllConditioned
from .network import DEFAULT_G_TOL, DEFAULT_GAP_TOL, NormalModeDecomposition

__all__ = [
    "CouplingProfile",
    "MMatrix",
    "min_interaction_time",
    "build_M",
    "synthesize_profile",
    "evaluate_g",
    "beta_from_profile",
    "g_max",
    "pair_stack",
    "pair_unstack",
]


def pair_stack(x) -> np.ndarray:
    """Embed a length-N complex vector x as the 2N vector (-x*, x)."""
    x = np.asarray(x, dtype=complex)
    return np.concatenate([-x.conj(), x])


def pair_unstack(v, rtol: float = 1e-10) -> np.ndarray:
    """Extract x from a (-x*, x) vector, checking the conjugate pairing."""
    v = np.asarray(v, dtype=complex)
    n = v.size // 2
    top, bot = v[:n], v[n:]
    scale = max(1.0, float(np.abs(bot).max(initial=0.0)))
    if np.abs(top + bot.conj()).max(initial=0.0) > rtol * scale:
        raise ArithmeticError("conjugate-pair structure broken beyond tolerance")
    return bot


@dataclass(frozen=True)
class CouplingProfile:
    """Tone coefficients B, duration t and synthesis context of a pulse."""

    B: np.ndarray
    t: float
    decomp: NormalModeDecomposition
    kappa: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "B", np.asarray(self.B, dtype=complex))
        if self.kappa is not None:
            kap = np.asarray(self.kappa, dtype=float)
            if np.any(kap < 0):
                raise ValueError("kappa rates must be non-negative")
            object.__setattr__(self, "kappa", kap)
        if self.t <= 0:
            raise ValueError("interaction time must be positive")

    @property
    def N(self) -> int:
        return self.B.size


@dataclass(frozen=True)
class MMatrix:
    """Blocks of the pulse-to-displacement map, with det and condition."""

    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    M4: np.ndarray
    t: float
    kappa: Optional[np.ndarray]
    det: complex
    cond: float

    @property
    def full(self) -> np.ndarray:
        return np.block([[self.M1, self.M2], [self.M3, self.M4]])


def min_interaction_time(
    decomp: NormalModeDecomposition, gap_tol: float = DEFAULT_GAP_TOL
) -> float:
    """Shortest time resolving the smallest frequency difference.

    Returns pi / min_{j != k} |nu_j - nu_k|.  A single-mode network has
    no frequency differences; there pi/(2 nu) (the scale needed to
    resolve the counter-rotating tone) is returned instead.

    Raises
    ------
    DegenerateSpectrum
        If the smallest gap is at or below ``gap_tol``.
    """
    if decomp.N == 1:
        return np.pi / (2 * decomp.nu[0])
    gap = decomp.min_gap
    if gap <= gap_tol:
        raise DegenerateSpectrum(f"min spectral gap {gap:.3e} <= gap_tol {gap_tol:.3e}")
    return np.pi / gap


def _check_coupled(decomp: NormalModeDecomposition, g_tol: float):
    absG = np.abs(decomp.G)
    if absG.min() <= g_tol:
        bad = np.nonzero(absG <= g_tol)[0]
        raise AssumptionViolation(f"|G_k| <= {g_tol:g} for modes {bad.tolist()}")


def build_M(
    decomp: NormalModeDecomposition,
    t: float,
    kappa=None,
    g_tol: float = DEFAULT_G_TOL,
) -> MMatrix:
    """Evaluate the 2N x 2N displacement map in closed form.

    Block entries ((1/t) I denotes the damped Fourier window):

        (M1)_{kl} = (G_k / G_l ) (1/t) I(nu_k - nu_l, kappa_k)
        (M2)_{kl} = (G_k / G_l*) (1/t) I(nu_k + nu_l, kappa_k)
        M3 = M2*,  M4 = M1*   (elementwise)

    with I(D, kap) = (1 - e^{-(iD + kap/2) t}) / (iD + kap/2) and the
    removable D = kap = 0 singularity evaluated by series.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    _check_coupled(decomp, g_tol)
    nu, G = decomp.nu, decomp.G
    kap = np.zeros(decomp.N) if kappa is None else np.asarray(kappa, dtype=float)

    d_minus = nu[:, None] - nu[None, :]
    d_plus = nu[:, None] + nu[None, :]
    half_k = kap[:, None] / 2
    I_minus = integral_exp(-(1j * d_minus + half_k), t)
    I_plus = integral_exp(-(1j * d_plus + half_k), t)

    M1 = (G[:, None] / G[None, :]) * I_minus / t
    # diagonal: G_k/G_k = 1 analytically; without damping the window
    # integral is exactly t, so (M1)_kk = 1
    np.fill_diagonal(M1, integral_exp(-kap / 2 + 0j, t) / t)
    M2 = (G[:, None] / G[None, :].conj()) * I_plus / t
    M3 = M2.conj()
    M4 = M1.conj()
    full = np.block([[M1, M2], [M3, M4]])
    return MMatrix(
        M1=M1,
        M2=M2,
        M3=M3,
        M4=M4,
        t=float(t),
        kappa=None if kappa is None else kap,
        det=complex(np.linalg.det(full)),
        cond=float(np.linalg.cond(full)),
    )


def synthesize_profile(
    decomp: NormalModeDecomposition,
    target,
    t: float,
    basis: Literal["normal", "local"] = "normal",
    kappa=None,
    g_tol: float = DEFAULT_G_TOL,
    cond_max: float = 1e8,
) -> CouplingProfile:
    """Solve for the tone coefficients realizing a target displacement.

    Without damping the target is the displacement vector itself (alpha
    for ``basis="local"``, beta for ``basis="normal"``) and B solves
    (-B*, B) = (S^T M)^{-1} (-alpha*, alpha), respectively
    (-B*, B) = M^{-1} (-beta*, beta).  With ``kappa`` given, the target
    is the phase-space point eta probed by the damped protocol (its
    local-basis image for ``basis="local"``) and
    (-eta*, eta) = -2 M (-B*, B) is inverted instead.

    Raises
    ------
    IllConditioned
        If cond(M) exceeds ``cond_max`` (interaction time too short).
    AssumptionViolation
        If some |G_l| is below ``g_tol``.
    """
    target = np.asarray(target, dtype=complex)
    if target.shape != (decomp.N,):
        raise ValueError(f"target must have shape ({decomp.N},)")
    if not np.all(np.isfinite(target.view(float))):
        raise ValueError("target must be finite")

    M = build_M(decomp, t, kappa=kappa, g_tol=g_tol)
    if M.cond > cond_max:
        raise IllConditioned(
            f"cond(M) = {M.cond:.3e} > {cond_max:.1e}; increase the interaction time"
        )

    A = M.full
    if kappa is not None:
        A = -2 * A
    if basis == "local":
        A = decomp.S.T @ A
    elif basis != "normal":
        raise ValueError(f"unknown basis {basis!r}")

    x = np.linalg.solve(A, pair_stack(target))
    B = pair_unstack(x)  # validates the (-B*, B) structure post-solve
    return CouplingProfile(B=B, t=float(t), decomp=decomp, kappa=M.kappa)


def evaluate_g(profile: CouplingProfile, s) -> np.ndarray:
    """Coupling strength g(s); real by conjugate-pair construction."""
    s_arr = np.asarray(s, dtype=float)
    decomp = profile.decomp
    phases = np.exp(-1j * np.outer(s_arr, decomp.nu))
    z = (1j / profile.t) * (phases @ (profile.B / decomp.G.conj()))
    g = 2 * z.real
    return g if s_arr.ndim else float(g[0])


def _displacement_sums(profile: CouplingProfile, kappa: np.ndarray, upto: float) -> np.ndarray:
    """val_k = -i G_k* int_0^upto g(s) e^{i nu_k s - kappa_k s / 2} ds, closed form."""
    decomp = profile.decomp
    nu, G, B = decomp.nu, decomp.G, profile.B
    z_minus = 1j * (nu[:, None] - nu[None, :]) - kappa[:, None] / 2
    z_plus = 1j * (nu[:, None] + nu[None, :]) - kappa[:, None] / 2
    E_minus = integral_exp(z_minus, upto)
    E_plus = integral_exp(z_plus, upto)
    coeff_minus = B / G.conj()
    coeff_plus = B.conj() / G
    return (G.conj() / profile.t) * (E_minus @ coeff_minus - E_plus @ coeff_plus)


def beta_from_profile(
    profile: CouplingProfile,
    decomp: Optional[NormalModeDecomposition] = None,
    kappa="profile",
) -> np.ndarray:
    """Displacement realized by a pulse, in closed form over the tones.

    With no damping this is beta_k = -i G_k* int_0^t g(s) e^{i nu_k s} ds.
    If the profile carries damping rates (or ``kappa`` is given
    explicitly) the damped-protocol point
    eta_k = 2 i G_k* int_0^t g(s) e^{i nu_k s - kappa_k s/2} ds is
    returned instead, so synthesis round trips reproduce their target.
    Pass ``kappa=None`` to force the undamped displacement.
    """
    if decomp is not None and not np.array_equal(decomp.nu, profile.decomp.nu):
        raise ValueError("profile was synthesized against a different decomposition")
    kap = profile.kappa if isinstance(kappa, str) and kappa == "profile" else kappa
    if kap is None:
        return _displacement_sums(profile, np.zeros(profile.N), profile.t)
    kap = np.asarray(kap, dtype=float)
    return -2 * _displacement_sums(profile, kap, profile.t)


def g_max(profile: CouplingProfile, sample_density: int = 40) -> float:
    """Max |g(s)| over [0, t] by dense sampling plus parabolic refinement.

    ``sample_density`` counts grid points per unit time 1/nu_max; the
    minimum of 20 keeps the grid well below the fastest oscillation.
    """
    if sample_density < 20:
        raise ValueError("sample_density must be >= 20")
    if np.all(profile.B == 0):
        return 0.0
    nu_max = float(profile.decomp.nu.max())
    n = int(np.ceil(profile.t * nu_max * sample_density)) + 1
    s = np.linspace(0.0, profile.t, n)
    g = np.abs(evaluate_g(profile, s))
    i = int(np.argmax(g))
    best = float(g[i])
    if 0 < i < n - 1:
        # vertex of the parabola through the three top samples
        y0, y1, y2 = g[i - 1], g[i], g[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            ds = s[1] - s[0]
            s_star = s[i] + 0.5 * ds * (y0 - y2) / denom
            best = max(best, float(abs(evaluate_g(profile, s_star))))
    return best
