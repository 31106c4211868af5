"""Post-processing of reconstructed characteristic-function values.

Three consumers of sampled chi data: low-order moment extraction by a
weighted fit near the origin, thermal-hypothesis testing with
temperature estimation, and a physicality diagnostic based on the
positivity of the displacement kernel (quantum Bochner theorem).

Moments come from a fit rather than numerical derivatives, which would
amplify shot noise.  The fitted model is the quadratic cumulant
expansion of log chi, which is exact for every Gaussian state: writing

    log chi = sum_j (xi_j <a_j^+> - xi_j* <a_j>) + quadratic cumulants

the linear coefficients carry the first moments and the coefficient of
xi_j xi_k* equals -(<a_j^+ a_k>_c + delta_jk/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import chi2

from .dynamics import thermal_occupation
from .errors import InsufficientClosure, RankDeficient

__all__ = [
    "ChiSample",
    "MomentFit",
    "TemperatureFit",
    "BochnerReport",
    "fit_moments",
    "estimate_temperature",
    "bochner_check",
    "star_grid",
    "lattice_grid",
]

_ERR_FLOOR = 1e-12
_EXACT_RESIDUAL_RTOL = 1e-6


@dataclass(frozen=True)
class ChiSample:
    """One reconstructed characteristic-function value with its error."""

    point: np.ndarray
    value: complex
    err: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "point", np.atleast_1d(np.asarray(self.point, dtype=complex)))
        if not (np.isfinite(self.err) and self.err >= 0):
            raise ValueError("err must be finite and non-negative")
        if not np.isfinite([self.value.real, self.value.imag]).all():
            raise ValueError("value must be finite")

    @property
    def N(self) -> int:
        return self.point.size


def star_grid(n_modes: int, rings: Sequence[float] = (0.15, 0.3), angles: int = 8) -> list[np.ndarray]:
    """Default moment-fit grid: the origin plus rings on each mode."""
    pts = [np.zeros(n_modes, dtype=complex)]
    for j in range(n_modes):
        for r in rings:
            for m in range(angles):
                p = np.zeros(n_modes, dtype=complex)
                p[j] = r * np.exp(2j * np.pi * m / angles)
                pts.append(p)
    return pts


def lattice_grid(n_modes: int, spacing: float = 0.4, span: int = 2) -> list[np.ndarray]:
    """Cartesian product of per-mode complex lattices.

    The inner half of the lattice is closed under pairwise differences
    relative to the full set, which is what the Bochner kernel needs.
    Size grows as (2 span + 1)^(2 n_modes); meant for 1-2 modes.
    """
    axis = [m * spacing for m in range(-span, span + 1)]
    vals = [complex(x, y) for x in axis for y in axis]
    pts = [np.zeros(n_modes, dtype=complex)]
    grids = np.meshgrid(*([vals] * n_modes), indexing="ij")
    stacked = np.stack([g.reshape(-1) for g in grids], axis=-1)
    seen = {tuple(np.round(np.zeros(2 * n_modes), 9))}
    for row in stacked:
        key = tuple(np.round(np.concatenate([row.real, row.imag]), 9))
        if key not in seen:
            seen.add(key)
            pts.append(row)
    return pts


def _monomials(n_modes: int) -> list[tuple[int, ...]]:
    """Multi-indices over (xi_1..xi_N, xi_1*..xi_N*) up to degree 2."""
    nv = 2 * n_modes
    mono = [()]
    mono += [(i,) for i in range(nv)]
    mono += [(i, j) for i in range(nv) for j in range(i, nv)]
    return mono


def _design_row(point: np.ndarray, mono: list[tuple[int, ...]]) -> np.ndarray:
    v = np.concatenate([point, point.conj()])
    return np.array([np.prod([v[i] for i in idx]) if idx else 1.0 for idx in mono], dtype=complex)


@dataclass(frozen=True)
class MomentFit:
    """First moments and (full) second moments with fit diagnostics."""

    first: np.ndarray           # <a_j>
    number: np.ndarray          # <a_j^+ a_k>
    pair: np.ndarray            # <a_j a_k>
    coeff_cov: np.ndarray       # covariance estimate of the fitted coefficients
    residual: float
    n_used: int
    order: int


def fit_moments(
    samples: Sequence[ChiSample],
    order: int = 2,
    fit_window: float = 0.3,
) -> MomentFit:
    """Weighted least-squares moment extraction from samples near 0.

    Requires at least 3x as many in-window samples as fit coefficients.
    ``order=1`` returns only first moments (the quadratic block stays in
    the design: every physical chi carries the vacuum curvature).
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    n_modes = samples[0].N
    used = [s for s in samples if np.linalg.norm(s.point) <= fit_window]
    mono = _monomials(n_modes)
    if len(used) < 3 * len(mono):
        raise ValueError(
            f"need >= {3 * len(mono)} samples within |xi| <= {fit_window}, got {len(used)}"
        )
    pts = {tuple(np.round(np.concatenate([s.point.real, s.point.imag]), 12)) for s in used}
    if len(pts) < len(used):
        raise ValueError("sample points must be distinct")

    A = np.array([_design_row(s.point, mono) for s in used])
    vals = np.array([s.value for s in used])
    if np.any(vals == 0):
        raise ValueError("cannot fit log chi through a zero sample")
    y = np.log(vals)

    errs = np.array([s.err for s in used])
    if np.all(errs == 0):
        w = np.ones(len(used))
    else:
        w = (np.abs(vals) / np.maximum(errs, _ERR_FLOOR)) ** 2
    sw = np.sqrt(w)

    Aw = A * sw[:, None]
    yw = y * sw
    coef, _, rank, sing = np.linalg.lstsq(Aw, yw, rcond=None)
    if rank < len(mono):
        raise RankDeficient(
            f"design matrix rank {rank} < {len(mono)}; points not in general position"
        )
    resid = float(np.linalg.norm(Aw @ coef - yw) ** 2)

    # unscaled coefficient covariance (A^+ W A)^{-1}
    gram = Aw.conj().T @ Aw
    coeff_cov = np.linalg.inv(gram)

    pos = {idx: i for i, idx in enumerate(mono)}
    c_lin_plain = np.array([coef[pos[(j,)]] for j in range(n_modes)])
    c_lin_star = np.array([coef[pos[(n_modes + j,)]] for j in range(n_modes)])
    first = (-c_lin_star + c_lin_plain.conj()) / 2

    number = np.zeros((n_modes, n_modes), dtype=complex)
    pair = np.zeros((n_modes, n_modes), dtype=complex)
    if order == 2:
        for j in range(n_modes):
            for k in range(n_modes):
                cum = -coef[pos[(j, n_modes + k)]] - (0.5 if j == k else 0.0)
                number[j, k] = cum + np.conj(first[j]) * first[k]
        number = (number + number.conj().T) / 2
        for j in range(n_modes):
            for k in range(j, n_modes):
                c = coef[pos[(n_modes + j, n_modes + k)]]
                cum = 2 * c if j == k else c
                pair[j, k] = pair[k, j] = cum + first[j] * first[k]
    return MomentFit(
        first=first,
        number=number,
        pair=pair,
        coeff_cov=coeff_cov,
        residual=resid,
        n_used=len(used),
        order=order,
    )


@dataclass(frozen=True)
class TemperatureFit:
    """Thermal-hypothesis fit result."""

    T: float
    residual: float
    gof: float
    threshold: float
    not_thermal: bool
    n_samples: int


def _thermal_model(eta: np.ndarray, T: float, nu: np.ndarray) -> complex:
    occ = thermal_occupation(nu, T)
    return complex(np.exp(-np.sum((occ + 0.5) * np.abs(eta) ** 2)))


def estimate_temperature(
    samples: Sequence[ChiSample],
    nu,
    T_max: float = 1e4,
    T_min: float = 1e-6,
) -> TemperatureFit:
    """Fit a thermal characteristic function over the normal modes.

    Minimizes the weighted squared misfit over T by bounded scalar
    search.  The goodness-of-fit statistic is the weighted residual; the
    thermal hypothesis is rejected (``not_thermal``) when it exceeds
    the 99th percentile of its chi-square law under the sample errors
    (for exact samples: a relative-residual gate).
    """
    samples = list(samples)
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    n_modes = nu.size
    pts = np.array([s.point for s in samples])
    if pts.shape[1] != n_modes:
        raise ValueError("sample points and nu disagree on the mode count")
    if len({tuple(np.round(np.concatenate([p.real, p.imag]), 12)) for p in pts}) < n_modes:
        raise ValueError(f"need samples at >= {n_modes} distinct points")
    probed = (np.abs(pts) > 0).any(axis=0)
    if not probed.all():
        raise ValueError(f"modes {np.nonzero(~probed)[0].tolist()} never probed (|eta_k| = 0 everywhere)")

    vals = np.array([s.value for s in samples])
    errs = np.array([s.err for s in samples])
    exact = bool(np.all(errs == 0))
    w = np.ones(len(samples)) if exact else 1.0 / np.maximum(errs, _ERR_FLOOR) ** 2

    def loss(T: float) -> float:
        model = np.array([_thermal_model(p, T, nu) for p in pts])
        return float(np.sum(w * np.abs(vals - model) ** 2))

    # search in log T: temperature is a scale parameter, and in linear T
    # the informative region can be an exponentially thin sliver
    res = minimize_scalar(
        lambda u: loss(math.exp(u)),
        bounds=(math.log(T_min), math.log(T_max)),
        method="bounded",
        options={"xatol": 1e-9},
    )
    T_hat = float(math.exp(res.x))
    residual = float(res.fun)

    if exact:
        scale = float(np.sum(np.abs(vals) ** 2))
        threshold = _EXACT_RESIDUAL_RTOL * max(scale, 1e-300)
    else:
        threshold = float(chi2.ppf(0.99, max(2 * len(samples) - 1, 1)))
    return TemperatureFit(
        T=T_hat,
        residual=residual,
        gof=residual,
        threshold=threshold,
        not_thermal=residual > threshold,
        n_samples=len(samples),
    )


@dataclass(frozen=True)
class BochnerReport:
    """Positivity diagnostic of the displacement kernel."""

    min_eigenvalue: float
    passed: bool
    tol: float
    n_anchors: int
    anchor_indices: tuple
    chi0_deviation: float


def _key(p: np.ndarray) -> tuple:
    return tuple(np.round(np.concatenate([p.real, p.imag]), 9))


def bochner_check(samples: Sequence[ChiSample], tol: Optional[float] = None) -> BochnerReport:
    """Check compatibility of sampled chi values with a physical state.

    Builds the kernel B_jk = chi(xi_j - xi_k) exp((xi_j.xi_k* - xi_j*.xi_k)/2)
    over the largest greedy subset of points whose pairwise differences
    are all sampled, and requires (i) its minimum eigenvalue above -tol
    and (ii) the chi(0) sample within max(3 err, tol) of 1 — positivity
    alone cannot see a rescaled state.
    """
    samples = list(samples)
    if tol is None:
        tol = max((3 * s.err for s in samples), default=0.0)
    tol = max(tol, 1e-10)

    table = {_key(s.point): s for s in samples}
    zero = np.zeros(samples[0].N, dtype=complex) if samples else None
    anchors: list[int] = []
    for i, s in enumerate(samples):
        ok = True
        for j in anchors:
            q = samples[j].point
            if _key(s.point - q) not in table or _key(q - s.point) not in table:
                ok = False
                break
        if ok and _key(s.point - s.point) in table:
            anchors.append(i)
    if len(anchors) < 3 and len(samples) > 1:
        raise InsufficientClosure(
            f"only {len(anchors)} points usable; sample a difference-closed set"
        )
    if not anchors:
        raise InsufficientClosure("no usable points (is chi(0) sampled?)")

    n = len(anchors)
    B = np.empty((n, n), dtype=complex)
    for a, i in enumerate(anchors):
        for b, j in enumerate(anchors):
            pi, pj = samples[i].point, samples[j].point
            phase = np.exp((np.sum(pi * pj.conj()) - np.sum(pi.conj() * pj)) / 2)
            B[a, b] = table[_key(pi - pj)].value * phase
    B = (B + B.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(B).min())

    s0 = table.get(_key(zero))
    chi0_dev = abs(s0.value - 1) if s0 is not None else math.inf
    norm_tol = max(3 * (s0.err if s0 is not None else 0.0), tol)
    passed = (min_eig >= -tol) and (chi0_dev <= norm_tol)
    return BochnerReport(
        min_eigenvalue=min_eig,
        passed=passed,
        tol=tol,
        n_anchors=n,
        anchor_indices=tuple(anchors),
        chi0_deviation=float(chi0_dev),
    )
