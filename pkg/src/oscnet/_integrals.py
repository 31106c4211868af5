"""Numerically stable exponential integrals.

Every closed-form expression in the package reduces to the primitives

    integral_exp(z, t)   = int_0^t exp(z s) ds
    integral_s_exp(z, t) = int_0^t s exp(z s) ds

with complex z.  Both have removable singularities at z = 0 that are
handled by series branches, so callers never need their own guards.
"""

from __future__ import annotations

import numpy as np

# Below this |w| the direct expressions lose too many digits to
# cancellation; the truncated series are then accurate to ~1e-16.
_EXPM1_CUT = 1e-3
_SEXP_CUT = 1e-2


def cexpm1(w):
    """exp(w) - 1 for complex w, accurate for small |w|."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < _EXPM1_CUT
    series = w * (1 + w / 2 * (1 + w / 3 * (1 + w / 4 * (1 + w / 5 * (1 + w / 6)))))
    direct = np.exp(np.where(small, 0.0, w)) - 1
    return np.where(small, series, direct)


def integral_exp(z, t: float):
    """int_0^t exp(z s) ds, elementwise in z."""
    z = np.asarray(z, dtype=complex)
    zero = z == 0
    zs = np.where(zero, 1.0, z)
    w = np.where(zero, 0.0, z * t)
    out = cexpm1(w) / zs
    return np.where(zero, complex(t), out)


def integral_s_exp(z, t: float):
    """int_0^t s exp(z s) ds, elementwise in z."""
    z = np.asarray(z, dtype=complex)
    w = z * t
    small = np.abs(w) < _SEXP_CUT
    zs = np.where(small, 1.0, z)
    direct = (cexpm1(np.where(small, 0.0, w)) * (w - 1) + w) / zs**2
    # sum_n w^n / (n! (n+2)), truncated at n = 6
    series = t * t * (
        0.5
        + w * (1 / 3 + w * (1 / 8 + w * (1 / 30 + w * (1 / 144 + w * (1 / 840 + w / 5760)))))
    )
    return np.where(small, series, direct)
