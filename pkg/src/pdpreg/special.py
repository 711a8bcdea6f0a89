"""Digamma and trigamma functions.

Implemented with the classical asymptotic (Bernoulli-number) expansion after
shifting the argument above 6 with the recurrences psi(x) = psi(x+1) - 1/x and
psi1(x) = psi1(x+1) + 1/x^2.  Absolute error is below 1e-10 over [1e-3, 1e6],
which the tests pin against closed-form values and an independent library.
"""

import numpy as np

__all__ = ["digamma", "trigamma"]

# Coefficients of x^-2k in the digamma expansion: -B_{2k} / (2k).
_DIGAMMA_COEF = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
)

# Coefficients of x^-(2k+1) in the trigamma expansion: B_{2k}.
_TRIGAMMA_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)

_SHIFT_CUTOFF = 6.0


def _validated(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("digamma/trigamma require finite x > 0")
    return arr


def digamma(x):
    """First derivative of log-gamma, for x > 0 (scalar or array)."""
    arr = _validated(x)
    scalar = arr.ndim == 0
    z = np.atleast_1d(arr).astype(float).copy()
    acc = np.zeros_like(z)
    mask = z < _SHIFT_CUTOFF
    while mask.any():
        acc[mask] -= 1.0 / z[mask]
        z[mask] += 1.0
        mask = z < _SHIFT_CUTOFF
    inv2 = 1.0 / (z * z)
    tail = np.zeros_like(z)
    for c in reversed(_DIGAMMA_COEF):
        tail = (tail + c) * inv2
    out = acc + np.log(z) - 0.5 / z + tail
    return float(out[0]) if scalar else out


def trigamma(x):
    """Second derivative of log-gamma, for x > 0 (scalar or array)."""
    arr = _validated(x)
    scalar = arr.ndim == 0
    z = np.atleast_1d(arr).astype(float).copy()
    acc = np.zeros_like(z)
    mask = z < _SHIFT_CUTOFF
    while mask.any():
        acc[mask] += 1.0 / (z[mask] * z[mask])
        z[mask] += 1.0
        mask = z < _SHIFT_CUTOFF
    inv = 1.0 / z
    inv2 = inv * inv
    tail = np.zeros_like(z)
    for c in reversed(_TRIGAMMA_COEF):
        tail = (tail + c) * inv2
    out = acc + inv + 0.5 * inv2 + tail * inv
    return float(out[0]) if scalar else out
