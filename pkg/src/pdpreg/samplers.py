"""Nonstandard samplers shared by the MCMC modules.

All functions are deterministic given their arguments and the generator
state, and never mutate anything but the generator they are handed.
"""

import math

import numpy as np
from scipy.special import gammainc, gammaincinv, ndtr, ndtri

__all__ = [
    "sample_truncated_normal",
    "sample_categorical",
    "sample_truncated_gamma",
]

# Standardized bound beyond which the inverse-CDF loses precision and the
# one-sided exponential rejection sampler takes over.
_TAIL_CUTOFF = 4.0


def _tail_draw(a, b, rng):
    """Draw from N(0,1) restricted to (a, b) with a > _TAIL_CUTOFF."""
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    for _ in range(1000):
        x = a + rng.exponential(1.0 / lam)
        if x >= b:
            continue
        if rng.random() < math.exp(-0.5 * (x - lam) ** 2):
            return x
    # Narrow far-tail window: uniform proposal, density maximal at a.
    while True:
        x = rng.uniform(a, b)
        if rng.random() < math.exp(-0.5 * (x * x - a * a)):
            return x


def sample_truncated_normal(mean, sd, lower, upper, rng):
    """Sample N(mean, sd^2) conditioned on the open interval (lower, upper).

    Bounds may be -inf/+inf.  Scalars in, scalar out; arrays broadcast
    elementwise.  Mild truncation goes through the inverse CDF; bounds more
    than 4 standardized units into a tail use exponential rejection.
    """
    mean_a, sd_a, lo_a, up_a = np.broadcast_arrays(
        np.asarray(mean, float), np.asarray(sd, float),
        np.asarray(lower, float), np.asarray(upper, float))
    scalar = mean_a.ndim == 0
    mean_a, sd_a, lo_a, up_a = (np.atleast_1d(v) for v in (mean_a, sd_a, lo_a, up_a))
    if np.any(sd_a <= 0.0):
        raise ValueError("sd must be positive")
    if np.any(~(lo_a < up_a)):
        raise ValueError("invalid interval: lower must be below upper")

    a = (lo_a - mean_a) / sd_a
    b = (up_a - mean_a) / sd_a
    out = np.empty(mean_a.shape)

    upper_tail = a > _TAIL_CUTOFF
    lower_tail = b < -_TAIL_CUTOFF
    mild = ~(upper_tail | lower_tail)

    if mild.any():
        fa = ndtr(a[mild])
        fb = ndtr(b[mild])
        u = fa + (fb - fa) * rng.random(int(mild.sum()))
        out[mild] = ndtri(u)
    for idx in np.flatnonzero(upper_tail):
        out[idx] = _tail_draw(a[idx], b[idx], rng)
    for idx in np.flatnonzero(lower_tail):
        out[idx] = -_tail_draw(-b[idx], -a[idx], rng)

    out = mean_a + sd_a * out
    # Guarantee the open-interval contract even after float rounding.
    out = np.clip(out, np.nextafter(lo_a, np.inf), np.nextafter(up_a, -np.inf))
    return float(out[0]) if scalar else out


def sample_categorical(log_weights, rng):
    """Index k with probability proportional to exp(log_weights[k]).

    Uses max-subtraction so arbitrarily shifted weights are safe.  Entries
    of -inf are allowed; all -inf is a degenerate distribution and raises.
    """
    lw = np.asarray(log_weights, float)
    if lw.ndim != 1 or lw.size == 0:
        raise ValueError("log_weights must be a nonempty vector")
    m = lw.max()
    if not np.isfinite(m):
        raise ValueError("degenerate distribution: no finite log-weight")
    w = np.exp(lw - m)
    cum = np.cumsum(w)
    u = rng.random() * cum[-1]
    return int(np.searchsorted(cum, u, side="right").clip(0, lw.size - 1))


def sample_truncated_gamma(shape, rate, lower, upper, rng):
    """Sample Gamma(shape, rate) conditioned on (lower, upper) by inverse CDF.

    ``lower`` may be 0 and ``upper`` may be +inf.  When the interval carries
    essentially no prior mass (CDF gap below 1e-14) the draw collapses to the
    bound closer to the mode, which keeps far-tail conditionals finite.
    """
    if not (lower < upper):
        raise ValueError("invalid interval: lower must be below upper")
    if shape <= 0 or rate <= 0:
        raise ValueError("shape and rate must be positive")
    flo = gammainc(shape, rate * lower) if lower > 0 else 0.0
    fhi = gammainc(shape, rate * upper) if np.isfinite(upper) else 1.0
    if fhi - flo < 1e-14:
        mode = max((shape - 1.0) / rate, 0.0)
        x = lower if mode <= lower else min(upper, mode)
        lo_clip = np.nextafter(lower, np.inf)
        hi_clip = np.nextafter(upper, -np.inf) if np.isfinite(upper) else upper
        return float(min(max(x, lo_clip), hi_clip))
    u = flo + (fhi - flo) * rng.random()
    x = gammaincinv(shape, u) / rate
    hi_clip = np.nextafter(upper, -np.inf) if np.isfinite(upper) else upper
    return float(min(max(x, np.nextafter(lower, np.inf)), hi_clip))
