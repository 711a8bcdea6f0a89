"""Chain diagnostics used by the sampler-correctness tests."""

import math

import numpy as np

__all__ = ["effective_sample_size", "geweke_z"]


def effective_sample_size(x, max_lag=None):
    """ESS from the initial-positive-sequence autocorrelation estimator."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 10:
        return float(n)
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var <= 0:
        return float(n)
    if max_lag is None:
        max_lag = min(n - 2, 2000)
    # FFT autocovariance.
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:max_lag + 1].real / n
    rho = acov / acov[0]
    # Sum paired autocorrelations while the pair sums stay positive.
    s = 0.0
    for t in range(1, max_lag, 2):
        pair = rho[t] + (rho[t + 1] if t + 1 <= max_lag else 0.0)
        if pair < 0:
            break
        s += pair
    ess = n / (1.0 + 2.0 * s)
    return float(min(max(ess, 1.0), n))


def geweke_z(forward, chain):
    """z-score comparing the mean of iid forward draws with a Markov chain.

    The forward side uses the iid standard error; the chain side inflates
    its standard error by the effective sample size.
    """
    forward = np.asarray(forward, dtype=float)
    chain = np.asarray(chain, dtype=float)
    se_f2 = forward.var(ddof=1) / forward.size
    ess = effective_sample_size(chain)
    se_c2 = chain.var(ddof=1) / ess
    denom = math.sqrt(se_f2 + se_c2)
    if denom == 0.0:
        return 0.0
    return float((forward.mean() - chain.mean()) / denom)
