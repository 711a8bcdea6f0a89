"""Two-parameter Poisson-Dirichlet partition machinery.

Covers the predictive allocation rule, exchangeable partition probabilities,
the stick-breaking construction, closed-form moments of the log stick
weights, and cluster-count formulas.  The discount parameter at 0 recovers
the Dirichlet-process special case everywhere.
"""

from dataclasses import dataclass

import numpy as np
from math import lgamma
from scipy.special import gammaln

from .special import digamma, trigamma

__all__ = [
    "PdpParams",
    "Partition",
    "predictive_weights",
    "sample_partition",
    "log_eppf",
    "log_eppf_sizes",
    "stick_breaking",
    "log_pi_moments",
    "expected_cluster_count",
]


@dataclass(frozen=True)
class PdpParams:
    """Mass (concentration) and discount of a Poisson-Dirichlet process."""

    mass: float
    discount: float = 0.0

    def __post_init__(self):
        if not (self.mass > 0):
            raise ValueError("mass must be positive")
        if not (0.0 <= self.discount < 1.0):
            raise ValueError("discount must lie in [0, 1)")


class Partition:
    """Set partition of items 1..p with labels 1..q.

    Labels are canonical: cluster k first appears before cluster k+1.
    ``assignments`` is an int vector of length p, ``sizes`` of length q.
    """

    __slots__ = ("assignments", "sizes")

    def __init__(self, assignments):
        a = np.asarray(assignments, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignments must be a nonempty vector")
        self.assignments = canonical_labels(a)
        self.sizes = np.bincount(self.assignments)[1:]
        if np.any(self.sizes < 1):
            raise ValueError("every cluster must be nonempty")

    @property
    def n_items(self):
        return self.assignments.size

    @property
    def n_clusters(self):
        return self.sizes.size

    def members(self, k):
        """Indices (0-based) of the items in cluster k (1-based label)."""
        return np.flatnonzero(self.assignments == k)

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(
            self.assignments, other.assignments)

    def __repr__(self):
        return f"Partition(q={self.n_clusters}, p={self.n_items})"


def canonical_labels(assignments):
    """Relabel clusters contiguously, 1-based, in order of first appearance."""
    a = np.asarray(assignments, dtype=np.int64)
    _, first_pos, inverse = np.unique(a, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_pos))
    return order[inverse] + 1


def predictive_weights(sizes, params):
    """Allocation probabilities for the next item given current cluster sizes.

    Entry k (existing cluster) is proportional to size_k - discount; the
    final entry (opening a new cluster) to mass + q * discount.
    """
    sizes = np.asarray(sizes, dtype=float)
    if sizes.size and np.any(sizes < 1):
        raise ValueError("cluster sizes must all be >= 1")
    q = sizes.size
    w = np.empty(q + 1)
    w[:q] = sizes - params.discount
    w[q] = params.mass + q * params.discount
    return w / w.sum()


def sample_partition(p, params, rng):
    """Draw a partition of p items by sequential application of the rule."""
    if p < 1:
        raise ValueError("p must be >= 1")
    assignments = np.empty(p, dtype=np.int64)
    sizes = np.zeros(p, dtype=np.int64)
    q = 0
    alpha, d = params.mass, params.discount
    for j in range(p):
        total = alpha + j
        u = rng.random() * total
        new_w = alpha + q * d
        if u < new_w or q == 0:
            q += 1
            k = q
        else:
            u -= new_w
            cum = np.cumsum(sizes[:q] - d)
            k = int(np.searchsorted(cum, u, side="right")) + 1
            k = min(k, q)
        assignments[j] = k
        sizes[k - 1] += 1
    return Partition(assignments)


def log_eppf_sizes(sizes, mass, discount):
    """Log partition probability from cluster sizes alone.

    ``discount`` may be a scalar or a vector of values in [0, 1); a vector
    returns the log-EPPF at each value (used by the Bayes-factor bound).
    Computed as log prod_{k<q}(mass + k d) + sum_k log (1-d)_(n_k - 1)
    - log (mass+1)_(p-1) with rising factorials via log-gamma.
    """
    sizes = np.asarray(sizes, dtype=float)
    p = sizes.sum()
    q = sizes.size
    d = np.asarray(discount, dtype=float)
    scalar = d.ndim == 0
    d = np.atleast_1d(d)
    if np.any((d < 0) | (d >= 1)):
        raise ValueError("discount values must lie in [0, 1)")

    out = np.zeros(d.shape)
    if q > 1:
        k = np.arange(1, q)
        out += np.log(mass + np.outer(d, k)).sum(axis=1)
    out += (gammaln(sizes[None, :] - d[:, None]) - gammaln(1.0 - d)[:, None]).sum(axis=1)
    out -= lgamma(mass + p) - lgamma(mass + 1.0)
    return float(out[0]) if scalar else out


def log_eppf(partition, params):
    """Log probability of a partition; order-independent (exchangeable)."""
    return log_eppf_sizes(partition.sizes, params.mass, params.discount)


def stick_breaking(params, H, rng):
    """First H stick-breaking weights pi_h = V_h prod_{t<h}(1 - V_t).

    V_h are independent beta(1 - discount, mass + h * discount) draws.
    Returns the length-H weight vector; the weights sum to less than 1.
    """
    if H < 1:
        raise ValueError("H must be >= 1")
    h = np.arange(1, H + 1)
    v = rng.beta(1.0 - params.discount, params.mass + h * params.discount)
    pi = np.empty(H)
    pi[0] = v[0]
    if H > 1:
        pi[1:] = v[1:] * np.cumprod(1.0 - v[:-1])
    return pi


def log_pi_moments(params, h):
    """Exact mean and variance of log pi_h under stick breaking.

    For discount 0 the mean decays linearly in h and the variance grows
    linearly; for positive discount both involve digamma/trigamma terms at
    mass/discount offsets and the variance stays bounded in h.
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    a, d = params.mass, params.discount
    if d == 0.0:
        mean = digamma(1.0) - digamma(a) - h / a
        var = trigamma(1.0) - trigamma(a) + h / a ** 2
    else:
        r = a / d
        mean = digamma(1.0 - d) - digamma(a) + (digamma(r) - digamma(r + h)) / d
        var = trigamma(1.0 - d) - trigamma(a) + (trigamma(r) - trigamma(r + h)) / d ** 2
    return mean, var


def expected_cluster_count(params, p):
    """Expected number of clusters among p items.

    Exact for discount 0: sum_i mass / (mass + i - 1), equal to
    mass * (digamma(mass + p) - digamma(mass)).  For positive discount the
    count scales like p**discount times a random factor whose law is not
    available, so only the order-of-magnitude p**discount is returned.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if params.discount == 0.0:
        return params.mass * (digamma(params.mass + p) - digamma(params.mass))
    return float(p) ** params.discount
