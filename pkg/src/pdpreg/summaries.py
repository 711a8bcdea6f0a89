"""Posterior summaries of sampled partitions.

Pairwise co-clustering frequencies, the least-squares point estimate chosen
among the sampled partitions, the pair-agreement accuracy measure against a
reference partition, and the two discount-parameter summaries (posterior
probability of the Dirichlet special case and the Jensen lower bound on the
log-Bayes factor in its favor being rejected).
"""

import math

import numpy as np

from .pdp import Partition

__all__ = [
    "accumulate_cocluster",
    "merge_cocluster",
    "least_squares_allocation",
    "kappa",
    "dirichlet_posterior_prob",
    "logbf_lower_bound",
]


def _as_label_array(sample):
    if isinstance(sample, Partition):
        return sample.assignments
    return np.asarray(sample, dtype=np.int64)


def accumulate_cocluster(samples):
    """p x p matrix of the fraction of samples in which each pair co-clusters.

    Symmetric with a unit diagonal.  ``samples`` is a sequence of Partition
    objects or label vectors over the same p items.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one partition sample")
    first = _as_label_array(samples[0])
    p = first.size
    acc = np.zeros((p, p))
    for s in samples:
        lab = _as_label_array(s)
        if lab.size != p:
            raise ValueError("all samples must cover the same items")
        acc += lab[:, None] == lab[None, :]
    return acc / len(samples)


def merge_cocluster(matrices, counts):
    """Combine accumulators built on disjoint sample sets."""
    total = sum(counts)
    out = np.zeros_like(matrices[0])
    for mat, c in zip(matrices, counts):
        out += mat * (c / total)
    return out


def least_squares_allocation(samples, probs):
    """The sampled partition minimizing squared deviation from ``probs``.

    The loss is the sum over unordered pairs of (co-cluster indicator minus
    pairwise probability) squared; ties break toward the earliest sample.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one partition sample")
    best_loss = np.inf
    best = None
    for s in samples:
        lab = _as_label_array(s)
        eq = lab[:, None] == lab[None, :]
        dev = (eq - probs) ** 2
        loss = 0.5 * (dev.sum() - np.trace(dev))
        if loss < best_loss - 1e-12:
            best_loss = loss
            best = lab
    return Partition(best)


def ls_loss(labels, probs):
    """Least-squares loss of one partition against a co-clustering matrix."""
    lab = _as_label_array(labels)
    eq = lab[:, None] == lab[None, :]
    dev = (eq - probs) ** 2
    return 0.5 * float(dev.sum() - np.trace(dev))


def kappa(c, c0, subset=None):
    """Fraction of item pairs whose co-clustering status agrees across the
    two partitions, over the given index subset (default: all items)."""
    a = _as_label_array(c)
    b = _as_label_array(c0)
    if a.size != b.size:
        raise ValueError("partitions must cover the same items")
    if subset is None:
        idx = np.arange(a.size)
    else:
        idx = np.asarray(subset, dtype=np.int64)
    if idx.size < 2:
        raise ValueError("need at least two items to compare pairs")
    sa = a[idx]
    sb = b[idx]
    ea = sa[:, None] == sa[None, :]
    eb = sb[:, None] == sb[None, :]
    agree = ea == eb
    L = idx.size
    return float((agree.sum() - L) / (L * (L - 1)))


def dirichlet_posterior_prob(d_trace):
    """Fraction of retained samples with the discount exactly zero."""
    d = np.asarray(d_trace, dtype=float)
    if d.size == 0:
        raise ValueError("empty discount trace")
    return float(np.mean(d == 0.0))


def logbf_lower_bound(per_sample_log_odds):
    """Monte Carlo mean of the conditional log-odds with a CLT 95% interval.

    Each element is the log-odds of a positive discount given the sampled
    partition; by Jensen's inequality the posterior mean of these log-odds
    is a lower bound on the log-Bayes factor of the general model against
    the Dirichlet special case.
    """
    lo = np.asarray(per_sample_log_odds, dtype=float)
    if lo.size == 0:
        raise ValueError("empty log-odds sequence")
    mean = float(lo.mean())
    se = float(lo.std(ddof=1) / math.sqrt(lo.size)) if lo.size > 1 else 0.0
    return mean, (mean - 1.96 * se, mean + 1.96 * se)
