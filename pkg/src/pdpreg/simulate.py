"""Synthetic-data generators for the desk-scale experiments.

One generator produces a covariate matrix with known cluster structure
(partition from a Poisson-Dirichlet process, latent values from a discrete
random distribution with uniform base, Gaussian noise); the other produces
censored survival outcomes driven by a sparse set of low-correlation
predictor columns.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .pdp import PdpParams, sample_partition

__all__ = [
    "ClusterSimSpec",
    "SurvivalSimSpec",
    "ClusterDataset",
    "SurvivalDataset",
    "gen_cluster_dataset",
    "gen_survival_dataset",
    "gen_correlated_covariates",
]


@dataclass
class ClusterSimSpec:
    n: int = 50
    p: int = 250
    alpha1: float = 20.0
    alpha2: float = 10.0
    d0: float = 0.33
    base_lo: float = 1.4
    base_hi: float = 2.6
    tau0: float = 0.60

    def validate(self):
        if self.base_lo >= self.base_hi:
            raise ValueError("base interval must have lo < hi")
        if self.tau0 <= 0:
            raise ValueError("tau0 must be positive")
        if self.n < 2 or self.p < 2:
            raise ValueError("need n >= 2 and p >= 2")


@dataclass
class ClusterDataset:
    X: np.ndarray                # (n, p)
    allocation: np.ndarray       # (p,) true labels 1..Q0
    latents: np.ndarray          # (n, Q0) true latent values
    Q0: int


@dataclass
class SurvivalSimSpec:
    n: int = 100
    p: int = 500
    predictor_count: int = 10
    max_pairwise_corr: float = 0.5
    beta_star: float = 1.0
    censor_fraction: float = 0.2
    train_fraction: float = 0.67
    block_size: int = 10         # equicorrelated block width of the source
    block_rho: float = 0.4

    def validate(self):
        if self.predictor_count > self.p:
            raise ValueError("predictor count cannot exceed p")
        if not (0.0 <= self.censor_fraction < 1.0):
            raise ValueError("censor fraction must lie in [0, 1)")
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train fraction must lie in (0, 1)")


@dataclass
class SurvivalDataset:
    X: np.ndarray                # (n, p) source covariates
    predictors: np.ndarray       # true predictor column indices (0-based)
    w: np.ndarray                # log observed times
    delta: np.ndarray            # 1 = failure observed, 0 = censored
    train_idx: np.ndarray
    test_idx: np.ndarray


def _draw_discrete_base(alpha2, lo, hi, rng, tol=1e-10):
    """A discrete random distribution with Uniform(lo, hi) base: stick
    weights extended until the leftover stick is below tol."""
    weights = []
    rem = 1.0
    while rem >= tol:
        v = rng.beta(1.0, alpha2)
        weights.append(v * rem)
        rem *= 1.0 - v
    weights = np.asarray(weights)
    weights /= weights.sum()
    atoms = rng.uniform(lo, hi, size=weights.size)
    return atoms, weights


def gen_cluster_dataset(spec, rng):
    """Covariates with known bidirectional cluster structure."""
    spec.validate()
    part = sample_partition(spec.p, PdpParams(spec.alpha1, spec.d0), rng)
    Q0 = part.n_clusters
    atoms, weights = _draw_discrete_base(spec.alpha2, spec.base_lo,
                                         spec.base_hi, rng)
    picks = rng.choice(atoms.size, size=(spec.n, Q0), p=weights)
    latents = atoms[picks]
    X = (latents[:, part.assignments - 1]
         + spec.tau0 * rng.standard_normal((spec.n, spec.p)))
    return ClusterDataset(X=X, allocation=part.assignments.copy(),
                          latents=latents, Q0=Q0)


def gen_correlated_covariates(n, p, block_size, rho, rng):
    """Blocks of equicorrelated standard-normal columns."""
    X = np.empty((n, p))
    done = 0
    while done < p:
        width = min(block_size, p - done)
        shared = rng.standard_normal((n, 1))
        noise = rng.standard_normal((n, width))
        X[:, done:done + width] = (math.sqrt(rho) * shared
                                   + math.sqrt(1.0 - rho) * noise)
        done += width
    return X


def _select_low_corr(X, count, cap):
    """First-fit greedy scan for columns whose pairwise |corr| stays under
    the cap."""
    corr = np.corrcoef(X, rowvar=False)
    chosen = []
    for j in range(X.shape[1]):
        if all(abs(corr[j, k]) < cap for k in chosen):
            chosen.append(j)
            if len(chosen) == count:
                return np.asarray(chosen)
    raise RuntimeError(
        f"could not find {count} columns with pairwise |corr| < {cap}: "
        f"got {len(chosen)}")


def gen_survival_dataset(spec, rng, X=None, max_rejects=100000):
    """Censored survival outcomes from exponential failure times.

    Failure time means are exp(beta_star * sum of the true predictor
    columns); the censored subset receives a censoring time drawn from the
    same distribution conditioned below the failure time (by rejection,
    capped; on cap the censoring slot is passed to another subject).
    """
    spec.validate()
    if X is None:
        X = gen_correlated_covariates(spec.n, spec.p, spec.block_size,
                                      spec.block_rho, rng)
    else:
        X = np.asarray(X, dtype=float)
        if X.shape != (spec.n, spec.p):
            raise ValueError("supplied covariates have the wrong shape")
    predictors = _select_low_corr(X, spec.predictor_count,
                                  spec.max_pairwise_corr)

    mean = np.exp(spec.beta_star * X[:, predictors].sum(axis=1))
    t = rng.exponential(mean)

    n_cens = int(round(spec.censor_fraction * spec.n))
    order = rng.permutation(spec.n)
    w = np.log(t)
    delta = np.ones(spec.n, dtype=np.int64)
    censored = 0
    for i in order:
        if censored == n_cens:
            break
        ok = False
        for _ in range(max_rejects):
            u = rng.exponential(mean[i])
            if u < t[i]:
                ok = True
                break
        if ok:
            w[i] = math.log(u)
            delta[i] = 0
            censored += 1
    if censored < n_cens:
        raise RuntimeError("could not realize the requested censoring fraction")

    n_train = int(round(spec.train_fraction * spec.n))
    perm = rng.permutation(spec.n)
    return SurvivalDataset(X=X, predictors=predictors, w=w, delta=delta,
                           train_idx=np.sort(perm[:n_train]),
                           test_idx=np.sort(perm[n_train:]))
