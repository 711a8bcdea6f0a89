"""Covariate clustering model and its Gibbs sampler.

Columns of the covariate matrix are partitioned by a Poisson-Dirichlet
process; each cluster carries an n-vector of latent elements drawn from a
shared discrete distribution (itself a Dirichlet-process draw, so elements
are atoms shared across subjects and clusters); per-(subject, cluster)
indicators switch member covariates between a tight variance around the
latent value and a broad outlier variance.

The sampler is a deterministic-scan Gibbs sweep: allocations (auxiliary-
component update for new clusters), latent cells (collapsed urn), atom
values, indicators and their Bernoulli rate, the two variances (truncated
conjugate draws), and a Metropolis move for the discount parameter under
its point-mass/uniform mixture prior.
"""

import math
from dataclasses import dataclass, field, asdict, replace

import numpy as np
from scipy.special import gammaln

from .kernels import draw_aux_vectors, reassign_cells
from .pdp import Partition, PdpParams, canonical_labels, log_eppf_sizes, sample_partition
from .samplers import sample_truncated_gamma

__all__ = [
    "CovariateMatrix",
    "Stage1Config",
    "Stage1State",
    "Stage1Fit",
    "init_state",
    "update_allocations",
    "update_latent_elements",
    "update_indicators",
    "update_variances",
    "update_discount",
    "update_concentrations",
    "impute_missing",
    "sweep",
    "run_stage1",
    "forward_draw_state",
    "draw_data",
    "data_loglik",
]

_TWO_PI = 2.0 * math.pi


@dataclass
class CovariateMatrix:
    """n x p covariate values with a missingness mask.

    ``values`` must be finite wherever ``missing`` is False; masked entries
    are ignored on input and imputed during sampling.
    """

    values: np.ndarray
    missing: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("covariates must be a 2-D matrix")
        n, p = self.values.shape
        if n < 2 or p < 2:
            raise ValueError("need at least 2 subjects and 2 covariates")
        if self.missing is None:
            self.missing = ~np.isfinite(self.values)
        else:
            self.missing = np.asarray(self.missing, dtype=bool)
            if self.missing.shape != self.values.shape:
                raise ValueError("missing mask shape mismatch")
        if not np.all(np.isfinite(self.values[~self.missing])):
            raise ValueError("non-missing covariate entries must be finite")

    @property
    def shape(self):
        return self.values.shape


@dataclass
class Stage1Config:
    """Sampler settings and prior constants for the clustering stage."""

    alpha1: float = 20.0
    discount_init: float = None      # None: draw from the mixture prior
    alpha2: float = 10.0
    sample_alpha1: bool = False
    sample_alpha2: bool = False
    iota1: float = 9.0
    iota0: float = 1.0
    tau_star: float = 0.01
    ig_shape: float = 2.01
    ig_scale_factor: float = 1.01    # scale = factor * moment estimate
    aux_m: int = 3
    burn_in: int = 2000
    thin: int = 5
    n_samples: int = 2000
    burn_in_1b: int = 2000
    thin_1b: int = 5
    n_samples_1b: int = 2000
    logbf_nodes: int = 128
    standardize: bool = True

    def validate(self):
        if self.n_samples < 1 or self.n_samples_1b < 1:
            raise ValueError("need at least one retained sample per stage")
        if self.burn_in < 0 or self.thin < 1 or self.thin_1b < 1:
            raise ValueError("invalid iteration settings")
        if self.aux_m < 1:
            raise ValueError("aux_m must be >= 1")
        if not (self.alpha1 > 0 and self.alpha2 > 0 and self.tau_star > 0):
            raise ValueError("alpha1, alpha2 and tau_star must be positive")


@dataclass
class Stage1State:
    """Full parameter state of the clustering sampler."""

    assignments: np.ndarray     # (p,) labels 1..q
    cell_atom: np.ndarray       # (n, q) atom index per latent cell
    atom_vals: np.ndarray       # (T,)
    z: np.ndarray               # (n, q) 0/1
    tau2: float                 # tight variance, sqrt bounded below by tau_star
    tau1_2: float               # broad variance, always above tau2
    xi: float
    d: float
    alpha1: float
    alpha2: float
    mu2: float
    tau22: float                # variance of the atom base distribution
    # Prior constants (fixed through a run).
    iota1: float
    iota0: float
    tau_star: float
    a_tau: float
    b_tau: float
    a_tau1: float
    b_tau1: float

    @property
    def n_clusters(self):
        return self.cell_atom.shape[1]

    @property
    def sizes(self):
        return np.bincount(self.assignments, minlength=self.n_clusters + 1)[1:]

    @property
    def latent_matrix(self):
        return self.atom_vals[self.cell_atom]

    def cell_var(self):
        return np.where(self.z == 1, self.tau2, self.tau1_2)

    def copy(self):
        return replace(
            self,
            assignments=self.assignments.copy(),
            cell_atom=self.cell_atom.copy(),
            atom_vals=self.atom_vals.copy(),
            z=self.z.copy(),
        )

    def check_invariants(self):
        q = self.n_clusters
        sizes = self.sizes
        assert sizes.sum() == self.assignments.size and np.all(sizes >= 1)
        assert self.z.shape == self.cell_atom.shape
        counts = np.bincount(self.cell_atom.ravel(),
                             minlength=self.atom_vals.size)
        assert counts.size == self.atom_vals.size and np.all(counts > 0)
        assert math.sqrt(self.tau2) >= self.tau_star
        assert self.tau1_2 > self.tau2
        assert 0.0 < self.xi < 1.0
        assert 0.0 <= self.d < 1.0
        assert q == self.z.shape[1]


def _member_stats(X, assignments, q):
    """Per-cell sufficient statistics: sums, squared sums, member counts."""
    n, p = X.shape
    s1 = np.empty((n, q))
    s2 = np.empty((n, q))
    mcount = np.empty(q)
    X2 = X * X
    for k in range(1, q + 1):
        cols = np.flatnonzero(assignments == k)
        mcount[k - 1] = cols.size
        s1[:, k - 1] = X[:, cols].sum(axis=1)
        s2[:, k - 1] = X2[:, cols].sum(axis=1)
    return s1, s2, mcount


def _rss_per_cell(s1, s2, mcount, V):
    return s2 - 2.0 * V * s1 + mcount[None, :] * V * V


def data_loglik(state, X):
    """Log-likelihood of the covariates given the current parameters."""
    q = state.n_clusters
    s1, s2, mcount = _member_stats(X, state.assignments, q)
    V = state.latent_matrix
    rss = _rss_per_cell(s1, s2, mcount, V)
    var = state.cell_var()
    return float(-0.5 * (rss / var + mcount[None, :] * np.log(_TWO_PI * var)).sum())


# ---------------------------------------------------------------------------
# Initialization


def _leader_clusters(X, rng):
    """Greedy leader allocation with a data-driven distance threshold."""
    n, p = X.shape
    # Nearest-neighbour squared distances identify the within-cluster scale.
    norms = (X * X).sum(axis=0)
    gram = X.T @ X
    d2 = norms[:, None] + norms[None, :] - 2.0 * gram
    np.fill_diagonal(d2, np.inf)
    nn = d2.min(axis=1) / n
    threshold = max(3.0 * float(np.median(nn)), 1e-12)

    leaders = []        # running mean vector per cluster
    members = []
    assignments = np.zeros(p, dtype=np.int64)
    for j in range(p):
        x = X[:, j]
        best, best_k = np.inf, -1
        for k, mu in enumerate(leaders):
            dist = float(((x - mu) ** 2).mean())
            if dist < best:
                best, best_k = dist, k
        if best_k >= 0 and best < threshold:
            assignments[j] = best_k + 1
            members[best_k].append(j)
            cols = members[best_k]
            leaders[best_k] = X[:, cols].mean(axis=1)
        else:
            leaders.append(x.copy())
            members.append([j])
            assignments[j] = len(leaders)
    # One k-means-style reassignment pass to clean up early mistakes.
    centers = np.stack(leaders, axis=1)
    d2c = ((X[:, :, None] - centers[:, None, :]) ** 2).mean(axis=0)
    assignments = np.argmin(d2c, axis=1) + 1
    return canonical_labels(assignments)


def init_state(Xmat, config, rng):
    """Initial state from a quick deterministic-scan leader clustering.

    Latent cells start at within-cluster subject means (one atom per cell),
    all indicators at 1, and the variances at within/between residual
    moments, which also set the inverse-gamma prior scales.
    """
    config.validate()
    X = Xmat.values.copy()
    if Xmat.missing.any():
        col_mean = np.nanmean(np.where(Xmat.missing, np.nan, X), axis=0)
        col_mean = np.where(np.isfinite(col_mean), col_mean, 0.0)
        X[Xmat.missing] = np.broadcast_to(col_mean, X.shape)[Xmat.missing]
    n, p = X.shape
    total_var = float(X.var())
    if total_var <= 1e-12:
        raise ValueError("degenerate input: covariates have zero variance")

    assignments = _leader_clusters(X, rng)
    q = int(assignments.max())

    # Latent cells at within-cluster subject means, one atom per cell.
    V = np.empty((n, q))
    for k in range(1, q + 1):
        V[:, k - 1] = X[:, assignments == k].mean(axis=1)
    atom_vals = V.ravel().copy()
    cell_atom = np.arange(n * q, dtype=np.int64).reshape(n, q)

    resid2 = (X - V[:, assignments - 1]) ** 2
    m_within = max(float(resid2.mean()), (1.1 * config.tau_star) ** 2)
    m_between = max(float(((X - X.mean()) ** 2).mean()), 4.0 * m_within)

    a = config.ig_shape
    b_tau = config.ig_scale_factor * m_within * (a - 1.0)
    b_tau1 = config.ig_scale_factor * m_between * (a - 1.0)

    if config.discount_init is not None:
        d0 = float(config.discount_init)
    else:
        d0 = 0.0 if rng.random() < 0.5 else float(rng.random())

    state = Stage1State(
        assignments=assignments,
        cell_atom=cell_atom,
        atom_vals=atom_vals,
        z=np.ones((n, q), dtype=np.int8),
        tau2=m_within,
        tau1_2=m_between,
        xi=config.iota1 / (config.iota1 + config.iota0),
        d=d0,
        alpha1=config.alpha1,
        alpha2=config.alpha2,
        mu2=float(X.mean()),
        tau22=total_var,
        iota1=config.iota1,
        iota0=config.iota0,
        tau_star=config.tau_star,
        a_tau=a,
        b_tau=b_tau,
        a_tau1=a,
        b_tau1=b_tau1,
    )
    state.check_invariants()
    return state, X


# ---------------------------------------------------------------------------
# Gibbs updates


def _atom_counts(state):
    return np.bincount(state.cell_atom.ravel(), minlength=state.atom_vals.size)


def _prune_atoms(state, counts):
    keep = counts > 0
    if keep.all():
        return
    remap = np.cumsum(keep) - 1
    state.atom_vals = state.atom_vals[keep]
    state.cell_atom = remap[state.cell_atom]


def update_allocations(state, X, rng, aux_m=3):
    """Resample every column's cluster via the auxiliary-component rule.

    Existing clusters are weighted by (size - discount) times the column
    likelihood at their latent vector; opening a new cluster is weighted by
    (mass + q * discount) split over aux_m fresh latent/indicator vectors
    drawn from the shared-atom urn conditioned on the other clusters (a
    removed singleton's own vector is recycled as the first candidate).
    """
    n, p = X.shape
    alpha1, d, alpha2 = state.alpha1, state.d, state.alpha2
    base_sd = math.sqrt(state.tau22)
    log_tau = math.log(_TWO_PI * state.tau2)
    log_tau1 = math.log(_TWO_PI * state.tau1_2)

    assignments = state.assignments
    sizes = state.sizes.astype(np.int64)
    V = state.latent_matrix
    Z = state.z.astype(np.int8)
    cell_atom = state.cell_atom

    # Atom table with room for per-sweep growth; zero-count atoms persist
    # until the end of the sweep so saved singleton indices stay valid.
    capacity = state.atom_vals.size + n * (p + aux_m)
    counts = np.zeros(capacity, dtype=np.int64)
    counts[:state.atom_vals.size] = _atom_counts(state)
    values = np.zeros(capacity)
    values[:state.atom_vals.size] = state.atom_vals
    n_atoms = state.atom_vals.size
    total = int(counts.sum())

    inv_var = np.where(Z == 1, 1.0 / state.tau2, 1.0 / state.tau1_2)
    log_var_col = np.where(Z == 1, log_tau, log_tau1).sum(axis=0)
    q = sizes.size

    log_xi = math.log(state.xi)
    log_1mxi = math.log1p(-state.xi)

    for j in range(p):
        k_old = assignments[j] - 1
        was_singleton = sizes[k_old] == 1
        if was_singleton:
            saved_cells = cell_atom[:, k_old].copy()
            saved_z = Z[:, k_old].copy()
            saved_v = V[:, k_old].copy()
            np.subtract.at(counts, saved_cells, 1)
            total -= n
            cell_atom = np.delete(cell_atom, k_old, axis=1)
            Z = np.delete(Z, k_old, axis=1)
            V = np.delete(V, k_old, axis=1)
            inv_var = np.delete(inv_var, k_old, axis=1)
            log_var_col = np.delete(log_var_col, k_old)
            sizes = np.delete(sizes, k_old)
            assignments = np.where(assignments > k_old + 1,
                                   assignments - 1, assignments)
            q -= 1
        else:
            sizes[k_old] -= 1

        x = X[:, j]
        resid = x[:, None] - V
        log_like = -0.5 * ((resid * resid * inv_var).sum(axis=0) + log_var_col)
        log_w_exist = np.log(sizes - d) + log_like

        # Auxiliary candidates for a new cluster.
        n_fresh = aux_m - 1 if was_singleton else aux_m
        aux_v = np.empty((aux_m, n))
        aux_z = np.empty((aux_m, n), dtype=np.int8)
        aux_idx = np.full((aux_m, n), -1, dtype=np.int64)
        pos = 0
        if was_singleton:
            aux_v[0] = saved_v
            aux_z[0] = saved_z
            aux_idx[0] = saved_cells
            pos = 1
        if n_fresh > 0:
            unif = rng.random(n_fresh * n)
            norm = rng.standard_normal(n_fresh * n)
            idx, val = draw_aux_vectors(counts, values, n_atoms, float(total),
                                        alpha2, state.mu2, base_sd,
                                        n_fresh, n, unif, norm)
            aux_idx[pos:] = idx
            aux_v[pos:] = val
            aux_z[pos:] = (rng.random((n_fresh, n)) < state.xi)

        aresid = x[None, :] - aux_v
        a_ll = np.where(
            aux_z == 1,
            -0.5 * (aresid * aresid / state.tau2 + log_tau),
            -0.5 * (aresid * aresid / state.tau1_2 + log_tau1),
        ).sum(axis=1)
        log_w_new = math.log((alpha1 + q * d) / aux_m) + a_ll

        logw = np.concatenate([log_w_exist, log_w_new])
        logw -= logw.max()
        w = np.exp(logw)
        u = rng.random() * w.sum()
        choice = int(np.searchsorted(np.cumsum(w), u, side="right"))
        choice = min(choice, logw.size - 1)

        if choice < q:
            assignments[j] = choice + 1
            sizes[choice] += 1
        else:
            m = choice - q
            new_z = aux_z[m]
            new_v = aux_v[m].copy()
            new_cells = np.empty(n, dtype=np.int64)
            local_map = {}
            for i in range(n):
                t = aux_idx[m, i]
                if 0 <= t < n_atoms:
                    new_cells[i] = t
                else:
                    key = int(t)
                    if key not in local_map:
                        values[n_atoms] = aux_v[m, i]
                        counts[n_atoms] = 0
                        local_map[key] = n_atoms
                        n_atoms += 1
                    new_cells[i] = local_map[key]
            np.add.at(counts, new_cells, 1)
            total += n
            cell_atom = np.column_stack([cell_atom, new_cells])
            Z = np.column_stack([Z, new_z])
            V = np.column_stack([V, new_v])
            new_inv = np.where(new_z == 1, 1.0 / state.tau2, 1.0 / state.tau1_2)
            inv_var = np.column_stack([inv_var, new_inv])
            new_logv = float(np.where(new_z == 1, log_tau, log_tau1).sum())
            log_var_col = np.append(log_var_col, new_logv)
            sizes = np.append(sizes, 1)
            q += 1
            assignments[j] = q

    state.assignments = assignments
    state.cell_atom = cell_atom
    state.z = Z
    state.atom_vals = values[:n_atoms].copy()
    _prune_atoms(state, np.bincount(state.cell_atom.ravel(),
                                    minlength=n_atoms))
    return state


def update_latent_elements(state, X, rng):
    """Collapsed-urn reassignment of every latent cell, then atom redraws.

    Cell reassignment marginalizes the atom value under the normal base;
    afterwards every atom value is redrawn from its normal full conditional
    given all member cells.
    """
    n, p = X.shape
    q = state.n_clusters
    s1, s2, mcount = _member_stats(X, state.assignments, q)
    sig2 = state.cell_var().astype(float)

    n_cells = n * q
    n_atoms = state.atom_vals.size
    counts = np.zeros(n_atoms + n_cells, dtype=np.int64)
    counts[:n_atoms] = _atom_counts(state)
    values = np.zeros(n_atoms + n_cells)
    values[:n_atoms] = state.atom_vals

    cell_flat = state.cell_atom.ravel().copy()
    mcount_cell = np.broadcast_to(mcount, (n, q)).ravel()
    unif = rng.random(n_cells)
    norm = rng.standard_normal(n_cells)
    new_n = reassign_cells(cell_flat, counts, values, n_atoms,
                           s1.ravel(), s2.ravel(), mcount_cell, sig2.ravel(),
                           state.alpha2, state.mu2, state.tau22, unif, norm)
    state.cell_atom = cell_flat.reshape(n, q)
    state.atom_vals = values[:new_n].copy()
    _prune_atoms(state, np.bincount(cell_flat, minlength=new_n))

    # Conjugate redraw of atom values given their member cells.
    t_idx = state.cell_atom.ravel()
    n_atoms = state.atom_vals.size
    prec_add = (mcount_cell / sig2.ravel())
    mean_add = (s1.ravel() / sig2.ravel())
    prec = 1.0 / state.tau22 + np.bincount(t_idx, weights=prec_add,
                                           minlength=n_atoms)
    num = state.mu2 / state.tau22 + np.bincount(t_idx, weights=mean_add,
                                                minlength=n_atoms)
    state.atom_vals = num / prec + rng.standard_normal(n_atoms) / np.sqrt(prec)
    return state


def update_indicators(state, X, rng):
    """Flip each cell's variance indicator, then redraw the Bernoulli rate."""
    n, p = X.shape
    q = state.n_clusters
    s1, s2, mcount = _member_stats(X, state.assignments, q)
    V = state.latent_matrix
    rss = _rss_per_cell(s1, s2, mcount, V)
    m = mcount[None, :]
    lw1 = math.log(state.xi) - 0.5 * (m * math.log(_TWO_PI * state.tau2)
                                      + rss / state.tau2)
    lw0 = math.log1p(-state.xi) - 0.5 * (m * math.log(_TWO_PI * state.tau1_2)
                                         + rss / state.tau1_2)
    p1 = 1.0 / (1.0 + np.exp(np.clip(lw0 - lw1, -700, 700)))
    state.z = (rng.random((n, q)) < p1).astype(np.int8)
    ones = int(state.z.sum())
    state.xi = float(rng.beta(state.iota1 + ones,
                              state.iota0 + state.z.size - ones))
    return state


def update_variances(state, X, rng):
    """Truncated conjugate draws of the two variances (as precisions)."""
    n, p = X.shape
    q = state.n_clusters
    s1, s2, mcount = _member_stats(X, state.assignments, q)
    V = state.latent_matrix
    rss = _rss_per_cell(s1, s2, mcount, V)
    m = np.broadcast_to(mcount, (n, q))

    tight = state.z == 1
    ss_t = float(rss[tight].sum())
    n_t = float(m[tight].sum())
    # Joint prior truncation tau_star <= tau < tau1 gives clean conditionals.
    lam = sample_truncated_gamma(
        state.a_tau + 0.5 * n_t, state.b_tau + 0.5 * ss_t,
        1.0 / state.tau1_2, 1.0 / state.tau_star ** 2, rng)
    state.tau2 = 1.0 / lam

    loose = ~tight
    ss_l = float(rss[loose].sum())
    n_l = float(m[loose].sum())
    lam1 = sample_truncated_gamma(
        state.a_tau1 + 0.5 * n_l, state.b_tau1 + 0.5 * ss_l,
        0.0, 1.0 / state.tau2, rng)
    state.tau1_2 = 1.0 / lam1
    return state


def _gauss_legendre_01(n_nodes):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def update_discount(state, rng, n_nodes=128):
    """Metropolis move for the discount under the half point-mass prior.

    Proposes from the prior itself (0 with probability one half, else
    uniform), so the acceptance ratio reduces to the partition-probability
    ratio.  Returns the conditional log-odds of a positive discount given
    the partition, which feeds the Bayes-factor lower bound.
    """
    sizes = state.sizes
    nodes, weights = _gauss_legendre_01(n_nodes)
    log_at_nodes = log_eppf_sizes(sizes, state.alpha1, nodes)
    log_at_zero = log_eppf_sizes(sizes, state.alpha1, 0.0)
    m = log_at_nodes.max()
    log_integral = m + math.log(float(np.sum(np.exp(log_at_nodes - m) * weights)))
    log_odds = log_integral - log_at_zero

    d_prop = 0.0 if rng.random() < 0.5 else float(rng.random())
    cur = log_eppf_sizes(sizes, state.alpha1, state.d)
    prop = log_eppf_sizes(sizes, state.alpha1, d_prop)
    if math.log(rng.random()) < prop - cur:
        state.d = d_prop
    return state, float(log_odds)


def update_concentrations(state, rng, scale=0.5):
    """Optional random-walk Metropolis for the two mass parameters.

    Both carry Gamma(1, 1) priors; proposals are log-normal steps.  The
    first mass enters through the partition probability, the second through
    the shared-atom table probability.
    """
    sizes = state.sizes
    cur = state.alpha1
    prop = cur * math.exp(scale * rng.standard_normal())
    log_r = (log_eppf_sizes(sizes, prop, state.d)
             - log_eppf_sizes(sizes, cur, state.d)
             + (prop - cur) * (-1.0)      # Gamma(1,1) log-density difference
             + math.log(prop) - math.log(cur))   # Jacobian of the log walk
    if math.log(rng.random()) < log_r:
        state.alpha1 = prop

    counts = _atom_counts(state)
    n_cells = int(counts.sum())
    T = counts.size

    def table_loglik(a):
        return (T * math.log(a) + gammaln(a) - gammaln(a + n_cells)
                + float(gammaln(counts).sum()))

    cur = state.alpha2
    prop = cur * math.exp(scale * rng.standard_normal())
    log_r = (table_loglik(prop) - table_loglik(cur)
             + (prop - cur) * (-1.0)
             + math.log(prop) - math.log(cur))
    if math.log(rng.random()) < log_r:
        state.alpha2 = prop
    return state


def impute_missing(state, Xmat, X_work, rng):
    """Redraw missing entries from their conditional normals in place."""
    miss = Xmat.missing
    if not miss.any():
        return X_work
    rows, cols = np.nonzero(miss)
    k = state.assignments[cols] - 1
    mean = state.atom_vals[state.cell_atom[rows, k]]
    sd = np.sqrt(np.where(state.z[rows, k] == 1, state.tau2, state.tau1_2))
    X_work[rows, cols] = mean + sd * rng.standard_normal(rows.size)
    return X_work


def sweep(state, X, rng, config, update_alloc=True, Xmat=None, X_work=None):
    """One deterministic-scan pass over all parameter blocks."""
    if Xmat is not None and Xmat.missing.any():
        impute_missing(state, Xmat, X_work, rng)
    if update_alloc:
        update_allocations(state, X, rng, aux_m=config.aux_m)
    update_latent_elements(state, X, rng)
    update_indicators(state, X, rng)
    update_variances(state, X, rng)
    if update_alloc:
        state, log_odds = update_discount(state, rng, config.logbf_nodes)
    else:
        log_odds = float("nan")
    if config.sample_alpha1 or config.sample_alpha2:
        update_concentrations(state, rng)
    return state, log_odds


@dataclass
class Stage1Fit:
    """Everything the later stages and the CLI need from the clustering run."""

    allocation: Partition
    v_hat: np.ndarray
    z_hat: np.ndarray
    cocluster: np.ndarray
    partitions: list
    d_trace: np.ndarray
    logodds_trace: np.ndarray
    trace: dict
    state: Stage1State
    config: Stage1Config


def run_stage1(Xmat, config, rng):
    """Two-pass clustering inference.

    The first pass samples everything and summarizes the retained partitions
    into a pairwise co-clustering matrix and its least-squares allocation.
    The second pass conditions on that allocation, resamples latent cells
    and indicators only, and picks the least-squares configuration (the
    retained sample whose within-cluster cell partition is closest to the
    pairwise co-grouping frequencies).
    """
    from .summaries import accumulate_cocluster, least_squares_allocation

    config.validate()
    state, X = init_state(Xmat, config, rng)
    n, p = X.shape

    for _ in range(config.burn_in):
        state, _ = sweep(state, X, rng, config, Xmat=Xmat, X_work=X)

    partitions = []
    d_trace = np.empty(config.n_samples)
    logodds = np.empty(config.n_samples)
    trace = {k: np.empty(config.n_samples)
             for k in ("q", "tau2", "tau1_2", "xi", "loglik", "alpha1", "alpha2")}
    for s in range(config.n_samples):
        for _ in range(config.thin):
            state, lo = sweep(state, X, rng, config, Xmat=Xmat, X_work=X)
        partitions.append(canonical_labels(state.assignments))
        d_trace[s] = state.d
        logodds[s] = lo
        trace["q"][s] = state.n_clusters
        trace["tau2"][s] = state.tau2
        trace["tau1_2"][s] = state.tau1_2
        trace["xi"][s] = state.xi
        trace["loglik"][s] = data_loglik(state, X)
        trace["alpha1"][s] = state.alpha1
        trace["alpha2"][s] = state.alpha2

    cocluster = accumulate_cocluster(partitions)
    allocation = least_squares_allocation(partitions, cocluster)

    # Second pass: condition on the least-squares allocation.
    state.assignments = allocation.assignments.copy()
    q = allocation.n_clusters
    V0 = np.empty((n, q))
    for k in range(1, q + 1):
        V0[:, k - 1] = X[:, state.assignments == k].mean(axis=1)
    state.atom_vals = V0.ravel().copy()
    state.cell_atom = np.arange(n * q, dtype=np.int64).reshape(n, q)
    state.z = np.ones((n, q), dtype=np.int8)

    for _ in range(config.burn_in_1b):
        state, _ = sweep(state, X, rng, config, update_alloc=False,
                         Xmat=Xmat, X_work=X)

    cell_samples = np.empty((config.n_samples_1b, n, q), dtype=np.int32)
    v_samples = np.empty((config.n_samples_1b, n, q))
    z_samples = np.empty((config.n_samples_1b, n, q), dtype=np.int8)
    for s in range(config.n_samples_1b):
        for _ in range(config.thin_1b):
            state, _ = sweep(state, X, rng, config, update_alloc=False,
                             Xmat=Xmat, X_work=X)
        cell_samples[s] = state.cell_atom
        v_samples[s] = state.latent_matrix
        z_samples[s] = state.z

    best = _least_squares_configuration(cell_samples)
    fit = Stage1Fit(
        allocation=allocation,
        v_hat=v_samples[best].copy(),
        z_hat=z_samples[best].copy(),
        cocluster=cocluster,
        partitions=partitions,
        d_trace=d_trace,
        logodds_trace=logodds,
        trace=trace,
        state=state,
        config=config,
    )
    return fit


def _least_squares_configuration(cell_samples):
    """Index of the sample closest to the cell co-grouping frequencies.

    Scored per cluster over subject pairs (cells in the same cluster sharing
    an atom), which keeps the score matrix at n^2 per cluster instead of the
    full (n q)^2 table.
    """
    S, n, q = cell_samples.shape
    probs = np.zeros((q, n, n))
    for s in range(S):
        eq = cell_samples[s][:, None, :] == cell_samples[s][None, :, :]
        probs += np.transpose(eq, (2, 0, 1))
    probs /= S
    losses = np.empty(S)
    for s in range(S):
        eq = np.transpose(
            cell_samples[s][:, None, :] == cell_samples[s][None, :, :],
            (2, 0, 1))
        losses[s] = ((eq - probs) ** 2).sum()
    return int(np.argmin(losses))


# ---------------------------------------------------------------------------
# Forward simulation (prior predictive); the counterpart of the Gibbs kernel
# in the sampler-correctness tests.


def forward_draw_state(n, p, config, template, rng, max_tries=10000):
    """Draw a parameter state from the prior.

    ``template`` supplies the prior constants (base moments, inverse-gamma
    scales) that a data-derived init would normally provide.
    """
    d = 0.0 if rng.random() < 0.5 else float(rng.random())
    part = sample_partition(p, PdpParams(template.alpha1, d), rng)
    q = part.n_clusters

    # Variances: product of inverse-gammas restricted to tau_star <= tau < tau1.
    for _ in range(max_tries):
        tau2 = 1.0 / rng.gamma(template.a_tau, 1.0 / template.b_tau)
        tau1_2 = 1.0 / rng.gamma(template.a_tau1, 1.0 / template.b_tau1)
        if math.sqrt(tau2) >= template.tau_star and tau1_2 > tau2:
            break
    else:
        raise RuntimeError("variance prior rejection failed")

    xi = float(rng.beta(template.iota1, template.iota0))
    z = (rng.random((n, q)) < xi).astype(np.int8)

    # Latent cells from the shared-atom urn.
    base_sd = math.sqrt(template.tau22)
    unif = rng.random(n * q)
    norm = rng.standard_normal(n * q)
    counts = np.zeros(n * q, dtype=np.int64)
    values = np.zeros(n * q)
    idx, _ = draw_aux_vectors(counts, values, 0, 0.0, template.alpha2,
                              template.mu2, base_sd, 1, n * q, unif, norm)
    cell_flat = idx[0]
    n_atoms = int(cell_flat.max()) + 1
    cell_atom = cell_flat.reshape(n, q).astype(np.int64)

    return Stage1State(
        assignments=part.assignments.copy(),
        cell_atom=cell_atom,
        atom_vals=values[:n_atoms].copy(),
        z=z,
        tau2=float(tau2),
        tau1_2=float(tau1_2),
        xi=xi,
        d=d,
        alpha1=template.alpha1,
        alpha2=template.alpha2,
        mu2=template.mu2,
        tau22=template.tau22,
        iota1=template.iota1,
        iota0=template.iota0,
        tau_star=template.tau_star,
        a_tau=template.a_tau,
        b_tau=template.b_tau,
        a_tau1=template.a_tau1,
        b_tau1=template.b_tau1,
    )


def draw_data(state, n, p, rng):
    """Covariates given the current parameters."""
    V = state.latent_matrix
    k = state.assignments - 1
    mean = V[:, k]
    sd = np.sqrt(np.where(state.z[:, k] == 1, state.tau2, state.tau1_2))
    return mean + sd * rng.standard_normal((n, p))
