"""Compiled inner loops for the clustering sampler.

The kernels are sequential scans that would dominate the sweep time in pure
Python.  They consume pre-drawn uniform/normal arrays instead of owning a
generator, so all randomness still flows from one seeded source.
"""

import numpy as np
from numba import njit

__all__ = ["draw_aux_vectors", "reassign_cells"]


@njit(cache=True)
def draw_aux_vectors(counts, values, n_atoms, total, alpha2, mu2, base_sd,
                     n_vec, n_cells, unif, norm):
    """Draw n_vec latent vectors of n_cells elements from the shared-atom urn.

    counts/values hold the current table in their first n_atoms slots and
    must have capacity n_atoms + n_cells.  Each vector chains its own cells
    (a fresh atom drawn for cell i is available to cell i+1 of the same
    vector) but vectors are independent of one another.  Returns per-cell
    atom indices (>= n_atoms marks vector-local new atoms) and values.
    """
    out_idx = np.empty((n_vec, n_cells), np.int64)
    out_val = np.empty((n_vec, n_cells))
    work_counts = np.empty(n_atoms + n_cells, np.int64)
    work_values = np.empty(n_atoms + n_cells)
    for m in range(n_vec):
        for t in range(n_atoms):
            work_counts[t] = counts[t]
            work_values[t] = values[t]
        n_work = n_atoms
        tot = total
        for i in range(n_cells):
            u = unif[m * n_cells + i] * (tot + alpha2)
            if u < tot:
                acc = 0.0
                pick = -1
                for t in range(n_work):
                    if work_counts[t] > 0:
                        pick = t
                        acc += work_counts[t]
                        if u < acc:
                            break
            else:
                pick = n_work
                work_counts[pick] = 0
                work_values[pick] = mu2 + base_sd * norm[m * n_cells + i]
                n_work += 1
            out_idx[m, i] = pick
            out_val[m, i] = work_values[pick]
            work_counts[pick] += 1
            tot += 1.0
    return out_idx, out_val


@njit(cache=True)
def reassign_cells(cell_atom, counts, values, n_atoms, s1, s2, mcount, sig2,
                   alpha2, mu2, tau22, unif, norm):
    """One collapsed-urn sweep over all latent cells.

    cell_atom (flat, length n_cells) is updated in place; counts/values must
    have capacity n_atoms + n_cells for atoms created during the sweep.
    Existing atoms are weighted by count times the cell-data likelihood at
    the atom value; a fresh atom is weighted by alpha2 times the marginal
    likelihood under the normal base, and on selection its value is drawn
    from the conjugate posterior for this cell.  Returns the new atom count
    (zero-count atoms are left in place for the caller to prune).
    """
    n_cells = cell_atom.size
    n_work = n_atoms
    total = n_cells
    logw = np.empty(n_atoms + n_cells)
    for c in range(n_cells):
        old = cell_atom[c]
        counts[old] -= 1
        total -= 1

        m = mcount[c]
        v2 = sig2[c]
        lam = 1.0 / tau22 + m / v2
        mu_post = (mu2 / tau22 + s1[c] / v2) / lam
        log_fresh = (np.log(alpha2) - 0.5 * np.log(tau22 * lam)
                     - 0.5 * (s2[c] / v2 + mu2 * mu2 / tau22
                              - mu_post * mu_post * lam))
        best = log_fresh
        for t in range(n_work):
            if counts[t] > 0:
                a = values[t]
                lw = (np.log(counts[t])
                      - 0.5 * (s2[c] - 2.0 * a * s1[c] + m * a * a) / v2)
                logw[t] = lw
                if lw > best:
                    best = lw
            else:
                logw[t] = -np.inf
        wsum = np.exp(log_fresh - best)
        fresh_w = wsum
        for t in range(n_work):
            if counts[t] > 0:
                w = np.exp(logw[t] - best)
                logw[t] = w
                wsum += w
            else:
                logw[t] = 0.0

        u = unif[c] * wsum
        if u < fresh_w:
            pick = n_work
            counts[pick] = 0
            values[pick] = mu_post + norm[c] / np.sqrt(lam)
            n_work += 1
        else:
            u -= fresh_w
            acc = 0.0
            pick = -1
            for t in range(n_work):
                if counts[t] > 0:
                    pick = t
                    acc += logw[t]
                    if u < acc:
                        break
        cell_atom[c] = pick
        counts[pick] += 1
        total += 1
    return n_work
