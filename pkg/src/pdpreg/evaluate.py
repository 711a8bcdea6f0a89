"""Prediction scoring for censored survival outcomes."""

import numpy as np

__all__ = ["concordance_error", "usable_pairs"]


def usable_pairs(w, delta):
    """Ordered index pairs whose survival ordering is determined.

    (i, j) is usable when w_i < w_j with subject i's failure observed, or
    when w_i == w_j with exactly one of the two censored.
    """
    w = np.asarray(w, dtype=float)
    delta = np.asarray(delta)
    lt = (w[:, None] < w[None, :]) & (delta[:, None] == 1)
    eq = (w[:, None] == w[None, :]) & (delta[:, None] != delta[None, :])
    np.fill_diagonal(eq, False)
    return np.nonzero(lt | eq)


def concordance_error(w, delta, w_pred):
    """Concordance error rate (one minus the c index) over usable pairs.

    Equals the fraction of usable pairs ranked the wrong way, with ties in
    the predictions counted as half an error.
    """
    w = np.asarray(w, dtype=float)
    delta = np.asarray(delta)
    w_pred = np.asarray(w_pred, dtype=float)
    if not (w.shape == delta.shape == w_pred.shape):
        raise ValueError("w, delta and predictions must have equal length")
    ii, jj = usable_pairs(w, delta)
    if ii.size == 0:
        raise ValueError("no usable pairs: the metric is undefined")
    ge = (w_pred[ii] >= w_pred[jj]).mean()
    eq = (w_pred[ii] == w_pred[jj]).mean()
    return float(ge - 0.5 * eq)
