import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdpreg.pdp import (Partition, PdpParams, canonical_labels,
                        expected_cluster_count, log_eppf, log_eppf_sizes,
                        log_pi_moments, predictive_weights, sample_partition,
                        stick_breaking)
from pdpreg.rng import RandomSource


def seq_log_prob(order, assignments, params):
    """Independent oracle: sum of log predictive probabilities when the items
    are presented in the given order."""
    seen = {}
    sizes = []
    total = 0.0
    for j in order:
        label = assignments[j]
        w = predictive_weights(np.array(sizes, dtype=float), params)
        if label in seen:
            total += math.log(w[seen[label]])
            sizes[seen[label]] += 1
        else:
            total += math.log(w[-1])
            seen[label] = len(sizes)
            sizes.append(1)
    return total


def all_partitions(p):
    """Every set partition of p items as a label vector."""
    out = []
    for labels in itertools.product(range(p), repeat=p):
        lab = canonical_labels(np.array(labels) + 1)
        if not any(np.array_equal(lab, o) for o in out):
            out.append(lab)
    return out


def test_predictive_weights_examples():
    w = predictive_weights(np.array([2, 1]), PdpParams(1.0, 0.5))
    np.testing.assert_allclose(w, [0.375, 0.125, 0.5])
    w = predictive_weights(np.array([3]), PdpParams(2.0, 0.0))
    np.testing.assert_allclose(w, [0.6, 0.4])
    w = predictive_weights(np.array([]), PdpParams(1.0, 0.3))
    np.testing.assert_allclose(w, [1.0])


def test_predictive_weights_invalid_sizes():
    with pytest.raises(ValueError):
        predictive_weights(np.array([2, 0]), PdpParams(1.0))


def test_params_validation():
    with pytest.raises(ValueError):
        PdpParams(0.0)
    with pytest.raises(ValueError):
        PdpParams(1.0, 1.0)
    with pytest.raises(ValueError):
        PdpParams(1.0, -0.1)


def test_sample_partition_single_item():
    part = sample_partition(1, PdpParams(5.0, 0.5), RandomSource(0).generator())
    assert part.assignments.tolist() == [1]


def test_sample_partition_mean_cluster_count_dp():
    # Exact oracle: E[q] = sum_{i=1}^{p} alpha / (alpha + i - 1).
    p, alpha, reps = 1000, 1.0, 2000
    exact = sum(alpha / (alpha + i - 1.0) for i in range(1, p + 1))
    rng = RandomSource(42).generator()
    params = PdpParams(alpha, 0.0)
    qs = np.array([sample_partition(p, params, rng).n_clusters
                   for _ in range(reps)])
    se = qs.std() / math.sqrt(reps)
    assert abs(qs.mean() - exact) < 3 * se
    assert abs(exact - expected_cluster_count(params, p)) < 1e-8


def test_sample_partition_discount_grows_clusters():
    p, reps = 1000, 300
    rng = RandomSource(43).generator()
    q0 = np.array([sample_partition(p, PdpParams(20.0, 0.0), rng).n_clusters
                   for _ in range(reps)])
    qd = np.array([sample_partition(p, PdpParams(20.0, 0.33), rng).n_clusters
                   for _ in range(reps)])
    gap_se = math.sqrt(q0.var() / reps + qd.var() / reps)
    assert qd.mean() - q0.mean() > 3 * gap_se


def test_log_eppf_examples():
    assert log_eppf(Partition([1, 2]), PdpParams(1.0, 0.0)) == pytest.approx(
        math.log(0.5))
    assert log_eppf(Partition([1, 1]), PdpParams(1.0, 0.0)) == pytest.approx(
        math.log(0.5))
    assert log_eppf(Partition([1, 2]), PdpParams(1.0, 0.5)) == pytest.approx(
        math.log(0.75))


def test_log_eppf_exchangeable_over_presentation_order():
    rng = RandomSource(44).generator()
    for _ in range(5):
        params = PdpParams(float(rng.uniform(0.2, 5.0)),
                           float(rng.uniform(0.0, 0.9)))
        assignments = sample_partition(4, params, rng).assignments
        ref = log_eppf(Partition(assignments), params)
        for order in itertools.permutations(range(4)):
            assert seq_log_prob(order, assignments, params) == pytest.approx(ref)


@pytest.mark.parametrize("d", [0.0, 0.3, 0.7])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 5.0])
def test_eppf_sums_to_one_p3(alpha, d):
    params = PdpParams(alpha, d)
    total = sum(math.exp(log_eppf(Partition(lab), params))
                for lab in all_partitions(3))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_log_eppf_sizes_vectorized_matches_scalar():
    sizes = np.array([5, 3, 1, 1])
    ds = np.array([0.0, 0.25, 0.6])
    vec = log_eppf_sizes(sizes, 2.0, ds)
    for i, d in enumerate(ds):
        assert vec[i] == pytest.approx(log_eppf_sizes(sizes, 2.0, float(d)))


def test_stick_breaking_basic():
    rng = RandomSource(45).generator()
    pi = stick_breaking(PdpParams(1.0, 0.2), 1, rng)
    assert pi.shape == (1,) and 0.0 < pi[0] < 1.0
    pi = stick_breaking(PdpParams(2.0, 0.4), 50, rng)
    assert np.all((pi > 0) & (pi < 1)) and pi.sum() < 1.0


def test_stick_breaking_telescoping_identity():
    # Reconstruct the V draws with an identical generator and check
    # sum(pi) + prod(1 - V) == 1 exactly up to float error.
    params = PdpParams(1.5, 0.3)
    H = 40
    pi = stick_breaking(params, H, RandomSource(46).generator())
    rng = RandomSource(46).generator()
    h = np.arange(1, H + 1)
    v = rng.beta(1.0 - params.discount, params.mass + h * params.discount)
    assert abs(pi.sum() + np.prod(1.0 - v) - 1.0) < 1e-12
    expected = v * np.concatenate([[1.0], np.cumprod(1.0 - v[:-1])])
    np.testing.assert_allclose(pi, expected, rtol=1e-12)


def test_stick_breaking_first_weight_mean():
    rng = RandomSource(47).generator()
    draws = np.array([stick_breaking(PdpParams(1.0, 0.0), 1, rng)[0]
                      for _ in range(100000)])
    se = draws.std() / math.sqrt(draws.size)
    assert abs(draws.mean() - 0.5) < 3 * se


def test_log_pi_moments_dp_case():
    assert log_pi_moments(PdpParams(1.0, 0.0), 1) == pytest.approx((-1.0, 1.0))
    assert log_pi_moments(PdpParams(1.0, 0.0), 10) == pytest.approx((-10.0, 10.0))


def mc_log_pi(params, h, n, seed):
    rng = RandomSource(seed).generator()
    idx = np.arange(1, h + 1)
    v = rng.beta(1.0 - params.discount, params.mass + idx * params.discount,
                 size=(n, h))
    return np.log(v[:, -1]) + np.log1p(-v[:, :-1]).sum(axis=1)


def test_log_pi_moments_monte_carlo():
    params = PdpParams(1.0, 0.5)
    h, n = 3, 100000
    draws = mc_log_pi(params, h, n, seed=48)
    mean_f, var_f = log_pi_moments(params, h)
    se_mean = draws.std() / math.sqrt(n)
    assert abs(draws.mean() - mean_f) < 3 * se_mean
    m4 = np.mean((draws - draws.mean()) ** 4)
    se_var = math.sqrt((m4 - draws.var() ** 2) / n)
    assert abs(draws.var(ddof=1) - var_f) < 3 * se_var


def test_log_ratio_trend_matches_finite_h_mean():
    # Finite-h restatement of the tail-ratio limit: the mean of
    # (1/h) log(pi*_h / pi_h) equals the difference of the closed-form means
    # divided by h, which approaches -1/mass as h grows.  The finite-h
    # correction applied here is (mean_dp(h) - mean_pdp(h)) / h itself.
    alpha, d, h, n = 1.0, 0.5, 200, 40000
    dp = PdpParams(alpha, 0.0)
    pdp = PdpParams(alpha, d)
    log_dp = mc_log_pi(dp, h, n, seed=49)
    log_pdp = mc_log_pi(pdp, h, n, seed=50)
    ratio = (log_dp - log_pdp) / h
    exact = (log_pi_moments(dp, h)[0] - log_pi_moments(pdp, h)[0]) / h
    se = ratio.std() / math.sqrt(n)
    assert abs(ratio.mean() - exact) < 3 * se
    # The finite-h value approaches the limit -1/mass as h grows.
    gap = abs(exact - (-1.0 / alpha))
    exact_h50 = (log_pi_moments(dp, 50)[0] - log_pi_moments(pdp, 50)[0]) / 50
    assert gap < abs(exact_h50 - (-1.0 / alpha))
    assert gap < 0.1


def test_expected_cluster_count():
    params = PdpParams(1.0, 0.0)
    exact_100 = sum(1.0 / i for i in range(1, 101))
    assert expected_cluster_count(params, 100) == pytest.approx(exact_100, abs=1e-8)
    assert expected_cluster_count(params, 100) == pytest.approx(5.1874, abs=5e-5)
    assert expected_cluster_count(params, 1) == pytest.approx(1.0)
    exact_250 = sum(20.0 / (19.0 + i) for i in range(1, 251))
    assert expected_cluster_count(PdpParams(20.0, 0.0), 250) == pytest.approx(
        exact_250, abs=1e-8)
    # Positive discount reports the p**d order of magnitude only.
    assert expected_cluster_count(PdpParams(20.0, 0.33), 1000) == pytest.approx(
        1000.0 ** 0.33)


@given(st.lists(st.integers(min_value=1, max_value=6), min_size=1, max_size=12))
@settings(max_examples=200, deadline=None)
def test_canonical_labels_contiguous_first_appearance(raw):
    lab = canonical_labels(np.array(raw))
    seen = []
    for value in lab:
        if value not in seen:
            seen.append(value)
    assert seen == list(range(1, len(seen) + 1))
    # Relabeling is a bijection on clusters: co-membership is preserved.
    raw_arr = np.array(raw)
    same_raw = raw_arr[:, None] == raw_arr[None, :]
    same_lab = lab[:, None] == lab[None, :]
    assert np.array_equal(same_raw, same_lab)


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition([])
    part = Partition([3, 3, 1])
    assert part.assignments.tolist() == [1, 1, 2]
    assert part.sizes.tolist() == [2, 1]
    assert part.members(1).tolist() == [0, 1]
