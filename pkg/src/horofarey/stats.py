"""Two-sample distances used to compare empirical ensembles with reference laws."""

import numpy as np


def _as_sorted(a, name):
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0:
        raise ValueError(f"{name} must be nonempty")
    return np.sort(a)


def ks_two_sample(a, b):
    """sup |F_a - F_b| with ties advancing both empirical CDFs simultaneously."""
    a = _as_sorted(a, "a")
    b = _as_sorted(b, "b")
    grid = np.union1d(a, b)
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_sample_vs_weighted(samples, values, weights):
    """sup |F_emp - F_w| against a discrete weighted law (values, weights)."""
    samples = _as_sorted(samples, "samples")
    values = np.asarray(values, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if values.size == 0 or values.size != weights.size:
        raise ValueError("values and weights must be nonempty and equal-length")
    order = np.argsort(values, kind="stable")
    values = values[order]
    cdf = np.cumsum(weights[order])
    cdf /= cdf[-1]
    grid = np.union1d(samples, values)
    fe = np.searchsorted(samples, grid, side="right") / samples.size
    idx = np.searchsorted(values, grid, side="right")
    fw = np.where(idx > 0, cdf[np.minimum(idx, values.size) - 1], 0.0)
    fw = np.where(idx == 0, 0.0, fw)
    return float(np.max(np.abs(fe - fw)))


def ks_sample_vs_interpolated(samples, values, weights):
    """sup |F_emp - F| against the piecewise-linear CDF through the weighted
    law's midpoint plotting positions.

    Quadrature rules discretize a continuous law into atoms; comparing raw
    step CDFs would floor the distance at half the largest atom weight, so
    the quadrature CDF is interpolated before taking the supremum.
    """
    samples = _as_sorted(samples, "samples")
    values = np.asarray(values, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    values, inverse = np.unique(values, return_inverse=True)
    w = np.bincount(inverse, weights=weights)
    w /= w.sum()
    cdf_mid = np.cumsum(w) - 0.5 * w
    fq = np.interp(samples, values, cdf_mid, left=0.0, right=1.0)
    fe_hi = (np.arange(samples.size) + 1.0) / samples.size
    fe_lo = np.arange(samples.size) / samples.size
    return float(np.max(np.maximum(np.abs(fe_hi - fq), np.abs(fe_lo - fq))))


def wasserstein1(a, b, resample=False):
    """Mean |a_i - b_i| over the sorted pairing of two equal-size samples.

    With resample=True, unequal sizes are matched by evaluating both quantile
    functions on a common grid of max(len(a), len(b)) levels.
    """
    a = _as_sorted(a, "a")
    b = _as_sorted(b, "b")
    if a.size != b.size:
        if not resample:
            raise ValueError(f"sample sizes differ ({a.size} vs {b.size}); pass resample=True")
        n = max(a.size, b.size)
        levels = (np.arange(n) + 0.5) / n
        # linear-interpolation quantiles on the already-sorted arrays;
        # np.quantile would re-partition once per level
        a = np.interp(levels * (a.size - 1), np.arange(a.size), a)
        b = np.interp(levels * (b.size - 1), np.arange(b.size), b)
    return float(np.mean(np.abs(a - b)))


def empirical_quantiles(a, levels=(0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)):
    a = _as_sorted(a, "a")
    return {f"q{int(100 * lv):03d}": float(np.quantile(a, lv)) for lv in levels}
