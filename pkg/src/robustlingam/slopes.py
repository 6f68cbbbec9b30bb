"""Bivariate slope estimators: least squares, Theil-Sen, repeated median.

All three estimators return the slope of a no-intercept fit of the
target on the regressor after implicit centering, which is the form the
causal order search consumes.  The robust pair, ``theil_sen_slope`` and
``repeated_median_slope``, are medians over pairwise difference
quotients

    s_ij = (y_j - y_i) / (x_j - x_i),   x_i != x_j,

so they tolerate a constant fraction of contaminated rows (asymptotic
breakdown 1 - 1/sqrt(2) ~ 29.3% for Theil-Sen, 50% for the repeated
median).  Pairs with a zero denominator are skipped; even-sized
multisets take the mean of the two middle order statistics, matching
``numpy.median``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConstantPredictor

__all__ = [
    "SlopeEstimate",
    "ols_slope",
    "theil_sen_slope",
    "repeated_median_slope",
    "residuals",
]

# Leaf size below which pair counting is done by direct enumeration.
_BRUTE_CUTOFF = 128
# Stop shrinking the candidate interval once at most this many pairwise
# slopes remain (they are then enumerated and selected directly).
_ENUM_FACTOR = 4
_ENUM_FLOOR = 256
# Exact path above this size would materialize too many pairs for the
# latency the order search wants, so "auto" switches to the randomized
# selection.
_FAST_THRESHOLD = 1000
_SEED_TAG = 0x7415EED


@dataclass(frozen=True)
class SlopeEstimate:
    """Result of a bivariate slope fit.

    Attributes
    ----------
    value : float
        Estimated slope.
    estimator : str
        Canonical estimator name ("ols", "theil-sen", "repeated-median").
    n_pairs_used : int
        Number of unordered index pairs with distinct regressor values.
        All three estimators share this notion: those are the pairs that
        carry slope information.
    """

    value: float
    estimator: str
    n_pairs_used: int


def _as_sample(x, y):
    """Validate a paired sample and return float64 copies.

    Raises ValueError on shape mismatch, fewer than two observations or
    non-finite entries, and ConstantPredictor when the regressor is
    constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("x and y must be one-dimensional")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise ValueError("need at least two observations")
    if not np.isfinite(x).all() or not np.isfinite(y).all():
        raise ValueError("inputs must be finite")
    if x.min() == x.max():
        raise ConstantPredictor("regressor is constant")
    return x, y


def _n_valid_pairs(x):
    """Number of unordered pairs with distinct x values."""
    n = x.shape[0]
    total = n * (n - 1) // 2
    _, counts = np.unique(x, return_counts=True)
    ties = counts[counts > 1]
    return int(total - np.sum(ties * (ties - 1) // 2))


def ols_slope(x, y) -> SlopeEstimate:
    """Least-squares slope of y on x (slope of the fitted line).

    Equals cov(x, y) / var(x); the intercept is profiled out.
    """
    x, y = _as_sample(x, y)
    xc = x - x.mean()
    value = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    return SlopeEstimate(value, "ols", _n_valid_pairs(x))


def _pairwise_slopes(x, y):
    """All pairwise difference quotients with nonzero denominator."""
    n = x.shape[0]
    if n <= 1500:
        a, b = np.triu_indices(n, 1)
        dx = x[b] - x[a]
        keep = dx != 0
        return (y[b] - y[a])[keep] / dx[keep]
    parts = []
    for a in range(n - 1):
        dx = x[a + 1:] - x[a]
        keep = dx != 0
        dy = y[a + 1:] - y[a]
        parts.append(dy[keep] / dx[keep] if not keep.all() else dy / dx)
    return np.concatenate(parts)


def theil_sen_slope(x, y, method: str = "auto") -> SlopeEstimate:
    """Theil-Sen slope: median of all pairwise difference quotients.

    Parameters
    ----------
    x, y : array_like, shape (n,)
        Regressor and target.
    method : {"auto", "exact", "fast"}
        "exact" enumerates all ~n^2/2 pairs.  "fast" runs a randomized
        interval-shrinking rank selection over the pairwise slopes in
        roughly O(n log^3 n) time without materializing them; it uses a
        private generator seeded from the sample size only, so repeated
        calls are deterministic.  Both paths select order statistics of
        the same multiset and agree to the last bit.  "auto" picks
        "exact" up to n = 1000 and "fast" beyond.

    Returns
    -------
    SlopeEstimate
    """
    x, y = _as_sample(x, y)
    if method not in ("auto", "exact", "fast"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "exact" if x.shape[0] <= _FAST_THRESHOLD else "fast"
    if method == "exact":
        slopes = _pairwise_slopes(x, y)
        return SlopeEstimate(float(np.median(slopes)), "theil-sen", slopes.size)
    value, n_pairs = _theil_sen_fast(x, y)
    return SlopeEstimate(value, "theil-sen", n_pairs)


def repeated_median_slope(x, y) -> SlopeEstimate:
    """Repeated median slope: med_i med_{j != i} s_ij.

    The inner median for row i runs over all j with x_j != x_i; rows
    with no valid partner are dropped from the outer median.  Computed
    in row chunks so the n x n slope matrix never fully materializes.
    """
    x, y = _as_sample(x, y)
    n = x.shape[0]
    chunk = max(1, min(n, 2 ** 22 // n))
    inner = np.empty(n)
    for s in range(0, n, chunk):
        xb = x[s:s + chunk, None]
        dx = x[None, :] - xb
        with np.errstate(divide="ignore", invalid="ignore"):
            mat = (y[None, :] - y[s:s + chunk, None]) / dx
        mat[dx == 0] = np.nan
        inner[s:s + chunk] = np.nanmedian(mat, axis=1)
    inner = inner[np.isfinite(inner)]
    return SlopeEstimate(float(np.median(inner)), "repeated-median", _n_valid_pairs(x))


_ESTIMATORS = {
    "ols": ols_slope,
    "theil-sen": theil_sen_slope,
    "ts": theil_sen_slope,
    "repeated-median": repeated_median_slope,
    "rm": repeated_median_slope,
}


def slope_function(estimator: str):
    """Resolve an estimator tag ("ols", "theil-sen"/"ts",
    "repeated-median"/"rm") to its function."""
    try:
        return _ESTIMATORS[estimator]
    except KeyError:
        raise ValueError(f"unknown slope estimator {estimator!r}") from None


def residuals(x, targets, estimator: str = "theil-sen") -> np.ndarray:
    """Residuals of one or more targets regressed on x without intercept.

    Parameters
    ----------
    x : array_like, shape (n,)
    targets : array_like, shape (n,) or (n, k)
        Each column is residualized independently.
    estimator : str
        Slope estimator tag, see :func:`slope_function`.

    Returns
    -------
    ndarray with the shape of ``targets``.
    """
    fit = slope_function(estimator)
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        return targets - fit(x, targets).value * np.asarray(x, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(targets)
    for k in range(targets.shape[1]):
        out[:, k] = targets[:, k] - fit(x, targets[:, k]).value * x
    return out


# ---------------------------------------------------------------------------
# Randomized Theil-Sen selection.
#
# Points sorted by (x asc, y asc) give the base order.  For a parameter t
# put w_i = y_i - t x_i.  A pair with x_a < x_b has slope <= t exactly when
# w_b <= w_a, so the number of pairwise slopes <= t is the number of
# non-strict inversions of w in base order minus the duplicate-point pairs
# (x ties contribute only those).  Rank selection then shrinks an interval
# (lo, hi] around the target order statistics using random pairwise slopes
# as pivots, and finishes by enumerating the few pairs whose slopes fall in
# the final interval: those are exactly the pairs whose relative order
# differs between the point orderings "just above lo" and "just above hi".
# ---------------------------------------------------------------------------


def _inversion_counts(values):
    """Counts of pairs i < j with values[i] > values[j] and with
    values[i] == values[j], by bottom-up merge counting."""
    arr = np.array(values, dtype=float)
    n = arr.size
    gt = 0
    eq = 0
    width = _BRUTE_CUTOFF
    for s in range(0, n, width):
        block = arr[s:s + width]
        iu, ju = np.triu_indices(block.size, 1)
        gt += int(np.count_nonzero(block[iu] > block[ju]))
        eq += int(np.count_nonzero(block[iu] == block[ju]))
        block.sort()
    while width < n:
        for s in range(0, n, 2 * width):
            left = arr[s:s + width]
            right = arr[s + width:s + 2 * width]
            if right.size == 0:
                continue
            hi_pos = np.searchsorted(left, right, side="right")
            lo_pos = np.searchsorted(left, right, side="left")
            gt += int(np.sum(left.size - hi_pos))
            eq += int(np.sum(hi_pos - lo_pos))
            arr[s:s + 2 * width].sort(kind="stable")
        width *= 2
    return gt, eq


def _order_above(xs, ys, t):
    """Point ordering by w = y - t x, ascending, at parameter t plus an
    infinitesimal; ties beyond that are resolved by base position."""
    if t == -np.inf:
        return np.arange(xs.size)
    if t == np.inf:
        return np.lexsort((ys, -xs))
    return np.lexsort((-xs, ys - t * xs))


def _window_pairs(order_lo, order_hi):
    """Pairs of point ids whose relative order differs between the two
    orderings, via merge enumeration of permutation inversions."""
    n = order_lo.size
    rank_lo = np.empty(n, dtype=np.intp)
    rank_lo[order_lo] = np.arange(n)
    keys = rank_lo[order_hi]
    pids = order_hi.copy()
    first = []
    second = []
    width = _BRUTE_CUTOFF
    keys = keys.copy()
    for s in range(0, n, width):
        kb = keys[s:s + width]
        pb = pids[s:s + width]
        iu, ju = np.triu_indices(kb.size, 1)
        hit = kb[iu] > kb[ju]
        if hit.any():
            first.append(pb[iu[hit]])
            second.append(pb[ju[hit]])
        order = np.argsort(kb, kind="stable")
        keys[s:s + width] = kb[order]
        pids[s:s + width] = pb[order]
    while width < n:
        for s in range(0, n, 2 * width):
            lk = keys[s:s + width]
            lp = pids[s:s + width]
            rk = keys[s + width:s + 2 * width]
            rp = pids[s + width:s + 2 * width]
            if rk.size == 0:
                continue
            pos = np.searchsorted(lk, rk, side="right")
            counts = lk.size - pos
            total = int(counts.sum())
            if total:
                seg_start = np.concatenate(([0], np.cumsum(counts)[:-1]))
                within = np.arange(total) - np.repeat(seg_start, counts)
                first.append(lp[np.repeat(pos, counts) + within])
                second.append(np.repeat(rp, counts))
            merged = np.argsort(keys[s:s + 2 * width], kind="stable")
            keys[s:s + 2 * width] = keys[s:s + 2 * width][merged]
            pids[s:s + 2 * width] = pids[s:s + 2 * width][merged]
        width *= 2
    if not first:
        return np.empty(0, dtype=np.intp), np.empty(0, dtype=np.intp)
    return np.concatenate(first), np.concatenate(second)


class _SlopeSelector:
    """Shared state for selecting order statistics of pairwise slopes."""

    def __init__(self, x, y):
        order0 = np.lexsort((y, x))
        self.xs = x[order0]
        self.ys = y[order0]
        n = x.shape[0]
        self.n = n
        _, xa = np.unique(self.xs, return_counts=True)
        xa = xa[xa > 1]
        self.n_pairs = n * (n - 1) // 2 - int(np.sum(xa * (xa - 1) // 2))
        # duplicate (x, y) points: equal-w pairs for every t
        same = (np.diff(self.xs) == 0) & (np.diff(self.ys) == 0)
        run = 0
        dup = 0
        for flag in same:
            run = run + 1 if flag else 0
            dup += run
        self.n_dup = dup
        self.rng = np.random.default_rng([_SEED_TAG, n])
        self.enum_limit = max(_ENUM_FACTOR * n, _ENUM_FLOOR)

    def count_below(self, t):
        """(number of slopes <= t, number of slopes < t)."""
        gt, eq = _inversion_counts(self.ys - t * self.xs)
        return gt + eq - self.n_dup, gt

    def _sample_pivot(self, lo, hi):
        xs, ys, n = self.xs, self.ys, self.n
        for _ in range(6):
            a = self.rng.integers(0, n, size=512)
            b = self.rng.integers(0, n, size=512)
            dx = xs[b] - xs[a]
            keep = dx != 0
            if not keep.any():
                continue
            s = (ys[b] - ys[a])[keep] / dx[keep]
            s = s[(s > lo) & (s <= hi)]
            if s.size:
                return float(np.median(s))
        if np.isfinite(lo) and np.isfinite(hi):
            return 0.5 * (lo + hi)
        if np.isfinite(lo):
            return lo + max(1.0, abs(lo))
        if np.isfinite(hi):
            return hi - max(1.0, abs(hi))
        return 0.0

    def enumerate(self, lo, hi):
        """Sorted slopes in (lo, hi]."""
        a, b = _window_pairs(_order_above(self.xs, self.ys, lo),
                             _order_above(self.xs, self.ys, hi))
        s = (self.ys[b] - self.ys[a]) / (self.xs[b] - self.xs[a])
        s.sort()
        return s

    def select(self, k, lo=-np.inf, hi=np.inf, c_lo=0, c_hi=None):
        """The k-th (0-based) order statistic of the slope multiset,
        returned as (value, window_slopes, window_base_count) where the
        window fields are None when a pivot matched exactly."""
        if c_hi is None:
            c_hi = self.n_pairs
        for _ in range(100):
            if c_hi - c_lo <= self.enum_limit:
                break
            t = self._sample_pivot(lo, hi)
            if not (lo < t <= hi):
                t = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else t
                if not (lo < t <= hi):
                    break
            c_le, c_lt = self.count_below(t)
            if c_lt <= k < c_le:
                return float(t), None, None
            if c_le > k:
                hi, c_hi = t, c_le
            elif c_le > c_lo:
                lo, c_lo = t, c_le
            else:
                break
        window = self.enumerate(lo, hi)
        if window.size != c_hi - c_lo:
            raise FloatingPointError("inconsistent slope window")
        return float(window[k - c_lo]), window, c_lo


def _theil_sen_fast(x, y):
    sel = _SlopeSelector(x, y)
    total = sel.n_pairs
    k_lo = (total - 1) // 2
    k_hi = total // 2
    v_lo, window, base = sel.select(k_lo)
    if k_hi == k_lo:
        return v_lo, total
    if window is not None and k_hi - base < window.size:
        v_hi = float(window[k_hi - base])
    else:
        c_le, c_lt = sel.count_below(v_lo)
        if c_lt <= k_hi < c_le:
            v_hi = v_lo
        else:
            v_hi, _, _ = sel.select(k_hi, v_lo, np.inf, c_le, total)
    return (v_lo + v_hi) * 0.5, total
