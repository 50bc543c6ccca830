"""Higher-order correlations E(S_i^2 S_j^2) between whitened components and the
word-level views built on them."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError

WHITE_TOL = 1e-3


@dataclass(frozen=True)
class HocMatrix:
    values: np.ndarray
    diag_is_fourth_moment: bool = True

    @property
    def d(self):
        return self.values.shape[0]

    def dependence(self):
        """|E(S_i^2 S_j^2) - 1|, the deviation from the independent value."""
        return np.abs(self.values - 1.0)


@dataclass(frozen=True)
class ContributionList:
    pair: tuple
    entries: list  # (word, s_ti^2 s_tj^2), descending


def check_white(s, tol=WHITE_TOL):
    s = np.asarray(s, dtype=np.float64)
    mean = s.mean(axis=0)
    var = s.var(axis=0)
    bad = np.flatnonzero((np.abs(mean) > tol) | (np.abs(var - 1.0) > tol))
    if bad.size:
        detail = ", ".join(f"col {c}: mean={mean[c]:.3g} var={var[c]:.3g}" for c in bad[:5])
        raise DataError(f"components are not whitened ({bad.size} columns): {detail}")
    return s


def hoc_matrix(s):
    s = check_white(s)
    q = s * s
    v = q.T @ q / s.shape[0]
    # mirror the upper triangle so symmetry is exact
    v = np.triu(v) + np.triu(v, 1).T
    return HocMatrix(v)


def _check_axis(d, *axes):
    for a in axes:
        if not 0 <= a < d:
            raise IndexError(f"axis {a} out of range for {d} components")


def contributions(s, i, j):
    s = np.asarray(s, dtype=np.float64)
    _check_axis(s.shape[1], i, j)
    return s[:, i] ** 2 * s[:, j] ** 2


def top_contributors(s, vocab, i, j, k):
    if k < 1:
        raise ValueError("k must be >= 1")
    c = contributions(s, i, j)
    idx = np.argsort(-c, kind="stable")[:k]
    return ContributionList((i, j), [(vocab[t], float(c[t])) for t in idx])


def top_word_indices(s, freq_counts, axis, k, min_freq=0):
    s = np.asarray(s)
    _check_axis(s.shape[1], axis)
    if k < 1:
        raise ValueError("k must be >= 1")
    eligible = np.flatnonzero(np.asarray(freq_counts) >= min_freq)
    vals = s[eligible, axis]
    picked = eligible[np.argsort(-vals, kind="stable")[:k]]
    if picked.size < k:
        warnings.warn(f"axis {axis}: only {picked.size} words with freq >= {min_freq}")
    return picked


def top_words(s, vocab, freq, axis, k, min_freq=0):
    counts = [freq.get(w, 0) for w in vocab] if isinstance(freq, dict) else freq
    return [vocab[t] for t in top_word_indices(s, counts, axis, k, min_freq)]


def frequency_correlation(s, counts, log=False):
    """Pearson r between word counts and each component column.

    Returns (r, degenerate) where degenerate marks columns with zero variance
    in either variable; their r is reported as 0.
    """
    s = np.asarray(s, dtype=np.float64)
    f = np.asarray(counts, dtype=np.float64)
    if s.shape[0] < 2:
        raise DataError("need at least 2 words")
    if log:
        f = np.log1p(f)
    fc = f - f.mean()
    sc = s - s.mean(axis=0)
    sf = np.sqrt(fc @ fc)
    ss = np.sqrt(np.einsum("ij,ij->j", sc, sc))
    degenerate = (ss == 0) | (sf == 0)
    r = np.zeros(s.shape[1])
    ok = ~degenerate
    r[ok] = (fc @ sc[:, ok]) / (sf * ss[ok])
    return np.clip(r, -1.0, 1.0), degenerate


def hoc_entries(h, include_diag=False):
    values = getattr(h, "values", h)
    iu = np.triu_indices(values.shape[0], k=0 if include_diag else 1)
    return values[iu]


def hoc_histogram(h, include_diag=False, bins=50, range=None):
    if bins < 1:
        raise ValueError("bins must be >= 1")
    vals = hoc_entries(h, include_diag)
    if range is None:
        lo, hi = float(vals.min()), float(vals.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = map(float, range)
    if not lo < hi:
        raise ValueError(f"degenerate histogram range ({lo}, {hi})")
    counts, edges = np.histogram(np.clip(vals, lo, hi), bins=bins, range=(lo, hi))
    return counts, edges


def ranked_pairs(h, nodes=None):
    """Unordered axis pairs sorted by descending |E(S_i^2 S_j^2) - 1|, ties by
    (i, j)."""
    values = getattr(h, "values", h)
    nodes = list(range(values.shape[0])) if nodes is None else list(nodes)
    pairs = [(a, b) for x, a in enumerate(nodes) for b in nodes[x + 1:]]
    pairs = [(min(a, b), max(a, b)) for a, b in pairs]
    pairs.sort(key=lambda p: (-abs(values[p] - 1.0), p))
    return pairs
