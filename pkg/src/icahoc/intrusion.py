"""Word-intrusion consistency scores for component axes and the ordering of
axes by that score."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .hoc import top_word_indices
from .store import row_normalize


@dataclass(frozen=True)
class ConsistencyScore:
    axis: int
    score: float
    intra: float
    inter: float
    top_words: tuple
    intruder_sample: tuple
    seed: int


def descending_ranks(values):
    """0-based rank by descending value; tied values share the better rank."""
    values = np.asarray(values)
    srt = np.sort(values)[::-1]
    # number of entries strictly greater than each value
    return np.searchsorted(-srt, -values, side="left")


def intruder_pool(s, axis, low_q=0.5, high_q=0.1, eligible=None):
    s = np.asarray(s)
    n, d = s.shape
    if d < 2:
        raise DataError("intruder pool needs at least 2 axes")
    if not 0 <= axis < d:
        raise IndexError(f"axis {axis} out of range for {d} components")
    q = np.column_stack([descending_ranks(s[:, a]) for a in range(d)]) / n
    low = q[:, axis] >= 1.0 - low_q
    others = np.delete(q, axis, axis=1)
    high = np.any(others < high_q, axis=1)
    mask = low & high
    if eligible is not None:
        mask &= eligible
    pool = np.flatnonzero(mask)
    if pool.size == 0:
        raise DataError(
            f"empty intruder pool for axis {axis}; increase low_q/high_q "
            f"(now {low_q}/{high_q})")
    return pool


def _mean_pairwise(a, b):
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def consistency_from_vectors(top, intruders):
    """(score, intra, inter) for top-word rows and intruder rows."""
    top = np.asarray(top, dtype=np.float64)
    intruders = np.asarray(intruders, dtype=np.float64)
    k = top.shape[0]
    if k < 2:
        raise DataError("need at least 2 top words to measure intra distance")
    intra = _mean_pairwise(top, top).sum() / (k * (k - 1))
    inter = _mean_pairwise(intruders, top).mean(axis=1).mean()
    if intra == 0:
        raise DataError("top words coincide; intra distance is zero")
    return inter / intra, intra, inter


def score_axis(s, vocab, counts, axis, k=5, L=100, min_freq=100, seed=0,
               low_q=0.5, high_q=0.1, normalize=False, pool_min_freq=None):
    s = np.asarray(s, dtype=np.float64)
    counts = np.asarray(counts)
    top = top_word_indices(s, counts, axis, k, min_freq)
    if top.size == 0:
        raise DataError(f"axis {axis}: no top words with freq >= {min_freq}")
    eligible = None if pool_min_freq is None else counts >= pool_min_freq
    pool = intruder_pool(s, axis, low_q, high_q, eligible)
    rng = np.random.default_rng(seed)
    sample = rng.choice(pool, size=L, replace=True)
    x = row_normalize(s) if normalize else s
    try:
        score, intra, inter = consistency_from_vectors(x[top], x[sample])
    except DataError as e:
        raise DataError(f"axis {axis}: {e}") from None
    return ConsistencyScore(axis, float(score), float(intra), float(inter),
                            tuple(vocab[t] for t in top),
                            tuple(vocab[t] for t in sample), seed)


def score_all(s, vocab, counts, seed=0, **kw):
    """Score every axis; axis a uses seed + a."""
    return [score_axis(s, vocab, counts, a, seed=seed + a, **kw)
            for a in range(np.shape(s)[1])]


def sigma_order(scores):
    """sigma[j] = axis with the j-th highest score, ties by lower axis."""
    vals = [c.score if isinstance(c, ConsistencyScore) else float(c) for c in scores]
    axes = [c.axis if isinstance(c, ConsistencyScore) else a for a, c in enumerate(scores)]
    order = sorted(range(len(vals)), key=lambda t: (-vals[t], axes[t]))
    return np.array([axes[t] for t in order], dtype=np.int64)
