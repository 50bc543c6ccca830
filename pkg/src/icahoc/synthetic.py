"""Synthetic data with known structure: independent source mixtures,
variance-coupled component groups and a small word corpus."""

import numpy as np

from .reduction import SimilarityDataset
from .store import EmbeddingMatrix


def independent_sources(n, k, rng, kinds=("laplace", "uniform")):
    """n x k matrix of unit-variance independent sources, alternating kinds."""
    cols = []
    for c in range(k):
        kind = kinds[c % len(kinds)]
        if kind == "laplace":
            cols.append(rng.laplace(scale=1 / np.sqrt(2), size=n))
        elif kind == "uniform":
            cols.append(rng.uniform(-np.sqrt(3), np.sqrt(3), size=n))
        elif kind == "exponential":
            cols.append(rng.exponential(size=n) - 1.0)
        else:
            raise ValueError(kind)
    return np.column_stack(cols)


def random_mixing(k, rng, min_sv=0.3):
    """Random invertible k x k matrix with singular values >= min_sv."""
    u, _ = np.linalg.qr(rng.standard_normal((k, k)))
    v, _ = np.linalg.qr(rng.standard_normal((k, k)))
    sv = rng.uniform(min_sv, 2.0, size=k)
    return (u * sv) @ v.T


def polar_scale_mixture(n, rng, p=0.2, scale=4.0):
    """Uncorrelated but dependent pair: radius from {1, scale} (prob 1-p, p),
    uniform angle, columns standardized."""
    r = np.where(rng.random(n) < p, scale, 1.0)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    xy = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    xy -= xy.mean(axis=0)
    return xy / xy.std(axis=0)


def polar_scale_mixture_hoc(p=0.2, scale=4.0):
    """Population E(x^2 y^2) of the standardized polar pair:
    E r^4 E(cos^2 sin^2) / (E r^2 / 2)^2 = E r^4 / (2 (E r^2)^2)."""
    er2 = (1 - p) + p * scale ** 2
    er4 = (1 - p) + p * scale ** 4
    return er4 / (2 * er2 ** 2)


def group_amplitudes(n, n_groups, rng, baseline=0.1, second_prob=0.5):
    """Per-word nonnegative group activity: one primary group, sometimes a
    weaker secondary one, small baseline elsewhere."""
    a = baseline * rng.exponential(size=(n, n_groups))
    primary = rng.integers(n_groups, size=n)
    a[np.arange(n), primary] += 1.0 + rng.exponential(size=n)
    second = rng.integers(n_groups, size=n)
    use = (rng.random(n) < second_prob) & (second != primary)
    a[np.flatnonzero(use), second[use]] += 0.5 * rng.exponential(size=use.sum())
    return a, primary


def zca_whiten(x):
    x = x - x.mean(axis=0)
    evals, evecs = np.linalg.eigh(x.T @ x / x.shape[0])
    return x @ (evecs / np.sqrt(evals)) @ evecs.T


def block_dependent_components(n, n_groups, per_group, rng, noise=0.5):
    """Columns a_g(c) * (1 + noise * N(0, 1)), then symmetrically whitened.

    Output columns are white and positively skewed; columns sharing a group
    stay dependent through the common amplitude. Returns (S, amplitudes,
    primary group per word, group per column).
    """
    a, primary = group_amplitudes(n, n_groups, rng)
    col_group = np.repeat(np.arange(n_groups), per_group)
    x = a[:, col_group] * (1.0 + noise * rng.standard_normal((n, n_groups * per_group)))
    return zca_whiten(x), a, primary, col_group


def similarity_pairs(a, primary, n_pairs, rng, name="synthetic", related_frac=0.4):
    """Word pairs with gold = cosine of latent group amplitudes. About
    `related_frac` of pairs share a primary group."""
    n = a.shape[0]
    by_group = {}
    for t, g in enumerate(primary):
        by_group.setdefault(int(g), []).append(t)
    seen = set()
    pairs = []
    while len(pairs) < n_pairs:
        if rng.random() < related_frac:
            members = by_group[int(rng.choice(list(by_group)))]
            if len(members) < 2:
                continue
            t, u = rng.choice(members, size=2, replace=False)
        else:
            t, u = rng.choice(n, size=2, replace=False)
        key = (min(t, u), max(t, u))
        if key in seen:
            continue
        seen.add(key)
        gold = a[t] @ a[u] / (np.linalg.norm(a[t]) * np.linalg.norm(a[u]))
        pairs.append((int(t), int(u), float(gold)))
    return pairs


def word_names(n):
    width = len(str(n - 1))
    return [f"w{t:0{width}d}" for t in range(n)]


def similarity_dataset(vocab, pairs, name):
    return SimilarityDataset(name, tuple((vocab[t], vocab[u], g) for t, u, g in pairs))


def zipf_counts(n, rng, top=100000, exponent=1.0):
    ranks = rng.permutation(n) + 1
    return np.floor(top / ranks ** exponent).astype(np.int64) + 1


def synthetic_corpus(n=500, n_groups=10, per_group=2, seed=0, n_pairs=200):
    """A small word corpus: embeddings = components mixed by a random matrix
    plus an offset, Zipf-like counts, a similarity dataset and each word's
    primary group (used as ground-truth clusters)."""
    rng = np.random.default_rng(seed)
    s, a, primary, _ = block_dependent_components(n, n_groups, per_group, rng)
    d = s.shape[1]
    x = s @ random_mixing(d, rng) + rng.normal(size=d)
    vocab = word_names(n)
    counts = zipf_counts(n, rng, top=20000)
    m = EmbeddingMatrix(np.round(x, 6), tuple(vocab), dict(zip(vocab, counts.tolist())))
    ds = similarity_dataset(vocab, similarity_pairs(a, primary, n_pairs, rng), "synthetic")
    clusters = dict(zip(vocab, primary.tolist()))
    return m, ds, clusters
