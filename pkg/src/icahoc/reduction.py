"""Cluster-average dimensionality reduction and word-similarity evaluation."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .graph import ClusterAssignment, build_graph, maximum_spanning_tree, spectral_clustering


@dataclass(frozen=True)
class SimilarityDataset:
    name: str
    pairs: tuple  # (word_a, word_b, gold)

    def __post_init__(self):
        seen = set()
        for a, b, g in self.pairs:
            key = frozenset((a, b))
            if key in seen:
                raise DataError(f"{self.name}: duplicate pair ({a}, {b})")
            seen.add(key)
            if not math.isfinite(g):
                raise DataError(f"{self.name}: non-finite gold score for ({a}, {b})")


@dataclass(frozen=True)
class ReducedEmbedding:
    vectors: np.ndarray
    clusters: ClusterAssignment


@dataclass(frozen=True)
class SimilarityResult:
    rho: float
    used: int
    skipped: int


def load_similarity(path, name=None):
    """Read 'word_a word_b score' lines (tab or space separated). A first line
    whose score field is not numeric is treated as a header."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
            try:
                score = float(parts[2])
            except ValueError:
                if not pairs and lineno == 1:
                    continue
                raise DataError(f"{path}:{lineno}: bad score {parts[2]!r}") from None
            pairs.append((parts[0], parts[1], score))
    return SimilarityDataset(name or str(path), tuple(pairs))


def _check_assignment(a, d):
    if set(a.labels) != set(range(d)):
        raise DataError("cluster assignment must cover every source axis exactly once")
    sizes = np.bincount(np.array([a.labels[v] for v in range(d)]), minlength=a.k)
    if sizes.size != a.k or np.any(sizes == 0):
        raise DataError("empty cluster in assignment")
    return sizes


def cluster_average_reduce(s, a):
    s = np.asarray(s, dtype=np.float64)
    d = s.shape[1]
    sizes = _check_assignment(a, d)
    member = np.zeros((d, a.k))
    for axis, c in a.labels.items():
        member[axis, c] = 1.0
    return ReducedEmbedding(s @ (member / sizes), a)


def random_clustering(d, k, seed=0):
    if not 1 <= k <= d:
        raise DataError(f"cluster count {k} must be between 1 and {d}")
    perm = np.random.default_rng(seed).permutation(d)
    labels = {int(axis): t % k for t, axis in enumerate(perm)}
    return ClusterAssignment(labels, k)


def identity_clustering(d):
    return ClusterAssignment({v: v for v in range(d)}, d)


def spearman(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise DataError("need at least 2 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DataError("constant input: correlation undefined")
    rx = rankdata(x) - (x.size + 1) / 2.0
    ry = rankdata(y) - (y.size + 1) / 2.0
    r = (rx @ ry) / math.sqrt((rx @ rx) * (ry @ ry))
    return float(min(1.0, max(-1.0, r)))


def evaluate_similarity(vectors, vocab, ds):
    vectors = np.asarray(vectors, dtype=np.float64)
    index = vocab if isinstance(vocab, dict) else {w: i for i, w in enumerate(vocab)}
    gold, pred = [], []
    skipped = 0
    for a, b, g in ds.pairs:
        ia, ib = index.get(a), index.get(b)
        if ia is None or ib is None:
            skipped += 1
            continue
        va, vb = vectors[ia], vectors[ib]
        denom = np.linalg.norm(va) * np.linalg.norm(vb)
        pred.append(float(va @ vb / denom) if denom > 0 else 0.0)
        gold.append(g)
    if len(gold) < 2:
        raise DataError(f"{ds.name}: fewer than 2 in-vocabulary pairs")
    return SimilarityResult(spearman(pred, gold), len(gold), skipped)


def _mean_rho(vectors, vocab, datasets):
    return float(np.mean([evaluate_similarity(vectors, vocab, ds).rho for ds in datasets]))


def run_reduction_benchmark(s, hoc, sigma, dims, seeds, vocab, datasets, label="ICA"):
    """Mean Spearman rho (over datasets, then seeds) for random clustering and
    spectral clustering of the full-graph maximum spanning tree, per target
    dimension.

    Returns a list of row dicts: method, k, rho.
    """
    s = np.asarray(s, dtype=np.float64)
    d = s.shape[1]
    dims = [int(k) for k in dims]
    if any(not 1 <= k <= d for k in dims):
        raise DataError(f"target dimensions must lie in 1..{d}")
    seeds = list(seeds)
    if not seeds:
        raise DataError("need at least one seed")
    index = {w: i for i, w in enumerate(vocab)}
    nodes = list(sigma) if sigma is not None else list(range(d))
    if sorted(nodes) != list(range(d)):
        raise DataError("sigma must be a permutation of all axes")
    tree = maximum_spanning_tree(build_graph(hoc, nodes))

    rows = [{"method": f"Full ({label})", "k": d,
             "rho": _mean_rho(s, index, datasets)}]
    for k in dims:
        rnd = [_mean_rho(cluster_average_reduce(s, random_clustering(d, k, sd)).vectors,
                         index, datasets) for sd in seeds]
        spc = [_mean_rho(cluster_average_reduce(s, spectral_clustering(tree, k, sd)).vectors,
                         index, datasets) for sd in seeds]
        rows.append({"method": f"Random Clustering on components ({label})", "k": k,
                     "rho": float(np.mean(rnd))})
        rows.append({"method": f"Spectral Clustering on MST ({label})", "k": k,
                     "rho": float(np.mean(spc))})
    return rows
