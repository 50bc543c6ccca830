"""Complete HOC-weighted graphs over components, their maximum spanning trees,
and spectral partitions of those trees."""

from collections import deque
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .errors import DataError


@dataclass(frozen=True)
class ComponentGraph:
    nodes: tuple
    weights: np.ndarray  # (m, m) aligned with `nodes`

    def edges(self):
        m = len(self.nodes)
        return [(self.nodes[a], self.nodes[b], float(self.weights[a, b]))
                for a in range(m) for b in range(a + 1, m)]


@dataclass(frozen=True)
class SpanningTree:
    nodes: tuple
    edges: tuple  # (i, j, weight) with i < j

    @property
    def total_weight(self):
        return float(sum(w for _, _, w in self.edges))

    def edge_set(self):
        return {(i, j) for i, j, _ in self.edges}

    def adjacency(self):
        adj = {v: [] for v in self.nodes}
        for i, j, w in self.edges:
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj

    def validate(self):
        if len(self.edges) != len(self.nodes) - 1:
            raise DataError(f"tree has {len(self.edges)} edges for {len(self.nodes)} nodes")
        uf = UnionFind(self.nodes)
        for i, j, _ in self.edges:
            if not uf.union(i, j):
                raise DataError(f"cycle through edge ({i}, {j})")
        return self


@dataclass(frozen=True)
class ClusterAssignment:
    labels: dict  # node -> cluster id
    k: int

    def groups(self):
        out = [[] for _ in range(self.k)]
        for node in sorted(self.labels):
            out[self.labels[node]].append(node)
        return out


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def build_graph(h, nodes=None):
    values = np.asarray(getattr(h, "values", h), dtype=np.float64)
    d = values.shape[0]
    nodes = tuple(range(d)) if nodes is None else tuple(int(v) for v in nodes)
    if len(set(nodes)) != len(nodes):
        raise DataError("duplicate node in graph node list")
    bad = [v for v in nodes if not 0 <= v < d]
    if bad:
        raise DataError(f"node {bad[0]} out of range for {d} components")
    if len(nodes) < 2:
        raise DataError("graph needs at least 2 nodes")
    idx = np.array(nodes)
    return ComponentGraph(nodes, values[np.ix_(idx, idx)].copy())


def kruskal(nodes, edges, maximize=True):
    """Spanning tree by Kruskal; equal weights resolved by ascending (i, j)."""
    nodes = tuple(nodes)
    if not nodes:
        raise DataError("cannot span an empty node set")
    edges = [(min(i, j), max(i, j), w) for i, j, w in edges]
    sign = -1.0 if maximize else 1.0
    edges.sort(key=lambda e: (sign * e[2], e[0], e[1]))
    uf = UnionFind(nodes)
    picked = []
    for i, j, w in edges:
        if uf.union(i, j):
            picked.append((i, j, w))
            if len(picked) == len(nodes) - 1:
                break
    if len(picked) != len(nodes) - 1:
        raise DataError("graph is not connected")
    return SpanningTree(nodes, tuple(picked))


def maximum_spanning_tree(g):
    return kruskal(g.nodes, g.edges(), maximize=True)


def minimum_spanning_tree(g):
    return kruskal(g.nodes, g.edges(), maximize=False)


def tree_affinity(t):
    pos = {v: a for a, v in enumerate(t.nodes)}
    w = np.zeros((len(t.nodes), len(t.nodes)))
    for i, j, wt in t.edges:
        w[pos[i], pos[j]] = w[pos[j], pos[i]] = wt
    return w


def spectral_embedding(w, k):
    """Rows of the k smallest eigenvectors of I - D^-1/2 W D^-1/2, scaled to
    unit length."""
    deg = w.sum(axis=1)
    if np.any(deg <= 0):
        raise DataError("isolated node with zero degree")
    inv = 1.0 / np.sqrt(deg)
    lap = np.eye(len(w)) - inv[:, None] * w * inv[None, :]
    _, vecs = np.linalg.eigh(lap)
    u = vecs[:, :k]
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def _relabel(labels):
    """Renumber cluster ids by first appearance so outputs do not depend on
    k-means label order."""
    mapping = {}
    return [mapping.setdefault(c, len(mapping)) for c in labels]


def spectral_clustering(t, k, seed=0, n_init=10):
    m = len(t.nodes)
    if not 1 <= k <= m:
        raise DataError(f"cluster count {k} must be between 1 and {m}")
    if k == 1:
        return ClusterAssignment({v: 0 for v in t.nodes}, 1)
    emb = spectral_embedding(tree_affinity(t), k)
    km = KMeans(n_clusters=k, n_init=n_init, random_state=seed).fit(emb)
    labels = _relabel(km.labels_.tolist())
    return ClusterAssignment(dict(zip(t.nodes, labels)), len(set(labels)))


def subtree_extract(t, root, radius):
    if root not in t.nodes:
        raise DataError(f"root {root} is not in the tree")
    adj = t.adjacency()
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        if dist[v] == radius:
            continue
        for u, _ in adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    keep = set(dist)
    nodes = tuple(v for v in t.nodes if v in keep)
    edges = tuple(e for e in t.edges if e[0] in keep and e[1] in keep)
    return SpanningTree(nodes, edges)


EDGE_COLORS = ("#d9d9d9", "#bdbdbd", "#969696", "#636363", "#252525")


def weight_buckets(weights, n_buckets=5):
    """Equal-frequency bucket index per weight plus the thresholds used."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.size == 0:
        return np.zeros(0, dtype=int), np.zeros(0)
    cuts = np.quantile(weights, np.arange(1, n_buckets) / n_buckets)
    return np.searchsorted(cuts, weights, side="right"), cuts


def to_dot(t, labels=None, clusters=None, header=()):
    labels = labels or {}
    buckets, cuts = weight_buckets([w for _, _, w in t.edges], len(EDGE_COLORS))
    lines = [f"// {h}" for h in header]
    lines.append("// edge color buckets (equal-frequency) cut points: "
                 + ", ".join(f"{c:.6f}" for c in cuts))
    lines.append("graph mst {")
    for v in t.nodes:
        text = str(labels.get(v, v)).replace('"', '\\"')
        attrs = f'label="{text}"'
        if clusters is not None:
            attrs += f', group="c{clusters.labels[v]}"'
        lines.append(f"  n{v} [{attrs}];")
    for (i, j, w), b in zip(t.edges, buckets):
        lines.append(f'  n{i} -- n{j} [label="{w:.4f}", color="{EDGE_COLORS[b]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
