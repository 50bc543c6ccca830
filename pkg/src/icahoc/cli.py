"""Command-line pipeline: ingest -> whiten -> ica -> hoc -> analyses/exports.

Each subcommand reads upstream artifacts from the cache directory and writes
plot-ready CSV/TSV/DOT/JSON into the output directory. Exit codes: 0 success,
1 usage, 2 data error (including missing upstream artifacts), 3 numeric
failure.
"""

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import warnings
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .errors import DataError, NumericError
from .fastica import IcaConfig, fit_ica
from .graph import (SpanningTree, build_graph, maximum_spanning_tree, spectral_clustering,
                    subtree_extract, to_dot)
from .hoc import (HocMatrix, contributions, frequency_correlation, hoc_histogram, hoc_matrix,
                  ranked_pairs, top_contributors, top_word_indices)
from .intrusion import score_all, sigma_order
from .judge import (HIGH, LOW, UNDECIDED, JudgeTrial, aggregate, build_trials, mock_judge,
                    read_jsonl, read_responses, write_jsonl, write_requests)
from .reduction import evaluate_similarity, load_similarity, run_reduction_benchmark
from .store import (load_arrays, load_cache, load_frequencies, load_word2vec_text,
                    row_normalize, save_arrays, save_cache, with_frequencies)
from .whitening import WhiteningModel, apply_whitening, fit_whitening, pca_view

log = logging.getLogger("icahoc")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3

PATH_KEYS = {"embeddings", "frequencies", "similarity", "cache", "out", "responses",
             "mock_clusters", "config"}


@dataclass
class PipelineConfig:
    embeddings: str = None
    frequencies: str = None
    similarity: str = None           # comma-separated dataset files
    cache: str = "cache"
    out: str = "out"
    strict: bool = False
    seed: int = 0
    whiten_k: int = None
    whiten_eps: float = 1e-10
    ica_nonlinearity: str = "logcosh"
    ica_max_iter: int = 200
    ica_tol: float = 1e-4
    ica_seed: int = None
    top_k: int = 10
    min_freq: int = 100
    pairs_top: int = 50
    pair: str = None                 # "i,j"
    contributors_k: int = 20
    log_freq: bool = False
    hist_bins: int = 50
    hist_range: str = None           # "lo,hi"
    hist_include_diag: bool = False
    intrusion_k: int = 5
    intrusion_L: int = 100
    intrusion_seed: int = None
    intrusion_normalized: bool = False
    pool_min_freq: int = None
    graph_nodes: int = None
    clusters: int = 10
    cluster_seed: int = None
    root: int = None
    radius: int = 2
    dims: str = "2,5,10,20,50,100"
    bench_seeds: str = "0,1,2,3,4,5,6,7,8,9"
    judge_ks: str = "1,2,3,4,5"
    judge_seed: int = None
    judge_components: int = 100
    judge_min_freq: int = 100
    responses: str = None
    mock_clusters: str = None
    heatmap_axes: int = 20
    heatmap_top: int = 4
    axes: str = None                 # "i,j" for scatter export
    variant: str = "ica"

    def resolved_seed(self, name):
        v = getattr(self, name)
        return self.seed if v is None else v

    def seeds(self):
        return {k: self.resolved_seed(k) for k in
                ("ica_seed", "intrusion_seed", "cluster_seed", "judge_seed")}

    def digest(self):
        payload = {f.name: getattr(self, f.name) for f in fields(self)
                   if f.name not in PATH_KEYS}
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _field_types():
    hints = {"embeddings": str, "frequencies": str, "similarity": str, "cache": str,
             "out": str, "pair": str, "hist_range": str, "responses": str,
             "mock_clusters": str, "axes": str, "dims": str, "bench_seeds": str,
             "judge_ks": str, "ica_nonlinearity": str, "variant": str}
    out = {}
    for f in fields(PipelineConfig):
        if f.name in hints:
            out[f.name] = str
        elif isinstance(f.default, bool):
            out[f.name] = bool
        elif isinstance(f.default, float):
            out[f.name] = float
        else:
            out[f.name] = int
    return out


FIELD_TYPES = _field_types()


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(key, raw):
    typ = FIELD_TYPES[key]
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("none", "")):
        return None
    if typ is bool:
        return raw if isinstance(raw, bool) else _parse_bool(raw)
    if typ is str and isinstance(raw, str):
        return raw.strip().strip('"').strip("'")
    return typ(raw)


def read_config_file(path):
    """Flat 'key = value' lines; '#' starts a comment; [sections] ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line or (line.startswith("[") and line.endswith("]")):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in FIELD_TYPES:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = _convert(key, value)
    return out


def _ints(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


# --- artifact plumbing -------------------------------------------------------

PRODUCERS = {
    "embeddings.bin": "ingest",
    "whitening.bin": "whiten",
    "ica.bin": "ica",
    "hoc.bin": "hoc",
    "intrusion.bin": "intrusion",
    "mst.bin": "mst",
    "judge_trials.jsonl": "judge-build",
}


class Context:
    def __init__(self, cfg, command):
        self.cfg = cfg
        self.command = command
        os.makedirs(cfg.cache, exist_ok=True)
        os.makedirs(cfg.out, exist_ok=True)

    def cache_path(self, name):
        return os.path.join(self.cfg.cache, name)

    def out_path(self, name):
        return os.path.join(self.cfg.out, name)

    def require(self, name):
        path = self.cache_path(name)
        if not os.path.exists(path):
            raise DataError(f"missing {name}: run '{PRODUCERS[name]}' first")
        return path

    def header_lines(self, content, extra=()):
        seeds = ",".join(f"{k}={v}" for k, v in sorted(self.cfg.seeds().items()))
        lines = [f"icahoc {__version__} command={self.command} config={self.cfg.digest()}",
                 f"seeds: {seeds}",
                 f"content: {content}"]
        return lines + list(extra)

    def write_table(self, name, content, columns, rows, sep=",", extra=()):
        path = self.out_path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in self.header_lines(content, extra):
                fh.write(f"# {line}\n")
            fh.write(sep.join(columns) + "\n")
            for row in rows:
                fh.write(sep.join(_fmt(v) for v in row) + "\n")
        log.info("wrote %s", path)
        return path

    def write_text(self, name, text):
        path = self.out_path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        log.info("wrote %s", path)
        return path

    def write_json(self, name, content, payload):
        payload = {"provenance": self.header_lines(content), **payload}
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    # loaders
    def embeddings(self):
        return load_cache(self.require("embeddings.bin"))

    def whitening(self):
        arrays, _ = load_arrays(self.require("whitening.bin"))
        return WhiteningModel(arrays["mean"], arrays["map"], arrays["eigenvalues"],
                              arrays["directions"])

    def ica(self):
        return load_arrays(self.require("ica.bin"))

    def components(self):
        return self.ica()[0]["components"]

    def hoc(self):
        arrays, _ = load_arrays(self.require("hoc.bin"))
        return HocMatrix(arrays["values"])

    def sigma(self):
        arrays, _ = load_arrays(self.require("intrusion.bin"))
        return arrays["sigma"]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


# --- subcommands -------------------------------------------------------------

def cmd_ingest(ctx):
    cfg = ctx.cfg
    if not cfg.embeddings:
        raise DataError("--embeddings is required for ingest")
    m = load_word2vec_text(cfg.embeddings)
    if cfg.frequencies:
        m = with_frequencies(m, load_frequencies(cfg.frequencies), strict=cfg.strict)
    elif cfg.strict:
        raise DataError("strict mode needs --frequencies")
    save_cache(m, ctx.cache_path("embeddings.bin"))
    print(f"ingested {m.n} words x {m.d} dims")


def cmd_whiten(ctx):
    m = ctx.embeddings()
    model = fit_whitening(m, k=ctx.cfg.whiten_k, eps=ctx.cfg.whiten_eps)
    save_arrays(ctx.cache_path("whitening.bin"),
                {"mean": model.mean, "map": model.map, "eigenvalues": model.eigenvalues,
                 "directions": model.directions},
                {"k": model.k, "eps": ctx.cfg.whiten_eps})
    ctx.write_table("pca_eigenvalues.csv", "PCA variances per axis",
                    ["axis", "eigenvalue"], enumerate(model.eigenvalues))
    print(f"whitened to k={model.k}")


def cmd_ica(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    z = apply_whitening(ctx.whitening(), m)
    icfg = IcaConfig(cfg.ica_nonlinearity, 1.0, cfg.ica_max_iter, cfg.ica_tol,
                     cfg.resolved_seed("ica_seed"))
    res = fit_ica(z, icfg)
    save_arrays(ctx.cache_path("ica.bin"),
                {"rotation": res.display_rotation(), "components": res.display_components(),
                 "skewness": res.skewness[res.order], "order": res.order,
                 "signs": res.signs[res.order]},
                {"iterations": res.iterations, "converged": res.converged,
                 "config": dataclasses.asdict(icfg)})
    ctx.write_table("ica_skewness.csv", "ICA axes sorted by skewness",
                    ["axis", "skewness"], enumerate(res.skewness[res.order]),
                    extra=[f"iterations={res.iterations} converged={res.converged}"])
    print(f"ica: {res.iterations} iterations, converged={res.converged}")


def _top_lists(s, m, k, min_freq):
    counts = m.counts()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [[m.vocab[t] for t in top_word_indices(s, counts, a, k, min_freq)]
                for a in range(s.shape[1])]


def cmd_hoc(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    s = ctx.components()
    h = hoc_matrix(s)
    save_arrays(ctx.cache_path("hoc.bin"), {"values": h.values})
    d = h.d
    ctx.write_table("hoc_matrix.csv", "HOC matrix (unclamped, diagonal = E(S_i^4))",
                    ["axis"] + [str(j) for j in range(d)],
                    ([i] + list(h.values[i]) for i in range(d)))
    tops = _top_lists(s, m, 5, cfg.min_freq)
    pairs = ranked_pairs(h)[:cfg.pairs_top]
    rows = []
    for rank, (i, j) in enumerate(pairs):
        rows.append(["high", rank, i, j, h.values[i, j], " ".join(tops[i]), " ".join(tops[j])])
        # low partner for axis i: smallest |E - 1|
        dev = np.abs(h.values[i] - 1.0)
        dev[i] = np.inf
        lo = int(np.argmin(dev))
        rows.append(["low", rank, i, lo, h.values[i, lo], " ".join(tops[i]), " ".join(tops[lo])])
    ctx.write_table("hoc_pairs.tsv", "axis pairs ranked by |E-1|",
                    ["kind", "rank", "axis_i", "axis_j", "hoc", "top_words_i", "top_words_j"],
                    rows, sep="\t", extra=[f"top words: k=5 min_freq={cfg.min_freq}"])
    off = h.values[np.triu_indices(d, 1)]
    print(f"hoc: d={d}, off-diagonal range [{off.min():.4f}, {off.max():.4f}]" if d > 1
          else f"hoc: d={d}")


def cmd_top_words(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    arrays, _ = ctx.ica()
    s = arrays["components"]
    tops = _top_lists(s, m, cfg.top_k, cfg.min_freq)
    rows = [[a, arrays["skewness"][a], " ".join(w)] for a, w in enumerate(tops)]
    ctx.write_table("top_words.tsv", "top words per axis",
                    ["axis", "skewness", "top_words"], rows, sep="\t",
                    extra=[f"k={cfg.top_k} min_freq={cfg.min_freq}"])


def _pair(text, d, flag):
    if not text:
        raise DataError(f"--{flag} i,j is required")
    vals = _ints(text)
    if len(vals) != 2:
        raise DataError(f"--{flag} expects two comma-separated axes")
    for v in vals:
        if not 0 <= v < d:
            raise DataError(f"axis {v} out of range for {d} components")
    return vals


def cmd_contributors(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    s = ctx.components()
    i, j = _pair(cfg.pair, s.shape[1], "pair")
    cl = top_contributors(s, m.vocab, i, j, cfg.contributors_k)
    value = float(contributions(s, i, j).mean())
    rows = [[r, w, s[m.index()[w], i], s[m.index()[w], j], c]
            for r, (w, c) in enumerate(cl.entries)]
    ctx.write_table(f"contributors_{i}_{j}.tsv", "words contributing most to a pair HOC",
                    ["rank", "word", f"s_{i}", f"s_{j}", "contribution"], rows, sep="\t",
                    extra=[f"E(S_{i}^2 S_{j}^2)={value:.10g}"])


def cmd_freq_corr(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    s = ctx.components()
    r, degenerate = frequency_correlation(s, m.counts(), log=cfg.log_freq)
    ctx.write_table("freq_corr.csv", "correlation of axis values with word frequency",
                    ["axis", "pearson_r", "degenerate"], zip(range(len(r)), r, degenerate),
                    extra=[f"frequency scale: {'log1p(count)' if cfg.log_freq else 'raw count'}"])


def cmd_hoc_hist(ctx):
    cfg = ctx.cfg
    h = ctx.hoc()
    rng = tuple(float(v) for v in cfg.hist_range.split(",")) if cfg.hist_range else None
    counts, edges = hoc_histogram(h, cfg.hist_include_diag, cfg.hist_bins, rng)
    ctx.write_table("hoc_hist.csv", "HOC value histogram",
                    ["bin_lo", "bin_hi", "count"], zip(edges[:-1], edges[1:], counts),
                    extra=[f"include_diag={cfg.hist_include_diag} clamped to end bins"])


def cmd_intrusion(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    s = ctx.components()
    scores = score_all(s, m.vocab, m.counts(), seed=cfg.resolved_seed("intrusion_seed"),
                       k=cfg.intrusion_k, L=cfg.intrusion_L, min_freq=cfg.min_freq,
                       normalize=cfg.intrusion_normalized, pool_min_freq=cfg.pool_min_freq)
    sigma = sigma_order(scores)
    save_arrays(ctx.cache_path("intrusion.bin"),
                {"scores": np.array([c.score for c in scores]), "sigma": sigma})
    rows = [[c.axis, c.score, c.intra, c.inter, " ".join(c.top_words)] for c in scores]
    ctx.write_table("intrusion.tsv", "word-intrusion consistency per axis",
                    ["axis", "score", "intra", "inter", "top_words"], rows, sep="\t",
                    extra=[f"k={cfg.intrusion_k} L={cfg.intrusion_L} min_freq={cfg.min_freq} "
                           f"distances on {'norm-1' if cfg.intrusion_normalized else 'unnormalized'} components"])
    ctx.write_table("sigma.csv", "sigma: consistency rank -> skewness axis",
                    ["rank", "axis", "score"], ((j, a, scores[a].score) for j, a in enumerate(sigma)))


def _tree_from_arrays(arrays):
    e = arrays["edges"]
    w = arrays["weights"]
    return SpanningTree(tuple(int(v) for v in arrays["nodes"]),
                        tuple((int(i), int(j), float(x)) for (i, j), x in zip(e, w)))


def _labels(ctx, nodes):
    m = ctx.embeddings()
    s = ctx.components()
    tops = _top_lists(s, m, 1, ctx.cfg.min_freq)
    return {v: f"{v} : {tops[v][0] if tops[v] else '?'}" for v in nodes}


def cmd_mst(ctx):
    cfg = ctx.cfg
    h = ctx.hoc()
    if cfg.graph_nodes:
        nodes = [int(v) for v in ctx.sigma()[:cfg.graph_nodes]]
    else:
        nodes = list(range(h.d))
    tree = maximum_spanning_tree(build_graph(h, nodes)).validate()
    save_arrays(ctx.cache_path("mst.bin"),
                {"nodes": np.array(tree.nodes),
                 "edges": np.array([(i, j) for i, j, _ in tree.edges]).reshape(-1, 2),
                 "weights": np.array([w for _, _, w in tree.edges])})
    ctx.write_table("mst_edges.csv", "maximum spanning tree edges (weights = E(S_i^2 S_j^2))",
                    ["i", "j", "weight"], tree.edges,
                    extra=[f"nodes={len(tree.nodes)} total_weight={tree.total_weight:.10g}"])
    ctx.write_text("mst.dot", to_dot(tree, _labels(ctx, tree.nodes),
                                     header=ctx.header_lines("maximum spanning tree")))


def cmd_cluster(ctx):
    cfg = ctx.cfg
    arrays, _ = load_arrays(ctx.require("mst.bin"))
    tree = _tree_from_arrays(arrays)
    ca = spectral_clustering(tree, cfg.clusters, seed=cfg.resolved_seed("cluster_seed"))
    ctx.write_json("clusters.json", "spectral clusters of the spanning tree",
                   {"k": ca.k, "labels": {str(v): ca.labels[v] for v in tree.nodes},
                    "groups": ca.groups()})
    ctx.write_text("mst_clusters.dot", to_dot(tree, _labels(ctx, tree.nodes), ca,
                                              header=ctx.header_lines("clustered spanning tree")))


def cmd_subtree(ctx):
    cfg = ctx.cfg
    arrays, _ = load_arrays(ctx.require("mst.bin"))
    tree = _tree_from_arrays(arrays)
    root = tree.nodes[0] if cfg.root is None else cfg.root
    sub = subtree_extract(tree, root, cfg.radius)
    ctx.write_text(f"subtree_{root}_r{cfg.radius}.dot",
                   to_dot(sub, _labels(ctx, sub.nodes),
                          header=ctx.header_lines("spanning tree neighbourhood")))


def _datasets(cfg):
    if not cfg.similarity:
        raise DataError("--similarity is required (comma-separated dataset files)")
    return [load_similarity(p, name=os.path.splitext(os.path.basename(p))[0])
            for p in cfg.similarity.split(",") if p.strip()]


def cmd_reduce_bench(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    s = ctx.components()
    h = ctx.hoc()
    d = s.shape[1]
    dims = [k for k in _ints(cfg.dims) if 1 <= k <= d]
    seeds = _ints(cfg.bench_seeds)
    datasets = _datasets(cfg)
    sigma = np.arange(d)
    rows = run_reduction_benchmark(s, h, sigma, dims, seeds, m.vocab, datasets, "ICA")
    z = apply_whitening(ctx.whitening(), m)
    rows += run_reduction_benchmark(z, hoc_matrix(z), np.arange(z.shape[1]),
                                    [k for k in dims if k <= z.shape[1]], seeds, m.vocab,
                                    datasets, "PCA")
    methods = []
    for r in rows:
        if r["method"] not in methods:
            methods.append(r["method"])
    cell = {(r["method"], r["k"]): r["rho"] for r in rows}
    table = [[meth] + [cell.get((meth, k), "") for k in dims] for meth in methods
             if not meth.startswith("Full")]
    full = [r for r in rows if r["method"].startswith("Full")]
    ctx.write_table("reduction_benchmark.csv", "word similarity after reduction",
                    ["method"] + [f"d={k}" for k in dims], table,
                    extra=[f"datasets={','.join(ds.name for ds in datasets)} seeds={cfg.bench_seeds}"]
                    + [f"{r['method']} d={r['k']}: {r['rho']:.10g}" for r in full])


def cmd_eval_sim(ctx):
    m = ctx.embeddings()
    variants = {"raw": m.vectors}
    if os.path.exists(ctx.cache_path("ica.bin")):
        variants["ica"] = ctx.components()
    rows = []
    for ds in _datasets(ctx.cfg):
        for name, x in variants.items():
            r = evaluate_similarity(x, m.vocab, ds)
            rows.append([ds.name, name, r.rho, r.used, r.skipped])
    ctx.write_table("eval_sim.csv", "word similarity (spearman of cosine vs gold)",
                    ["dataset", "variant", "rho", "pairs_used", "pairs_skipped"], rows)


def cmd_judge_build(ctx):
    cfg = ctx.cfg
    m = ctx.embeddings()
    s = ctx.components()
    h = ctx.hoc()
    trials = build_trials(s, m.vocab, m.counts(), h, ks=_ints(cfg.judge_ks),
                          seed=cfg.resolved_seed("judge_seed"),
                          n_components=cfg.judge_components, min_freq=cfg.judge_min_freq)
    write_jsonl(ctx.cache_path("judge_trials.jsonl"), (t.to_json() for t in trials))
    write_requests(ctx.out_path("judge_requests.jsonl"), trials)
    ctx.write_json("judge_requests.meta.json", "judge requests",
                   {"trials": len(trials), "ks": _ints(cfg.judge_ks)})
    print(f"built {len(trials)} trials")


def _read_clusters(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip() and not line.startswith("#"):
                w, c = line.rstrip("\n").split("\t")
                out[w] = int(c)
    return out


def cmd_judge_aggregate(ctx):
    cfg = ctx.cfg
    trials = [JudgeTrial.from_json(o) for o in read_jsonl(ctx.require("judge_trials.jsonl"))]
    responses = cfg.responses
    if cfg.mock_clusters:
        clusters = _read_clusters(cfg.mock_clusters)
        responses = ctx.out_path("judge_responses_mock.jsonl")
        write_jsonl(responses, ({"trial_id": t.trial_id, "text": mock_judge(t, clusters)}
                                for t in trials))
    if not responses:
        raise DataError("--responses (or --mock-clusters) is required")
    verdicts = read_responses(responses, trials)
    table = aggregate(verdicts, ks=sorted({t.k for t in trials}))
    ks = sorted(table)
    labels = {HIGH: "List-2 (top-k)", LOW: "List-3 (bottom 30%)", UNDECIDED: "Can't decide"}
    rows = [[labels[key]] + [f"{table[k][key]:.1f}" for k in ks] for key in (HIGH, LOW, UNDECIDED)]
    ctx.write_table("judge_aggregate.csv", "judge verdict percentages per k",
                    ["row"] + [f"k={k}" for k in ks], rows)
    write_jsonl(ctx.out_path("judge_verdicts.jsonl"), (dataclasses.asdict(v) for v in verdicts))


def _variant_matrix(ctx, variant):
    m = ctx.embeddings()
    if variant == "ica":
        return m, ctx.components()
    if variant == "pca":
        return m, pca_view(ctx.whitening(), m)
    raise DataError(f"unknown variant {variant!r} (expected ica or pca)")


def cmd_export_heatmap(ctx):
    cfg = ctx.cfg
    for variant in ("ica", "pca"):
        try:
            m, x = _variant_matrix(ctx, variant)
        except DataError:
            if variant == "ica":
                raise
            continue
        xn = row_normalize(x)
        n_axes = min(cfg.heatmap_axes, x.shape[1])
        words = []
        for a in range(n_axes):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                for t in top_word_indices(x, m.counts(), a, cfg.heatmap_top, cfg.min_freq):
                    words.append((a, t))
        rows = [[a, m.vocab[t]] + list(xn[t, :n_axes]) for a, t in words]
        ctx.write_table(f"heatmap_{variant}.csv",
                        f"heatmap ({variant.upper()}, axes sorted by "
                        f"{'skewness' if variant == 'ica' else 'variance'})",
                        ["source_axis", "word"] + [f"axis_{a}" for a in range(n_axes)], rows,
                        extra=["values from norm-1 normalized embeddings",
                               f"top={cfg.heatmap_top} min_freq={cfg.min_freq}"])


def cmd_export_scatter(ctx):
    cfg = ctx.cfg
    m, x = _variant_matrix(ctx, cfg.variant)
    i, j = _pair(cfg.axes, x.shape[1], "axes")
    xn = row_normalize(x)
    contrib = x[:, i] ** 2 * x[:, j] ** 2
    rows = ([w, xn[t, i], xn[t, j], contrib[t]] for t, w in enumerate(m.vocab))
    ctx.write_table(f"scatter_{cfg.variant}_{i}_{j}.csv",
                    f"pair scatter ({cfg.variant.upper()})",
                    ["word", f"s_{i}", f"s_{j}", f"contribution_s{i}2_s{j}2"], rows,
                    extra=["coordinates from norm-1 normalized embeddings; "
                           "contribution from unnormalized components"])


COMMANDS = {
    "ingest": cmd_ingest,
    "whiten": cmd_whiten,
    "ica": cmd_ica,
    "hoc": cmd_hoc,
    "top-words": cmd_top_words,
    "contributors": cmd_contributors,
    "freq-corr": cmd_freq_corr,
    "hoc-hist": cmd_hoc_hist,
    "intrusion": cmd_intrusion,
    "mst": cmd_mst,
    "cluster": cmd_cluster,
    "subtree": cmd_subtree,
    "reduce-bench": cmd_reduce_bench,
    "eval-sim": cmd_eval_sim,
    "judge-build": cmd_judge_build,
    "judge-aggregate": cmd_judge_aggregate,
    "export-heatmap-data": cmd_export_heatmap,
    "export-scatter-data": cmd_export_scatter,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file (flags override it)")
    common.add_argument("-v", "--verbose", action="store_true")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        if FIELD_TYPES[f.name] is bool:
            common.add_argument(flag, dest=f.name, default=None, nargs="?", const="true")
        else:
            common.add_argument(flag, dest=f.name, default=None)
    parser = _Parser(prog="icahoc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"icahoc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def make_config(args):
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for f in fields(PipelineConfig):
        raw = getattr(args, f.name)
        if raw is not None:
            values[f.name] = _convert(f.name, raw)
    return PipelineConfig(**values)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        cfg = make_config(args)
    except ValueError as e:
        print(f"icahoc: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as e:
        print(f"icahoc: error: {e}", file=sys.stderr)
        return EXIT_DATA
    try:
        COMMANDS[args.command](Context(cfg, args.command))
    except (DataError, IndexError, FileNotFoundError) as e:
        print(f"icahoc {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"icahoc {args.command}: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
