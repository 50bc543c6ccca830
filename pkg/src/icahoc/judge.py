"""Pairwise semantic-relatedness trials for component pairs, a text-in/text-out
judge interface, JSON-lines exchange files and result aggregation."""

import json
import logging
import math
import warnings
import zlib
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError
from .hoc import top_word_indices

log = logging.getLogger(__name__)

PROMPT_TEMPLATE = """Question:
  You are given 2 list pairs (A, B), (C, D).
  If one pair is more semantically relevant than the other, answer the pair.
  If you cannot determine, answer "XX".

{first_line}
{second_line}

Output:
  "AB" if (A, B) is more semantically related
  "CD" if (C, D) is more semantically related
  "XX" if equally related, or you can't decide
Respond with only AB, CD, or XX."""

AB, CD, XX = "AB", "CD", "XX"
PARSE_FAILURE = "parse-failure"
HIGH, LOW, UNDECIDED = "high-pair", "low-pair", "undecided"


@dataclass(frozen=True)
class JudgeTrial:
    trial_id: str
    component: int
    k: int
    high_component: int
    low_component: int
    wordlist_1: tuple
    wordlist_2: tuple  # from the k-th most correlated component
    wordlist_3: tuple  # from a bottom-30% component
    ab_list: int       # which list (2 or 3) is shown as pair (A, B)
    ab_line_first: bool
    prompt: str
    seed: int

    @property
    def high_label(self):
        return AB if self.ab_list == 2 else CD

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, obj):
        obj = dict(obj)
        for key in ("wordlist_1", "wordlist_2", "wordlist_3"):
            obj[key] = tuple(obj[key])
        return cls(**obj)


@dataclass(frozen=True)
class JudgeVerdict:
    trial_id: str
    k: int
    raw: str
    parsed: str
    resolved: str


def format_list(words):
    return "[" + ", ".join(words) + "]"


def render_prompt(w1, w_ab, w_cd, ab_line_first=True):
    ab = f"List pair (A, B): ({format_list(w1)}, {format_list(w_ab)})"
    cd = f"List pair (C, D): ({format_list(w1)}, {format_list(w_cd)})"
    first, second = (ab, cd) if ab_line_first else (cd, ab)
    return PROMPT_TEMPLATE.format(first_line=first, second_line=second)


def correlation_ranking(hoc, i, by="deviation"):
    """Other axes sorted from most to least HOC-correlated with axis i."""
    values = np.asarray(getattr(hoc, "values", hoc))
    row = values[i]
    key = np.abs(row - 1.0) if by == "deviation" else row
    others = [j for j in range(values.shape[0]) if j != i]
    return sorted(others, key=lambda j: (-key[j], j))


def build_trials(s, vocab, counts, hoc, ks=(1, 2, 3, 4, 5), seed=0, n_components=100,
                 list_size=5, min_freq=100, low_fraction=0.3, rank_by="deviation"):
    s = np.asarray(s)
    d = s.shape[1]
    if d < n_components:
        warnings.warn(f"only {d} components available; using all of them")
        n_components = d
    if max(ks) > d - 1:
        raise DataError(f"k={max(ks)} exceeds the {d - 1} other components")

    tops = {}

    def top(axis):
        if axis not in tops:
            idx = top_word_indices(s, counts, axis, list_size, min_freq)
            if idx.size < list_size:
                raise DataError(
                    f"axis {axis}: fewer than {list_size} words with freq >= {min_freq}")
            tops[axis] = [vocab[t] for t in idx]
        return tops[axis]

    trials = []
    for i in range(n_components):
        ranking = correlation_ranking(hoc, i, rank_by)
        n_low = max(1, math.ceil(low_fraction * len(ranking)))
        low_pool = ranking[-n_low:]
        for k in ks:
            rng = np.random.default_rng([seed, i, k])
            hi = ranking[k - 1]
            lo = int(low_pool[rng.integers(len(low_pool))])
            w1, w2, w3 = ([str(w) for w in rng.permutation(top(a))] for a in (i, hi, lo))
            for variant, ab_list in (("a", 2), ("b", 3)):
                first = bool(rng.integers(2))
                w_ab, w_cd = (w2, w3) if ab_list == 2 else (w3, w2)
                trials.append(JudgeTrial(
                    trial_id=f"c{i:03d}-k{k}-{variant}", component=i, k=k,
                    high_component=hi, low_component=lo,
                    wordlist_1=tuple(w1), wordlist_2=tuple(w2), wordlist_3=tuple(w3),
                    ab_list=ab_list, ab_line_first=first,
                    prompt=render_prompt(w1, w_ab, w_cd, first), seed=seed))
    return trials


def parse_response(text):
    t = (text or "").strip().upper()
    return t if t in (AB, CD, XX) else PARSE_FAILURE


def resolve(trial, parsed):
    if parsed == trial.high_label:
        return HIGH
    if parsed in (AB, CD):
        return LOW
    return UNDECIDED


def verdict(trial, raw):
    parsed = parse_response(raw)
    return JudgeVerdict(trial.trial_id, trial.k, raw, parsed, resolve(trial, parsed))


def aggregate(verdicts, ks=None):
    """Percent high-pair / low-pair / undecided per k."""
    by_k = {}
    for v in verdicts:
        by_k.setdefault(v.k, []).append(v.resolved)
    for k in ks or ():
        if k not in by_k:
            raise DataError(f"no verdicts for k={k}")
    table = {}
    for k in sorted(by_k):
        res = by_k[k]
        n = len(res)
        table[k] = {key: 100.0 * sum(r == key for r in res) / n for key in (HIGH, LOW, UNDECIDED)}
    return table


def mock_judge(trial, clusters):
    """Answer the pair whose lists share more cluster ids; ties give XX."""
    def overlap(a, b):
        return len({clusters[w] for w in a} & {clusters[w] for w in b})

    shown = {2: trial.wordlist_2, 3: trial.wordlist_3}
    ab = overlap(trial.wordlist_1, shown[trial.ab_list])
    cd = overlap(trial.wordlist_1, shown[5 - trial.ab_list])
    if ab > cd:
        return AB
    if cd > ab:
        return CD
    return XX


def coin_flip_judge(trial):
    """Deterministic pseudo-random answer keyed on the trial id."""
    r = zlib.crc32(trial.trial_id.encode("utf-8")) % 3
    return (AB, CD, XX)[r]


def dispatch(trials, judge, max_workers=4, timeout=60.0, retries=2):
    """Send each prompt through `judge` (a str -> str callable) with bounded
    concurrency. Results are keyed by trial id, never by arrival order."""
    def call(trial):
        for attempt in range(retries + 1):
            try:
                return judge(trial.prompt)
            except Exception as e:  # judge backends fail in arbitrary ways
                log.warning("judge call for %s failed (attempt %d): %s",
                            trial.trial_id, attempt + 1, e)
        return ""

    raw = {}
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {t.trial_id: pool.submit(call, t) for t in trials}
        for tid, fut in futures.items():
            try:
                raw[tid] = fut.result(timeout=timeout)
            except FutureTimeout:
                log.warning("judge call for %s timed out", tid)
                raw[tid] = ""
    return [verdict(t, raw[t.trial_id]) for t in trials]


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_requests(path, trials):
    write_jsonl(path, ({"trial_id": t.trial_id, "prompt": t.prompt} for t in trials))


def read_responses(path, trials):
    """Match response texts to trials by id; missing responses count as
    parse failures."""
    texts = {}
    for row in read_jsonl(path):
        if "trial_id" not in row or "text" not in row:
            raise DataError(f"response row missing trial_id/text: {row}")
        texts[row["trial_id"]] = row["text"]
    unknown = set(texts) - {t.trial_id for t in trials}
    if unknown:
        raise DataError(f"responses for unknown trial ids, e.g. {sorted(unknown)[0]}")
    return [verdict(t, texts.get(t.trial_id, "")) for t in trials]
