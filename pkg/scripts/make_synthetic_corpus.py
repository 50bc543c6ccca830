"""Regenerate the bundled 500-word synthetic corpus in src/icahoc/data/."""

import argparse
import os

from icahoc.store import save_word2vec_text
from icahoc.synthetic import synthetic_corpus

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_OUT = os.path.join(HERE, "..", "src", "icahoc", "data")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=DEFAULT_OUT)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    m, ds, clusters = synthetic_corpus(n=500, n_groups=10, per_group=2, seed=args.seed)
    stem = os.path.join(args.out, "synthetic_500")
    save_word2vec_text(m, stem + ".vec")
    with open(stem + ".freq.tsv", "w", encoding="utf-8") as fh:
        for w in m.vocab:
            fh.write(f"{w}\t{m.freq[w]}\n")
    with open(stem + ".sim.tsv", "w", encoding="utf-8") as fh:
        fh.write("word1\tword2\tscore\n")
        for a, b, g in ds.pairs:
            fh.write(f"{a}\t{b}\t{g:.6f}\n")
    with open(stem + ".clusters.tsv", "w", encoding="utf-8") as fh:
        for w in m.vocab:
            fh.write(f"{w}\t{clusters[w]}\n")
    print(f"wrote {stem}.*")


if __name__ == "__main__":
    main()
