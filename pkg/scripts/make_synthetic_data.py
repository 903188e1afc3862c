#!/usr/bin/env python3
"""Write synthetic corpus files for offline CLI runs.

Produces a labeled TSV, an unlabeled pool, a frozen parse fixture, and a
matching embedding file under --out, plus benchmark-shaped stats fixtures
(hotel.tsv / electronics.tsv with the reference class counts).
"""

import argparse

from sugmine import synth


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/synthetic", help="output directory")
    parser.add_argument("--labeled", type=int, default=2000)
    parser.add_argument("--unlabeled", type=int, default=5000)
    parser.add_argument("--positive-fraction", type=float, default=0.1)
    parser.add_argument("--embedding-dim", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    corpus = synth.make_corpus(
        n_labeled=args.labeled,
        n_unlabeled=args.unlabeled,
        positive_fraction=args.positive_fraction,
        seed=args.seed,
        embedding_dim=args.embedding_dim,
    )
    paths = synth.write_corpus_files(corpus, args.out)
    stats_paths = synth.write_benchmark_stats_fixtures(args.out, seed=args.seed)
    for name, path in {**paths, **stats_paths}.items():
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
