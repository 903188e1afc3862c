#!/usr/bin/env python3
"""Benchmark protocol on the real review datasets (requires external inputs).

Expects a directory with:
    hotel.tsv                 labeled hotel sentences, "label<TAB>text"
    electronics.tsv           labeled electronics sentences
    hotel_unlabeled.txt       unlabeled hotel sentences, one per line
    electronics_unlabeled.txt unlabeled electronics sentences (first 50k used)
    glove.txt                 300-d word vectors, "token v1 ... v300"
plus an installed spaCy model for parsing (pip install sugmine[spacy]).

For each domain: 5-fold cross-validation of hybrid + self-training, then the
CNN-only and LSTM-only baselines, with paired t-tests on fold-level macro F1.
"""

import argparse
import sys
from pathlib import Path

from sugmine.annotate import SpacyAnnotator
from sugmine.corpus import load_labeled, load_unlabeled
from sugmine.embed import load_embeddings
from sugmine.evaluate import PipelineResources, cross_validate, emit_report
from sugmine.metrics import significance_test
from sugmine.model import ModelConfig
from sugmine.selftrain import SelfTrainConfig

DOMAINS = {
    "hotel": ("hotel.tsv", "hotel_unlabeled.txt", None),
    "electronics": ("electronics.tsv", "electronics_unlabeled.txt", 50_000),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("data_dir", help="directory with the benchmark files")
    parser.add_argument("--out", default="runs/benchmark")
    parser.add_argument("--seed", type=int, default=20)
    parser.add_argument("--folds", type=int, default=5)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--spacy-model", default="en_core_web_sm")
    args = parser.parse_args()

    data_dir = Path(args.data_dir)
    missing = [n for names in DOMAINS.values() for n in names[:2] if not (data_dir / n).exists()]
    if not (data_dir / "glove.txt").exists():
        missing.append("glove.txt")
    if missing:
        print(f"missing benchmark files under {data_dir}: {', '.join(missing)}", file=sys.stderr)
        return 2

    table = load_embeddings(data_dir / "glove.txt", dim=300)
    annotator = SpacyAnnotator(args.spacy_model)
    resources = PipelineResources(table=table, annotator=annotator)

    for domain, (labeled_name, unlabeled_name, limit) in DOMAINS.items():
        dataset = load_labeled(data_dir / labeled_name)
        pool = load_unlabeled(data_dir / unlabeled_name, limit=limit)
        print(f"== {domain}: {len(dataset)} labeled / {len(pool)} unlabeled")

        config = SelfTrainConfig(base=ModelConfig(variant="hybrid", seed=args.seed))
        hybrid_st = cross_validate(
            dataset, pool, config, args.folds, args.seed, resources, jobs=args.jobs
        )
        emit_report(hybrid_st, f"{args.out}/{domain}_hybrid_selftrain")
        summary = hybrid_st.summary()["macro_f1"]
        print(f"hybrid + self-training macro F1: {summary['mean']:.3f} (sd {summary['sd']:.3f})")

        for variant in ("cnn_only", "lstm_only", "lstm_attention", "hybrid"):
            result = cross_validate(
                dataset, None, ModelConfig(variant=variant, seed=args.seed),
                args.folds, args.seed, resources, jobs=args.jobs,
            )
            emit_report(result, f"{args.out}/{domain}_{variant}")
            mean = result.summary()["macro_f1"]["mean"]
            t_test = significance_test(
                hybrid_st.values("macro_f1"), result.values("macro_f1")
            )
            marker = "degenerate" if t_test.degenerate else f"p={t_test.p_value:.4f}"
            print(f"{variant}: macro F1 {mean:.3f} (vs self-training: {marker})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
