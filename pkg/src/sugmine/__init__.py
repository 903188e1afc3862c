"""Suggestion mining for review sentences.

A hybrid classifier (convolutional encoder, attention-recurrent encoder,
linguistic-feature perceptron) over individual review sentences, wrapped in
a self-training loop, with stratified cross-validation, ablation, and
reporting tooling. See the ``sugmine`` CLI for end-to-end runs.
"""

__version__ = "0.1.0"

from .corpus import (
    DatasetStats,
    FoldSplit,
    LabeledDataset,
    LabeledSentence,
    UnlabeledPool,
    UnlabeledSentence,
    compute_stats,
    load_labeled,
    load_unlabeled,
    make_folds,
    split_validation,
)
from .annotate import (
    Annotator,
    DependencyArc,
    FixtureAnnotator,
    ParsedSentence,
    SpacyAnnotator,
    Token,
    annotate,
    load_fixture,
)
from .lexfeat import (
    SUGGESTION_KEYWORDS,
    FeatureSchema,
    LinguisticFeatureVector,
    extract,
    fit_schema,
    imperative_vb_feature,
    nsubj_pair_features,
)
from .embed import EmbeddingTable, EncodedSequence, encode, load_embeddings
from .model import (
    HybridClassifier,
    InputPipeline,
    ModelConfig,
    Prediction,
    attention_pool,
    conv_global_maxpool,
    load_checkpoint,
    predict_proba,
    save_checkpoint,
    train_supervised,
    weighted_loss,
)
from .metrics import ClassMetrics, TTestResult, prf_metrics, significance_test
from .selftrain import SelfTrainConfig, SelfTrainRun, SupervisedTrainer, select_confident, self_train
from .evaluate import CvResult, PipelineResources, cross_validate, emit_report, run_ablation
