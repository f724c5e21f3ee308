"""Cross-lingual query-based retrieval and summarization for crisis messages."""

from .corpus import (
    CategoryId,
    EventCollection,
    Message,
    ReferenceReport,
    SplitPair,
    dump_messages,
    load_messages,
    load_reports,
    normalize,
    split_leave_one_event_out,
    split_leave_one_language_out,
    split_sentences,
)
from .encoder import EncoderBackend, MockEncoder, cosine, message_embedding, sentence_sequence
from .linguistic import (
    Annotation,
    AnnotatorRegistry,
    FeatureScaler,
    RuleAnnotator,
    annotate,
    apply_scaler,
    extract_features,
    fit_scaler,
)
from .models import (
    Featurizer,
    FusionModel,
    ModelConfig,
    RankedCandidate,
    TrainedClassifier,
    TrainedRanker,
    build_model,
    fit_featurizer,
    load_checkpoint,
    predict_informative,
    predict_scores,
    rank,
    save_checkpoint,
    train_classifier,
    train_ranker,
)
from .queries import (
    Query,
    QueryEmbeddings,
    SimilarityFeatures,
    embed_query,
    parse_query,
    similarity_features,
)
from .summarize import (
    GenerationBackend,
    LeadGenerationBackend,
    Segment,
    Summary,
    SummaryConfig,
    choose_num_clusters,
    cluster,
    mean_silhouette,
    summarize,
    summarize_diversified,
    summarize_regular,
)
from .evaluate import (
    ClaimSet,
    ClassificationMetrics,
    FoldResult,
    ReportSimilarity,
    claim_recall,
    classification_metrics,
    event_level_summary,
    report_similarity,
    run_loeo,
    run_lolo,
)
from .config import PipelineConfig, load_config

__version__ = "0.1.0"
