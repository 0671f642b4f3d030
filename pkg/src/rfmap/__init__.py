"""Radiomic feature maps for grayscale images.

Sliding-kernel GLCM/GLRLM feature map extraction, saliency-guided map
selection, and three-class classifier evaluation, with a command line
frontend (``rfmap``).
"""

from .config import PipelineConfig, load_config
from .engine import (
    FeatureMapStack,
    RfmConfig,
    active_backend,
    extract_maps,
    oracle_extract,
)
from .evaluation import (
    CSV_HEADER,
    LABELS,
    ClassMetrics,
    PredictionError,
    PredictionSet,
    RocBand,
    RocCurve,
    class_metrics,
    read_predictions,
    roc_auc,
    roc_band,
    wilcoxon_signed_rank,
    write_predictions,
)
from .features import (
    FEATURE_INDEX,
    FEATURE_NAMES,
    GLCM_FEATURES,
    GLRLM_FEATURES,
    CooccurrenceMatrix,
    FeatureVector,
    QuantizedPatch,
    RunLengthMatrix,
    feature_vector,
    glcm_accumulate,
    glcm_features,
    glrlm_accumulate,
    glrlm_features,
    quantize,
)
from .fmap import FmapError, read_fmap, write_fmap
from .imaging import (
    FloatMap,
    GrayImage,
    NonGrayscaleImageError,
    UnreadableImageError,
    UnsupportedImageFormatError,
    load_image,
    normalize_levels,
    resize_bspline,
    save_png,
)
from .similarity import (
    CcMatrix,
    RfmRanking,
    SimilarityScore,
    normalized_mi,
    pearson_cc,
    rank_rfms,
    similarity_score,
    sm_cc_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "load_config",
    "FeatureMapStack",
    "RfmConfig",
    "active_backend",
    "extract_maps",
    "oracle_extract",
    "CSV_HEADER",
    "LABELS",
    "ClassMetrics",
    "PredictionError",
    "PredictionSet",
    "RocBand",
    "RocCurve",
    "class_metrics",
    "read_predictions",
    "roc_auc",
    "roc_band",
    "wilcoxon_signed_rank",
    "write_predictions",
    "FEATURE_INDEX",
    "FEATURE_NAMES",
    "GLCM_FEATURES",
    "GLRLM_FEATURES",
    "CooccurrenceMatrix",
    "FeatureVector",
    "QuantizedPatch",
    "RunLengthMatrix",
    "feature_vector",
    "glcm_accumulate",
    "glcm_features",
    "glrlm_accumulate",
    "glrlm_features",
    "quantize",
    "FmapError",
    "read_fmap",
    "write_fmap",
    "FloatMap",
    "GrayImage",
    "NonGrayscaleImageError",
    "UnreadableImageError",
    "UnsupportedImageFormatError",
    "load_image",
    "normalize_levels",
    "resize_bspline",
    "save_png",
    "CcMatrix",
    "RfmRanking",
    "SimilarityScore",
    "normalized_mi",
    "pearson_cc",
    "rank_rfms",
    "similarity_score",
    "sm_cc_matrix",
    "__version__",
]
