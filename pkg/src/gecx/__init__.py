"""gecx: building blocks for grammatical error correction systems.

Preprocessing (tokenization, truecasing, byte-pair encoding, word
classes), edit alignment and features, Kneser-Ney n-gram language
models, n-best rescoring with MERT/MIRA/grid tuning, staged correction
pipelines with spell checking, and the M2/GLEU evaluation stack.
"""

__version__ = "0.1.0"

from .alignment import (
    AlignmentOp,
    EditSpan,
    align_chars,
    align_words,
    apply_edits,
    extract_edits,
    levenshtein,
)
from .bpe import BpeSegmenter
from .errors import (
    DataFormatError,
    GecxError,
    PipelineStageError,
    TrainingDataError,
)
from .features import (
    DENSE_FEATURES,
    FeatureVector,
    dense_edit_features,
    sparse_pattern_features,
)
from .lm import (
    ArpaLanguageModel,
    NGramLanguageModel,
    SentenceScore,
    project_to_classes,
)
from .metrics import (
    CONLL10_HUMAN_M2,
    EvalReport,
    GleuConfig,
    GoldAnnotation,
    JFLEG_HUMAN_GLEU,
    fbeta,
    fbeta_counts,
    gleu_evaluate,
    human_leave_one_out,
    human_ratio,
    leave_one_out_m2,
    m2_evaluate,
    parse_m2,
    write_m2,
)
from .nbest import (
    Hypothesis,
    LinearModel,
    NBestList,
    annotate_features,
    linear_rescore,
    parse_nbest,
    rescore_nbest,
    write_nbest,
)
from .pipeline import (
    FileCorrector,
    PipelineResult,
    RuleCorrector,
    combine_ensemble_scores,
    load_pipeline,
    pipeline_run,
)
from .spelling import Lexicon, damerau_levenshtein, spell_correct
from .tokenization import Truecaser, WordClassMap, load_word_classes, tokenize
from .tuning import (
    DEFAULT_LM_GRID,
    GleuTuningMetric,
    M2TuningMetric,
    MertTuner,
    MiraTuner,
    average_weights,
    exact_line_search,
    grid_search_lm_weight,
    mert_tune,
    mira_tune,
)

__all__ = [
    "AlignmentOp",
    "ArpaLanguageModel",
    "BpeSegmenter",
    "CONLL10_HUMAN_M2",
    "DENSE_FEATURES",
    "DEFAULT_LM_GRID",
    "DataFormatError",
    "EditSpan",
    "EvalReport",
    "FeatureVector",
    "FileCorrector",
    "GecxError",
    "GleuConfig",
    "GleuTuningMetric",
    "GoldAnnotation",
    "Hypothesis",
    "JFLEG_HUMAN_GLEU",
    "Lexicon",
    "LinearModel",
    "M2TuningMetric",
    "MertTuner",
    "MiraTuner",
    "NBestList",
    "NGramLanguageModel",
    "PipelineResult",
    "PipelineStageError",
    "RuleCorrector",
    "SentenceScore",
    "TrainingDataError",
    "Truecaser",
    "WordClassMap",
    "align_chars",
    "align_words",
    "annotate_features",
    "apply_edits",
    "average_weights",
    "combine_ensemble_scores",
    "damerau_levenshtein",
    "dense_edit_features",
    "exact_line_search",
    "extract_edits",
    "fbeta",
    "fbeta_counts",
    "gleu_evaluate",
    "grid_search_lm_weight",
    "human_leave_one_out",
    "human_ratio",
    "leave_one_out_m2",
    "levenshtein",
    "linear_rescore",
    "load_pipeline",
    "load_word_classes",
    "m2_evaluate",
    "mert_tune",
    "mira_tune",
    "parse_m2",
    "parse_nbest",
    "pipeline_run",
    "project_to_classes",
    "rescore_nbest",
    "spell_correct",
    "sparse_pattern_features",
    "tokenize",
    "write_m2",
    "write_nbest",
]
