//! Ordered grounding metrics, edit distance, prefix transcription scores
//! and token-budget arithmetic.

mod budget;
mod metrics;
mod ordered;
mod prefix;

use thiserror::Error;

pub use budget::{token_budget, TokenBudget, CONV_RATIO, PATCH_SIZE, TABLE_RESOLUTIONS};
pub use metrics::{box_iou, edit_distance, iou, linf, text_cer};
pub use ordered::{
    evaluate_corpus, evaluate_ordered, evaluate_t5, evaluate_t6, expand_t5, parse_prediction_lines, MatchCriteria,
    OrderedAccumulator, OrderedEvalReport, PredictedLine, SampleMetrics, ThresholdRow, DEFAULT_T5_THRESHOLDS,
};
pub use prefix::{evaluate_prefix_transcription, prefix_len, PrefixAccumulator, PrefixReport, PrefixRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("degenerate box {0:?}")]
    DegenerateBox([u32; 4]),
    #[error("length mismatch: {gt} ground-truth vs {pred} predicted")]
    LengthMismatch { gt: usize, pred: usize },
    #[error("resolution {0} is not supported (needs res % 16 == 0 and (res/16)^2 % 16 == 0)")]
    UnsupportedResolution(u32),
    #[error("IoU threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("{0}")]
    InvalidInput(String),
}
