//! Prompted task families and the samplers that randomize them.
//!
//! Six families share one conversation shape: a user turn carrying the page
//! images plus an instruction, and an assistant turn carrying the target.
//!
//! | id | target |
//! |----|--------|
//! | T1 | full transcription, one text line per rendered row |
//! | T2 | one grounded line per rendered row |
//! | T3 | grounded lines for the prompt's boxes, in prompt order |
//! | T4 | original bases for masked boxes, in prompt order |
//! | T5 | every box where a query occurs (possibly none) |
//! | T6 | a chromosome label |

mod build;
mod config;
mod labels;
pub mod prompts;
mod sampling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::{DnaDocument, RegionRef, RenderError};

pub use build::{build_instance, sample_query, QuerySample};
pub use config::{CurriculumSchedule, SamplerConfig, SamplerConfigFile};
pub use labels::{chromosome_label, is_chromosome_label, CHROMOSOME_LABELS, UNKNOWN_LABEL};
pub use sampling::{
    anneal_prompt_length, apply_tail_truncation, find_occurrences, sample_line_spans, sample_prompt_variant,
    sample_task, truncate_tail, truncation_ratio, Occurrence,
};

#[derive(Debug, Error, PartialEq)]
pub enum TaskError {
    #[error("document has no rendered rows")]
    EmptyDocument,
    #[error("tail truncation would delete all {0} supervision items")]
    AllItemsTruncated(usize),
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Render(#[from] RenderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl TaskId {
    pub const ALL: [TaskId; 6] = [TaskId::T1, TaskId::T2, TaskId::T3, TaskId::T4, TaskId::T5, TaskId::T6];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<TaskId> {
        Self::ALL.get(i).copied()
    }

    /// T2 through T5 answer in `<|ref|>..<|det|>..` lines.
    pub fn is_grounded(self) -> bool {
        matches!(self, TaskId::T2 | TaskId::T3 | TaskId::T4 | TaskId::T5)
    }

    /// Families that tail truncation applies to.
    pub fn truncatable(self) -> bool {
        matches!(self, TaskId::T2 | TaskId::T3 | TaskId::T5)
    }

    pub fn as_str(self) -> &'static str {
        ["T1", "T2", "T3", "T4", "T5", "T6"][self.index()]
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskId::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown task `{s}` (expected T1..T6)"))
    }
}

/// Instruction verbosity. Distribution vectors are ordered LONG, MEDIUM,
/// SHORT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PromptVariant {
    Long,
    Medium,
    Short,
}

impl PromptVariant {
    pub const ORDER: [PromptVariant; 3] = [PromptVariant::Long, PromptVariant::Medium, PromptVariant::Short];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptVariant::Long => "LONG",
            PromptVariant::Medium => "MEDIUM",
            PromptVariant::Short => "SHORT",
        }
    }
}

impl FromStr for PromptVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptVariant::ORDER
            .iter()
            .copied()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown prompt variant `{s}`"))
    }
}

/// A supervised `(sequence, regions)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupervisionItem {
    pub sequence: String,
    pub regions: Vec<RegionRef>,
    /// Global index of the first base, when the item came from the document.
    pub start: Option<usize>,
}

/// One two-turn conversation over a (possibly masked or truncated) document.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskInstance {
    pub task: TaskId,
    pub prompt_variant: PromptVariant,
    pub user_content: String,
    pub assistant_content: String,
    pub document: DnaDocument,
    pub label: Option<String>,
}
