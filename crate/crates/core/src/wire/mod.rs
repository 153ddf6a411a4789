//! On-disk dataset records and the assistant response grammar.

pub mod dataset;
pub mod grammar;

use thiserror::Error;

use crate::tasks::TaskId;

pub use dataset::{
    load_instance, read_shard, serialize_instance, Conversation, DatasetRecord, Message, ShardWriter, ASSISTANT_ROLE,
    USER_ROLE,
};
pub use grammar::{
    format_det, format_grounded_line, format_grounded_lines, format_response, parse_grounded_line,
    parse_grounded_response, parse_plain_response, parse_response, validate_response, GroundedItem, Payload,
    ResponseDoc,
};

#[derive(Debug, Error, PartialEq)]
pub enum WireError {
    #[error("line {line_no}: malformed: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("line {line_no}: illegal sequence character {ch:?}")]
    IllegalSequenceChar { line_no: usize, ch: char },
    #[error("line {line_no}: empty box list is only allowed for T5")]
    EmptyBoxListOutsideT5 { line_no: usize },
    #[error("line {line_no}: {count} boxes on one line; only T5 may list several")]
    MultipleBoxesOutsideT5 { line_no: usize, count: usize },
    #[error("unknown chromosome label {0:?}")]
    UnknownLabel(String),
    #[error("{0} responses are not handled by this parser")]
    WrongTask(TaskId),
}
