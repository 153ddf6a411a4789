//! DNA sequences as rendered documents.
//!
//! The crate turns FASTA records into multi-page page images with exact
//! per-base pixel boxes, builds six prompted task families (transcription,
//! grounded transcription, ROI reading, masked completion, subsequence
//! localization, chromosome classification) over those documents, and
//! scores model responses with strictly ordered grounding metrics.
//!
//! Module map:
//! - [`genome_io`]: FASTA parsing and windowing
//! - [`render`]: page layout, glyph boxes, interval/region mappings, masking
//! - [`tasks`]: samplers and task-instance construction
//! - [`wire`]: dataset records and the response grammar
//! - [`eval`]: ordered metrics, edit distance, token budget
//! - [`cli`]: the `dnadoc` command line

pub mod cli;
pub mod eval;
pub mod genome_io;
pub mod render;
pub mod rng;
pub mod tasks;
pub mod wire;

pub use genome_io::{extract_windows, parse_fasta, DnaSequence, GenomeWindow};
pub use render::{render_document, DnaDocument, PixelBox, RegionRef, RenderConfig};
pub use tasks::{build_instance, PromptVariant, SamplerConfig, TaskId, TaskInstance};
