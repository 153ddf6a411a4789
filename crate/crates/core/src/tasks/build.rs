use rand::Rng;

use super::labels::chromosome_label;
use super::prompts::{instruction, user_content};
use super::sampling::{apply_tail_truncation, find_occurrences, sample_line_spans};
use super::{PromptVariant, SamplerConfig, SupervisionItem, TaskError, TaskId, TaskInstance};
use crate::render::{DnaDocument, RegionRef};
use crate::wire::grammar::{format_grounded_line, format_grounded_lines};

/// A T5 query and whether it was drawn to be absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySample {
    pub query: String,
    pub negative: bool,
}

const NEGATIVE_QUERY_ATTEMPTS: usize = 64;

/// Draws a query length `U{query_len_min..=query_len_max}` (clipped to the
/// document) and either a substring of the document or, with probability
/// `t5_negative_rate`, a random ACGT string that does not occur. If no
/// absent string turns up the query falls back to a substring.
pub fn sample_query<R: Rng + ?Sized>(
    doc: &DnaDocument,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<QuerySample, TaskError> {
    let text = doc.text();
    if text.is_empty() {
        return Err(TaskError::EmptyDocument);
    }
    let len = rng.gen_range(cfg.query_len_min..=cfg.query_len_max).min(text.len());
    if rng.gen_bool(cfg.t5_negative_rate) {
        for _ in 0..NEGATIVE_QUERY_ATTEMPTS {
            let q: String = (0..len).map(|_| b"ACGT"[rng.gen_range(0..4)] as char).collect();
            if !text.contains(&q) {
                return Ok(QuerySample {
                    query: q,
                    negative: true,
                });
            }
        }
    }
    let start = rng.gen_range(0..=text.len() - len);
    Ok(QuerySample {
        query: text[start..start + len].to_string(),
        negative: false,
    })
}

fn truncation_enabled(task: TaskId, cfg: &SamplerConfig) -> bool {
    task.truncatable() && cfg.trunc_max > 0.0
}

fn maybe_truncate<R: Rng + ?Sized>(
    task: TaskId,
    doc: &DnaDocument,
    items: Vec<SupervisionItem>,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(DnaDocument, Vec<SupervisionItem>), TaskError> {
    if items.is_empty() || !truncation_enabled(task, cfg) {
        return Ok((doc.clone(), items));
    }
    apply_tail_truncation(doc, &items, cfg, rng)
}

fn sorted_spans<R: Rng + ?Sized>(
    doc: &DnaDocument,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<SupervisionItem>, TaskError> {
    let mut items = sample_line_spans(doc, cfg, rng)?;
    items.sort_by_key(|i| i.start);
    Ok(items)
}

fn flat_regions(items: &[SupervisionItem]) -> Vec<RegionRef> {
    items.iter().flat_map(|i| i.regions.iter().copied()).collect()
}

/// Builds one conversation for `task` over `doc`.
///
/// Tail truncation runs for T2, T3 and T5 when `cfg.trunc_max > 0`; an
/// [`TaskError::AllItemsTruncated`] result means the caller should resample.
pub fn build_instance<R: Rng + ?Sized>(
    task: TaskId,
    doc: &DnaDocument,
    variant: PromptVariant,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<TaskInstance, TaskError> {
    if doc.rows().is_empty() {
        return Err(TaskError::EmptyDocument);
    }
    let (document, prompt, assistant, label) = match task {
        TaskId::T1 => {
            let lines: Vec<String> = doc.rows().iter().map(|r| doc.row_text(r)).collect();
            (doc.clone(), instruction(task, variant, &[], ""), lines.join("\n"), None)
        }
        TaskId::T2 => {
            let rows = doc
                .rows()
                .iter()
                .map(|r| SupervisionItem {
                    sequence: doc.row_text(r),
                    regions: vec![doc.row_region(r)],
                    start: Some(r.first_char),
                })
                .collect();
            let (d, items) = maybe_truncate(task, doc, rows, cfg, rng)?;
            (
                d,
                instruction(task, variant, &[], ""),
                format_grounded_lines(&items),
                None,
            )
        }
        TaskId::T3 => {
            let spans = sorted_spans(doc, cfg, rng)?;
            let (d, items) = maybe_truncate(task, doc, spans, cfg, rng)?;
            let boxes = flat_regions(&items);
            (
                d,
                instruction(task, variant, &boxes, ""),
                format_grounded_lines(&items),
                None,
            )
        }
        TaskId::T4 => {
            let items = sorted_spans(doc, cfg, rng)?;
            let boxes = flat_regions(&items);
            let masked = doc.mask_regions(&boxes)?;
            (
                masked,
                instruction(task, variant, &boxes, ""),
                format_grounded_lines(&items),
                None,
            )
        }
        TaskId::T5 => {
            let QuerySample { query, .. } = sample_query(doc, cfg, rng)?;
            let matches = find_occurrences(doc, &query, cfg.allow_overlap)?
                .into_iter()
                .map(|o| SupervisionItem {
                    sequence: query.clone(),
                    regions: o.regions,
                    start: Some(o.position),
                })
                .collect();
            let (d, items) = maybe_truncate(task, doc, matches, cfg, rng)?;
            let line = format_grounded_line(&query, &flat_regions(&items));
            (d, instruction(task, variant, &[], &query), line, None)
        }
        TaskId::T6 => {
            let label = chromosome_label(doc.source_label()).to_string();
            (
                doc.clone(),
                instruction(task, variant, &[], ""),
                label.clone(),
                Some(label),
            )
        }
    };
    Ok(TaskInstance {
        task,
        prompt_variant: variant,
        user_content: user_content(&prompt, document.page_count()),
        assistant_content: assistant,
        document,
        label,
    })
}
