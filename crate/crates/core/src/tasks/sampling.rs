//! Task, prompt-length, line-span, occurrence and truncation samplers.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::{CurriculumSchedule, PromptVariant, SamplerConfig, SupervisionItem, TaskError, TaskId};
use crate::render::{DnaDocument, RegionRef};

/// Draws a task id with probability proportional to `cfg.task_weights`.
pub fn sample_task<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> TaskId {
    let dist = WeightedIndex::new(cfg.task_weights).expect("validated task weights");
    TaskId::from_index(dist.sample(rng)).expect("six weights")
}

/// Prompt-length distribution (LONG, MEDIUM, SHORT) at training step `step`.
///
/// `t = clamp(step, 0, S) / S`, then `(1 - t) * start + t * end`,
/// renormalized.
pub fn anneal_prompt_length(sched: &CurriculumSchedule, step: u64) -> [f64; 3] {
    let total = sched.total_steps.max(1);
    let t = step.min(total) as f64 / total as f64;
    let mut mix = [0.0; 3];
    for (k, m) in mix.iter_mut().enumerate() {
        *m = (1.0 - t) * sched.start_dist[k] + t * sched.end_dist[k];
    }
    let sum: f64 = mix.iter().sum();
    mix.map(|m| m / sum)
}

pub fn sample_prompt_variant<R: Rng + ?Sized>(sched: &CurriculumSchedule, step: u64, rng: &mut R) -> PromptVariant {
    let dist = WeightedIndex::new(anneal_prompt_length(sched, step)).expect("validated schedule");
    PromptVariant::ORDER[dist.sample(rng)]
}

/// Samples row-local spans.
///
/// Draws `n ~ U{span_count_min..=span_count_max}` spans. Each picks a row
/// (distinct rows when `unique_lines` is set and the document has at least
/// `n` rows), a length `U{span_base_min..=span_base_max}` clipped to the row,
/// and a uniform start inside the row. Items come back in draw order.
pub fn sample_line_spans<R: Rng + ?Sized>(
    doc: &DnaDocument,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<SupervisionItem>, TaskError> {
    let rows = doc.rows();
    if rows.is_empty() {
        return Err(TaskError::EmptyDocument);
    }
    let n = rng.gen_range(cfg.span_count_min..=cfg.span_count_max);
    let picks: Vec<usize> = if cfg.unique_lines && rows.len() >= n {
        rand::seq::index::sample(rng, rows.len(), n).into_vec()
    } else {
        (0..n).map(|_| rng.gen_range(0..rows.len())).collect()
    };
    picks
        .into_iter()
        .map(|r| {
            let row = rows[r];
            let len = rng.gen_range(cfg.span_base_min..=cfg.span_base_max).min(row.len);
            let start = rng.gen_range(0..=row.len - len);
            let i = row.first_char + start;
            let anns = &doc.row_annotations(&row)[start..start + len];
            let region = RegionRef::new(row.page as u32, anns[0].page_bbox.union(&anns[len - 1].page_bbox));
            Ok(SupervisionItem {
                sequence: anns.iter().map(|a| a.char as char).collect(),
                regions: vec![region],
                start: Some(i),
            })
        })
        .collect()
}

/// One match of a query: its global start and the boxes covering it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub position: usize,
    pub regions: Vec<RegionRef>,
}

/// Every occurrence of `query` in the document text, ascending.
///
/// After a match at `m` the scan resumes at `m + 1` when overlaps are
/// allowed and at `m + len(query)` otherwise.
pub fn find_occurrences(doc: &DnaDocument, query: &str, allow_overlap: bool) -> Result<Vec<Occurrence>, TaskError> {
    if query.is_empty() {
        return Err(TaskError::InvalidQuery("empty query".into()));
    }
    if let Some(c) = query.bytes().find(|b| !crate::genome_io::is_base(*b)) {
        return Err(TaskError::InvalidQuery(format!(
            "character {:?} outside A/C/G/T/N",
            c as char
        )));
    }
    let text = doc.text();
    let base = doc.rows().first().map_or(0, |r| r.first_char);
    let step = if allow_overlap { 1 } else { query.len() };
    let mut out = Vec::new();
    let mut pos = 0;
    while pos + query.len() <= text.len() {
        let Some(off) = text[pos..].find(query) else { break };
        let m = pos + off;
        out.push(Occurrence {
            position: base + m,
            regions: doc.interval_to_regions(base + m, base + m + query.len())?,
        });
        pos = m + step;
    }
    Ok(out)
}

/// `rho = min(base + u * (max - base), max)`.
pub fn truncation_ratio(cfg: &SamplerConfig, u: f64) -> f64 {
    (cfg.trunc_base + u * (cfg.trunc_max - cfg.trunc_base)).min(cfg.trunc_max)
}

/// Random tail truncation at a ratio drawn from `cfg`.
pub fn apply_tail_truncation<R: Rng + ?Sized>(
    doc: &DnaDocument,
    items: &[SupervisionItem],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<(DnaDocument, Vec<SupervisionItem>), TaskError> {
    let u: f64 = rng.gen();
    truncate_tail(doc, items, truncation_ratio(cfg, u))
}

/// Deletes the last `floor(rho * M)` items and whites out their glyphs.
///
/// Glyphs still covered by a surviving item are left visible. When anything
/// was deleted, pages that no surviving region touches are dropped and the
/// rest renumbered from zero, with every surviving `img_id` rewritten.
pub fn truncate_tail(
    doc: &DnaDocument,
    items: &[SupervisionItem],
    rho: f64,
) -> Result<(DnaDocument, Vec<SupervisionItem>), TaskError> {
    let m = items.len();
    let k = ((rho.clamp(0.0, 1.0) * m as f64).floor() as usize).min(m);
    if k == 0 {
        return Ok((doc.clone(), items.to_vec()));
    }
    if k == m {
        return Err(TaskError::AllItemsTruncated(m));
    }
    let (kept, dropped) = items.split_at(m - k);

    let mut visible = Vec::new();
    for item in kept {
        for r in &item.regions {
            visible.push(doc.regions_to_interval(r)?);
        }
    }
    let still_visible = |g: usize| visible.iter().any(|&(a, b)| a <= g && g < b);

    let mut masked = doc.clone();
    for item in dropped {
        for r in &item.regions {
            let (a, b) = doc.regions_to_interval(r)?;
            for g in (a..b).filter(|&g| !still_visible(g)) {
                let ann = doc.annotation(g).expect("interval inside document");
                masked.whiteout(&RegionRef::new(ann.page_index as u32, ann.page_bbox));
            }
        }
    }

    let mut keep = vec![false; doc.page_count()];
    for r in kept.iter().flat_map(|i| &i.regions) {
        keep[r.img_id as usize] = true;
    }
    let (out, remap) = masked.retain_pages(&keep);
    let survivors = kept
        .iter()
        .map(|item| SupervisionItem {
            regions: item
                .regions
                .iter()
                .map(|r| RegionRef::new(remap[r.img_id as usize].expect("kept page") as u32, r.bbox))
                .collect(),
            ..item.clone()
        })
        .collect();
    Ok((out, survivors))
}
