use std::path::{Path, PathBuf};

use clap::Args;

use super::eval_cmd::{read_records, shard_files};
use super::{Cli, CliError};
use crate::render::RegionRef;
use crate::tasks::prompts::{boxes_in, num_images_in, query_in, IMAGE_PLACEHOLDER};
use crate::tasks::{chromosome_label, TaskId, TaskInstance};
use crate::wire::{load_instance, parse_response, DatasetRecord, Payload};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Dataset directory or one shard file.
    pub shard: PathBuf,
}

fn box_text(inst: &TaskInstance, r: &RegionRef) -> Result<String, String> {
    let (i, j) = inst
        .document
        .regions_to_interval(r)
        .map_err(|e| format!("box {:?}: {e}", r.to_array()))?;
    Ok((i..j)
        .map(|g| inst.document.annotation(g).map(|a| a.char as char).unwrap_or('?'))
        .collect())
}

/// Consecutive boxes must spell `expected` one or more times; a match that
/// wraps a row contributes one box per row segment.
fn check_boxes_spell(inst: &TaskInstance, boxes: &[RegionRef], expected: &str) -> Result<(), String> {
    let mut acc = String::new();
    for b in boxes {
        acc.push_str(&box_text(inst, b)?);
        if acc == expected {
            acc.clear();
        } else if !expected.starts_with(&acc) {
            return Err(format!(
                "box {:?} covers {acc:?}, response says {expected:?}",
                b.to_array()
            ));
        }
    }
    if !acc.is_empty() {
        return Err(format!("boxes end mid-match at {acc:?}"));
    }
    Ok(())
}

/// Checks one record against the dataset invariants.
pub fn verify_record(root: &Path, rec: &DatasetRecord) -> Result<(), String> {
    let inst = load_instance(root, rec).map_err(|e| e.to_string())?;
    let user = &inst.user_content;
    if user.matches(IMAGE_PLACEHOLDER).count() != 1 || !user.starts_with(IMAGE_PLACEHOLDER) {
        return Err("user turn must start with exactly one <image>".into());
    }
    let pages = inst.document.page_count();
    if num_images_in(user) != Some(pages) || rec.image_paths().len() != pages {
        return Err(format!("NUM_IMAGES does not match the {pages} stored pages"));
    }
    let doc = parse_response(&inst.assistant_content, inst.task).map_err(|e| e.to_string())?;
    match (&doc.payload, inst.task) {
        (Payload::Text(t), TaskId::T1) => {
            let rows: Vec<String> = inst.document.rows().iter().map(|r| inst.document.row_text(r)).collect();
            if t.split('\n').collect::<Vec<_>>() != rows {
                return Err("T1 transcript does not match the rendered rows".into());
            }
        }
        (Payload::Label(l), TaskId::T6) => {
            if l != chromosome_label(&rec.source_label) || rec.label.as_deref() != Some(l) {
                return Err(format!("label {l:?} does not match source {:?}", rec.source_label));
            }
        }
        (Payload::Items(items), task) => {
            for item in items {
                check_boxes_spell(&inst, &item.boxes, &item.sequence)?;
            }
            match task {
                TaskId::T3 | TaskId::T4 => {
                    let prompt = boxes_in(user).ok_or("prompt has no box list")?;
                    let answer: Vec<RegionRef> = items.iter().flat_map(|i| i.boxes.clone()).collect();
                    if prompt != answer {
                        return Err("prompt boxes differ from response boxes".into());
                    }
                }
                TaskId::T5 if query_in(user) != Some(items[0].sequence.as_str()) => {
                    return Err("T5 response query differs from the prompt".into());
                }
                _ => {}
            }
        }
        _ => return Err("payload does not match task".into()),
    }
    Ok(())
}

pub fn run(_cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    let root = if args.shard.is_dir() {
        args.shard.clone()
    } else {
        args.shard.parent().map(Path::to_path_buf).unwrap_or_default()
    };
    let files = shard_files(&args.shard)?;
    let records = read_records(&args.shard)?;
    let mut failures = 0;
    for rec in &records {
        if let Err(msg) = verify_record(&root, rec) {
            failures += 1;
            eprintln!("{}: {msg}", rec.id);
        }
    }
    println!(
        "verified {} records in {} shards, {failures} failures",
        records.len(),
        files.len()
    );
    if failures > 0 {
        return Err(CliError::Parse(format!("{failures} records failed verification")));
    }
    Ok(())
}
