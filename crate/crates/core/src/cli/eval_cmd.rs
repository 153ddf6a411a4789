use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{io_error, thread_pool, Cli, CliError};
use crate::eval::{
    edit_distance, evaluate_ordered, evaluate_t6, expand_t5, parse_prediction_lines, MatchCriteria, OrderedAccumulator,
    PrefixAccumulator, ThresholdRow, DEFAULT_T5_THRESHOLDS,
};
use crate::tasks::TaskId;
use crate::wire::grammar::response_lines;
use crate::wire::{parse_grounded_response, read_shard, DatasetRecord};

/// Key holding the model output in prediction JSONL lines.
pub const PREDICTION_KEY: &str = "response";

const CS_NOTE: &str = "CS = 100 * (1 - ED / max(L, |pred prefix|)); toolkit definition";

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset directory (all shard-*.jsonl) or one shard file.
    pub gt: PathBuf,
    /// JSONL of {"id", "response"} objects (dataset records also work), or a directory of <id>.txt files.
    pub predictions: PathBuf,
    /// Only score this task.
    #[arg(long)]
    pub task: Option<TaskId>,
    /// Comma-separated IoU thresholds (default 0.99; T5 defaults to 0.5,0.9,0.95,0.99).
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
}

pub(crate) fn shard_files(gt: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !gt.is_dir() {
        return Ok(vec![gt.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(gt)
        .map_err(|e| io_error(gt, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("shard-") && n.ends_with(".jsonl"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Io(format!("{}: no shard-*.jsonl files", gt.display())));
    }
    Ok(files)
}

pub(crate) fn read_records(gt: &Path) -> Result<Vec<DatasetRecord>, CliError> {
    let mut out = Vec::new();
    for f in shard_files(gt)? {
        out.extend(read_shard(&f)?);
    }
    Ok(out)
}

fn read_predictions(path: &Path, gt: &[DatasetRecord]) -> Result<HashMap<String, String>, CliError> {
    let mut preds = HashMap::new();
    if path.is_dir() {
        for rec in gt {
            let p = path.join(format!("{}.txt", rec.id));
            if p.exists() {
                preds.insert(rec.id.clone(), fs::read_to_string(&p).map_err(|e| io_error(&p, e))?);
            }
        }
        return Ok(preds);
    }
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| CliError::Parse(format!("{}:{}: {msg}", path.display(), i + 1));
        let v: Value = serde_json::from_str(line).map_err(|e| bad(&e.to_string()))?;
        let id = v["id"].as_str().ok_or_else(|| bad("missing string field \"id\""))?;
        let response = v[PREDICTION_KEY]
            .as_str()
            .or_else(|| v["conversation"][1]["content"].as_str())
            .ok_or_else(|| bad("missing string field \"response\""))?;
        preds.insert(id.to_string(), response.to_string());
    }
    Ok(preds)
}

fn check_ids(gt: &[DatasetRecord], all_gt: &[DatasetRecord], preds: &HashMap<String, String>) -> Result<(), CliError> {
    let missing: Vec<&str> = gt
        .iter()
        .filter(|r| !preds.contains_key(&r.id))
        .map(|r| r.id.as_str())
        .collect();
    let known: std::collections::HashSet<&str> = all_gt.iter().map(|r| r.id.as_str()).collect();
    let mut extra: Vec<&str> = preds
        .keys()
        .map(|k| k.as_str())
        .filter(|k| !known.contains(k))
        .collect();
    extra.sort();
    if missing.is_empty() && extra.is_empty() {
        return Ok(());
    }
    let mut msg = String::from("sample ids do not match");
    if !missing.is_empty() {
        let _ = write!(
            msg,
            "; missing predictions for {}: {}",
            missing.len(),
            missing.join(", ")
        );
    }
    if !extra.is_empty() {
        let _ = write!(msg, "; unknown prediction ids {}: {}", extra.len(), extra.join(", "));
    }
    Err(CliError::Parse(msg))
}

fn transcript(text: &str) -> String {
    response_lines(text).iter().map(|l| l.trim()).collect()
}

fn eval_t1(recs: &[&DatasetRecord], preds: &HashMap<String, String>) -> Result<Value, CliError> {
    let mut acc = PrefixAccumulator::default();
    let (mut em, mut cer) = (0.0, 0.0);
    for r in recs {
        let g = transcript(r.assistant_content());
        let p = transcript(&preds[&r.id]);
        if g.is_empty() {
            return Err(CliError::Parse(format!("{}: empty T1 ground truth", r.id)));
        }
        acc.push(&g, &p)
            .map_err(|e| CliError::Parse(format!("{}: {e}", r.id)))?;
        em += f64::from(u8::from(g == p));
        cer += edit_distance(&g, &p) as f64 / g.len() as f64;
    }
    let n = recs.len() as f64;
    Ok(json!({
        "n_samples": recs.len(),
        "text_em": em / n,
        "text_cer": cer / n,
        "prefix": acc.finish(),
        "cs_definition": CS_NOTE,
    }))
}

fn eval_grounded(
    task: TaskId,
    recs: &[&DatasetRecord],
    preds: &HashMap<String, String>,
    thresholds: &[f64],
    pool: &rayon::ThreadPool,
) -> Result<Value, CliError> {
    let pairs = recs
        .iter()
        .map(|r| {
            let gt = parse_grounded_response(r.assistant_content(), task)
                .map_err(|e| CliError::Parse(format!("{}: ground truth: {e}", r.id)))?
                .into_items();
            let gt = if task == TaskId::T5 { expand_t5(&gt) } else { gt };
            Ok((gt, parse_prediction_lines(&preds[&r.id], task)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = Vec::new();
    for &t in thresholds {
        let crit = MatchCriteria::new(t).map_err(|e| CliError::Config(e.to_string()))?;
        let per_sample = pool.install(|| {
            pairs
                .par_iter()
                .map(|(g, p)| evaluate_ordered(g, p, &crit))
                .collect::<Result<Vec<_>, _>>()
        });
        let per_sample = per_sample.map_err(|e| CliError::Parse(e.to_string()))?;
        let mut acc = OrderedAccumulator::default();
        for m in &per_sample {
            acc.push(m);
        }
        rows.push(ThresholdRow {
            iou_threshold: t,
            report: acc.finish(),
        });
    }
    Ok(json!({ "n_samples": recs.len(), "thresholds": rows }))
}

fn eval_t6(recs: &[&DatasetRecord], preds: &HashMap<String, String>) -> Result<Value, CliError> {
    let gt: Vec<&str> = recs
        .iter()
        .map(|r| r.label.as_deref().unwrap_or_else(|| r.assistant_content().trim()))
        .collect();
    let pred: Vec<&str> = recs.iter().map(|r| preds[&r.id].trim()).collect();
    let acc = evaluate_t6(&gt, &pred).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(json!({ "n_samples": recs.len(), "accuracy": acc }))
}

fn render_text(report: &Value) -> String {
    let mut s = String::new();
    let tasks = report["tasks"].as_object().cloned().unwrap_or_default();
    for (task, r) in &tasks {
        let _ = writeln!(s, "{task}  n={}", r["n_samples"]);
        if let Some(rows) = r["thresholds"].as_array() {
            let _ = writeln!(
                s,
                "  {:>5} {:>7} {:>7} {:>8} {:>7} {:>7} {:>7} {:>7} {:>7}",
                "tau", "LCM", "TextEM", "TextCER", "DetAcc", "DetIoU", "Joint", "Strict", "Linf"
            );
            for row in rows {
                let f = |k: &str| row[k].as_f64().unwrap_or(f64::NAN);
                let _ = writeln!(
                    s,
                    "  {:>5.2} {:>7.4} {:>7.4} {:>8.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.3}",
                    f("iou_threshold"),
                    f("lcm"),
                    f("text_em"),
                    f("text_cer"),
                    f("det_acc"),
                    f("det_iou_avg"),
                    f("joint"),
                    f("strict"),
                    f("linf_err")
                );
            }
        }
        if let Some(acc) = r["accuracy"].as_f64() {
            let _ = writeln!(s, "  accuracy {acc:.4}");
        }
        if let Some(rows) = r["prefix"]["rows"].as_array() {
            let _ = writeln!(
                s,
                "  text_em {:.4}  text_cer {:.4}",
                r["text_em"].as_f64().unwrap_or(f64::NAN),
                r["text_cer"].as_f64().unwrap_or(f64::NAN)
            );
            let _ = writeln!(s, "  {:>6} {:>7} {:>7}", "prefix", "EM", "CS");
            for row in rows {
                let _ = writeln!(
                    s,
                    "  {:>5.0}% {:>7.2} {:>7.2}",
                    row["ratio"].as_f64().unwrap_or(0.0) * 100.0,
                    row["em_rate"].as_f64().unwrap_or(f64::NAN),
                    row["cs_rate"].as_f64().unwrap_or(f64::NAN)
                );
            }
            let _ = writeln!(s, "  note: {CS_NOTE}");
        }
    }
    s
}

pub fn run(cli: &Cli, args: &EvalArgs) -> Result<(), CliError> {
    if let Some(ts) = &args.thresholds {
        for &t in ts {
            MatchCriteria::new(t).map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    let all = read_records(&args.gt)?;
    let selected: Vec<DatasetRecord> = all
        .iter()
        .filter(|r| args.task.is_none_or(|t| r.task == t))
        .cloned()
        .collect();
    let preds = read_predictions(&args.predictions, &selected)?;
    check_ids(&selected, &all, &preds)?;
    let pool = thread_pool(cli.workers)?;

    let mut by_task: BTreeMap<TaskId, Vec<&DatasetRecord>> = BTreeMap::new();
    for r in &selected {
        by_task.entry(r.task).or_default().push(r);
    }
    let mut tasks = serde_json::Map::new();
    for (task, recs) in &by_task {
        let v = match task {
            TaskId::T1 => eval_t1(recs, &preds)?,
            TaskId::T6 => eval_t6(recs, &preds)?,
            t => {
                let ts = match (&args.thresholds, t) {
                    (Some(ts), _) => ts.clone(),
                    (None, TaskId::T5) => DEFAULT_T5_THRESHOLDS.to_vec(),
                    (None, _) => vec![MatchCriteria::default().iou_threshold],
                };
                eval_grounded(*t, recs, &preds, &ts, &pool)?
            }
        };
        tasks.insert(task.to_string(), v);
    }
    let report = json!({
        "gt": args.gt.display().to_string(),
        "n_samples": selected.len(),
        "tasks": Value::Object(tasks),
    });

    fs::create_dir_all(&cli.out).map_err(|e| io_error(&cli.out, e))?;
    let json_path = cli.out.join("report.json");
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    fs::write(&json_path, body).map_err(|e| io_error(&json_path, e))?;
    let text = render_text(&report);
    let txt_path = cli.out.join("report.txt");
    fs::write(&txt_path, &text).map_err(|e| io_error(&txt_path, e))?;
    print!("{text}");
    Ok(())
}
