use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{io_error, read_fasta, thread_pool, Cli, CliError, LayoutArgs};
use crate::genome_io::{extract_windows, GenomeWindow, WindowPreset};
use crate::render::{render_document, RenderConfig};
use crate::rng::{retry_rng, sample_rng, stream};
use crate::tasks::{
    build_instance, sample_prompt_variant, sample_task, PromptVariant, SamplerConfig, SamplerConfigFile, TaskError,
    TaskId, TaskInstance,
};
use crate::wire::{serialize_instance, DatasetRecord, ShardWriter};

const MAX_TRUNCATION_RETRIES: u64 = 8;
const BATCH: usize = 256;

/// Sampler overrides, named after the configuration-file keys.
#[derive(Debug, Clone, Default, Args)]
pub struct SamplerOverrides {
    /// Six comma-separated task weights for T1..T6.
    #[arg(long, value_delimiter = ',')]
    pub task_sampling: Option<Vec<f64>>,
    #[arg(long)]
    pub trunc_base: Option<f64>,
    #[arg(long)]
    pub trunc_max: Option<f64>,
    #[arg(long)]
    pub line_span_base_min: Option<usize>,
    #[arg(long)]
    pub line_span_base_max: Option<usize>,
    #[arg(long)]
    pub line_span_samp_min: Option<usize>,
    #[arg(long)]
    pub line_span_samp_max: Option<usize>,
    #[arg(long, action = ArgAction::Set)]
    pub unique_lines: Option<bool>,
    #[arg(long)]
    pub query_len_min: Option<usize>,
    #[arg(long)]
    pub query_len_max: Option<usize>,
    #[arg(long, action = ArgAction::Set)]
    pub allow_overlap: Option<bool>,
    #[arg(long)]
    pub annealed_sampler_total_steps: Option<u64>,
    #[arg(long)]
    pub t5_negative_rate: Option<f64>,
}

impl SamplerOverrides {
    pub fn apply(&self, cfg: &mut SamplerConfig) -> Result<(), CliError> {
        if let Some(w) = &self.task_sampling {
            if w.len() != 6 {
                return Err(CliError::Config(format!(
                    "--task-sampling needs 6 weights, got {}",
                    w.len()
                )));
            }
            cfg.task_weights.copy_from_slice(w);
        }
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.trunc_base, self.trunc_base);
        set(&mut cfg.trunc_max, self.trunc_max);
        set(&mut cfg.t5_negative_rate, self.t5_negative_rate);
        let setu = |dst: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        setu(&mut cfg.span_base_min, self.line_span_base_min);
        setu(&mut cfg.span_base_max, self.line_span_base_max);
        setu(&mut cfg.span_count_min, self.line_span_samp_min);
        setu(&mut cfg.span_count_max, self.line_span_samp_max);
        setu(&mut cfg.query_len_min, self.query_len_min);
        setu(&mut cfg.query_len_max, self.query_len_max);
        if let Some(b) = self.unique_lines {
            cfg.unique_lines = b;
        }
        if let Some(b) = self.allow_overlap {
            cfg.allow_overlap = b;
        }
        if let Some(s) = self.annealed_sampler_total_steps {
            cfg.curriculum.total_steps = s;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// FASTA file, or - for standard input.
    pub fasta: PathBuf,
    /// hg38-stage1, hg38-stage2 or rice.
    #[arg(long, default_value = "hg38-stage1")]
    pub preset: String,
    /// TOML sampler configuration; replaces --preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 1000)]
    pub shard_size: usize,
    #[command(flatten)]
    pub layout: LayoutArgs,
    #[command(flatten)]
    pub sampler: SamplerOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub window: usize,
    pub stride: usize,
    pub n_windows: usize,
}

/// `manifest.json` next to the shards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub preset: String,
    pub seed: u64,
    pub count: usize,
    pub shard_size: usize,
    pub shards: Vec<String>,
    pub task_counts: BTreeMap<String, usize>,
    pub prompt_variant_counts: BTreeMap<String, usize>,
    pub windows: WindowInfo,
    pub render_config: RenderConfig,
    pub sampler: SamplerConfigFile,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest, CliError> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

fn sampler_config(args: &GenArgs) -> Result<(String, SamplerConfig), CliError> {
    let (name, mut cfg) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let cfg =
                SamplerConfig::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            (format!("custom:{}", path.display()), cfg)
        }
        None => {
            let cfg = SamplerConfig::preset(&args.preset).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset {:?} (expected one of {})",
                    args.preset,
                    SamplerConfig::PRESETS.join(", ")
                ))
            })?;
            (args.preset.clone(), cfg)
        }
    };
    args.sampler.apply(&mut cfg)?;
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok((name, cfg))
}

/// Draws sample `i`. Tail truncation that removes every item is retried
/// with fresh streams, then skipped.
pub fn sample_instance(
    i: u64,
    windows: &[GenomeWindow],
    cfg: &SamplerConfig,
    render_cfg: &RenderConfig,
) -> Result<TaskInstance, TaskError> {
    let seed = cfg.seed;
    let task = sample_task(cfg, &mut sample_rng(seed, i, stream::TASK));
    let w = &windows[sample_rng(seed, i, stream::WINDOW).gen_range(0..windows.len())];
    let variant = sample_prompt_variant(&cfg.curriculum, i, &mut sample_rng(seed, i, stream::VARIANT));
    let doc = render_document(&w.sequence, render_cfg)?;
    for attempt in 0..MAX_TRUNCATION_RETRIES {
        let mut rng = if attempt == 0 {
            sample_rng(seed, i, stream::SPANS)
        } else {
            retry_rng(seed, i, stream::SPANS, attempt)
        };
        match build_instance(task, &doc, variant, cfg, &mut rng) {
            Err(TaskError::AllItemsTruncated(_)) => continue,
            other => return other,
        }
    }
    let untruncated = SamplerConfig {
        trunc_base: 0.0,
        trunc_max: 0.0,
        ..cfg.clone()
    };
    build_instance(
        task,
        &doc,
        variant,
        &untruncated,
        &mut sample_rng(seed, i, stream::RETRY),
    )
}

pub fn sample_id(i: usize) -> String {
    format!("{i:08}")
}

pub fn run(cli: &Cli, args: &GenArgs) -> Result<(), CliError> {
    let (preset, mut cfg) = sampler_config(args)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let render_cfg = args.layout.render_config()?;
    let default_windows = if preset == "rice" {
        WindowPreset::RICE
    } else {
        WindowPreset::HG38
    };
    let wp = args
        .layout
        .windowing(Some(default_windows))?
        .expect("default windowing");
    if args.shard_size == 0 {
        return Err(CliError::Config("--shard-size must be positive".into()));
    }

    let records = read_fasta(&args.fasta)?;
    let windows: Vec<GenomeWindow> = records
        .iter()
        .flat_map(|r| extract_windows(r, wp.window, wp.stride))
        .collect();
    if windows.is_empty() && args.count > 0 {
        return Err(CliError::Config(format!(
            "no record is at least {} bases long",
            wp.window
        )));
    }

    let out = &cli.out;
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let pool = thread_pool(cli.workers)?;
    let mut writer = ShardWriter::new(out, args.shard_size)?;
    let mut task_counts: BTreeMap<String, usize> = TaskId::ALL.iter().map(|t| (t.to_string(), 0)).collect();
    let mut variant_counts: BTreeMap<String, usize> = PromptVariant::ORDER
        .iter()
        .map(|v| (v.as_str().to_string(), 0))
        .collect();

    for start in (0..args.count).step_by(BATCH) {
        let end = (start + BATCH).min(args.count);
        let batch: Vec<Result<DatasetRecord, CliError>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let inst = sample_instance(i as u64, &windows, &cfg, &render_cfg)
                        .map_err(|e| CliError::Config(format!("sample {i}: {e}")))?;
                    Ok(serialize_instance(&inst, out, &sample_id(i))?)
                })
                .collect()
        });
        for rec in batch {
            let rec = rec?;
            *task_counts.get_mut(rec.task.as_str()).expect("task key") += 1;
            *variant_counts
                .get_mut(rec.prompt_variant.as_str())
                .expect("variant key") += 1;
            writer.append(&rec)?;
        }
        log::info!("{end}/{} samples", args.count);
    }
    let shards = writer.finish()?;

    let manifest = Manifest {
        tool: "dnadoc".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        preset,
        seed: cfg.seed,
        count: args.count,
        shard_size: args.shard_size,
        shards: shards
            .iter()
            .map(|p| p.file_name().expect("shard file").to_string_lossy().into_owned())
            .collect(),
        task_counts,
        prompt_variant_counts: variant_counts,
        windows: WindowInfo {
            window: wp.window,
            stride: wp.stride,
            n_windows: windows.len(),
        },
        render_config: render_cfg,
        sampler: SamplerConfigFile::from(&cfg),
    };
    let path = out.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    fs::write(&path, body).map_err(|e| io_error(&path, e))?;
    println!(
        "wrote {} samples in {} shards to {}",
        args.count,
        manifest.shards.len(),
        out.display()
    );
    for (t, n) in &manifest.task_counts {
        println!("  {t}: {n}");
    }
    Ok(())
}
