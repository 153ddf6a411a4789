//! The `dnadoc` command line.
//!
//! Exit codes: 0 success, 1 parse or id errors, 2 configuration errors,
//! 3 I/O errors.

mod eval_cmd;
mod gen;
mod render_cmd;
mod verify;

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::eval::{token_budget, EvalError};
use crate::genome_io::{parse_fasta, DnaSequence, FastaError, WindowPreset};
use crate::render::RenderConfig;
use crate::wire::dataset::DatasetError;

pub use eval_cmd::{EvalArgs, PREDICTION_KEY};
pub use gen::{GenArgs, Manifest};
pub use render_cmd::RenderArgs;
pub use verify::VerifyArgs;

pub const OUT_DIR_ENV: &str = "DNADOC_OUT";

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Config(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } | DatasetError::Image { .. } => CliError::Io(e.to_string()),
            DatasetError::Json { .. } | DatasetError::Invalid { .. } => CliError::Parse(e.to_string()),
        }
    }
}

impl From<FastaError> for CliError {
    fn from(e: FastaError) -> Self {
        match e {
            FastaError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

pub(crate) fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "dnadoc",
    version,
    about = "Render DNA as page images, build grounding datasets, score responses"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "dnadoc-out")]
    pub out: PathBuf,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value = "warn", value_parser = ["off", "error", "warn", "info", "debug", "trace"])]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Render FASTA records (or windows of them) to PNG pages and annotation sidecars.
    Render(RenderArgs),
    /// Sample task instances into JSONL shards.
    GenDataset(GenArgs),
    /// Score predictions against a generated dataset.
    Eval(EvalArgs),
    /// Token budget and compression ratio for a page resolution.
    Stats(StatsArgs),
    /// Check every record of a shard against the dataset invariants.
    Verify(VerifyArgs),
}

/// Rendering and windowing flags shared by `render` and `gen-dataset`.
#[derive(Debug, Clone, Args)]
pub struct LayoutArgs {
    /// Square page resolution in pixels.
    #[arg(long, default_value_t = 640)]
    pub resolution: u32,
    #[arg(long)]
    pub font_size: Option<f64>,
    #[arg(long)]
    pub line_spacing: Option<f64>,
    /// Window preset: hg38 or rice.
    #[arg(long)]
    pub window_preset: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
}

impl LayoutArgs {
    pub fn render_config(&self) -> Result<RenderConfig, CliError> {
        let mut cfg = RenderConfig::with_resolution(self.resolution);
        if let Some(f) = self.font_size {
            cfg.font_size = f;
        }
        if let Some(s) = self.line_spacing {
            cfg.line_spacing = s;
        }
        cfg.layout().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// `None` means whole records.
    pub fn windowing(&self, default: Option<WindowPreset>) -> Result<Option<WindowPreset>, CliError> {
        let preset = match &self.window_preset {
            Some(name) => Some(
                WindowPreset::by_name(name)
                    .ok_or_else(|| CliError::Config(format!("unknown window preset {name:?}")))?,
            ),
            None => default,
        };
        let w = match (preset, self.window, self.stride) {
            (p, None, None) => p,
            (p, w, s) => {
                let window = w
                    .or(p.map(|p| p.window))
                    .ok_or_else(|| CliError::Config("--stride needs --window".into()))?;
                Some(WindowPreset {
                    window,
                    stride: s.or(p.map(|p| p.stride)).unwrap_or(window),
                })
            }
        };
        if let Some(p) = w {
            if p.window == 0 || p.stride == 0 {
                return Err(CliError::Config("window and stride must be positive".into()));
            }
        }
        Ok(w)
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub resolution: u32,
    pub pages: u64,
    pub bases: u64,
}

/// `-` reads standard input.
pub(crate) fn read_fasta(path: &Path) -> Result<Vec<DnaSequence>, CliError> {
    if path == Path::new("-") {
        return Ok(parse_fasta(std::io::stdin().lock())?);
    }
    let f = File::open(path).map_err(|e| io_error(path, e))?;
    Ok(parse_fasta(BufReader::new(f))?)
}

pub(crate) fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(e.to_string()))
}

fn cmd_stats(args: &StatsArgs) -> Result<(), CliError> {
    let b = token_budget(args.resolution, args.pages, args.bases).map_err(|e| match e {
        EvalError::UnsupportedResolution(_) | EvalError::InvalidInput(_) => CliError::Config(e.to_string()),
        other => CliError::Parse(other.to_string()),
    })?;
    println!("resolution  tokens/page  pages  bases  compression");
    println!(
        "{:>10}  {:>11}  {:>5}  {:>5}  {:>11.1}",
        b.resolution, b.tokens_per_page, b.pages, b.bases, b.compression
    );
    println!(
        "T={} P={} N={} compression={:.2}",
        b.tokens_per_page, b.pages, b.bases, b.compression
    );
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Render(a) => render_cmd::run(cli, a),
        Command::GenDataset(a) => gen::run(cli, a),
        Command::Eval(a) => eval_cmd::run(cli, a),
        Command::Stats(a) => cmd_stats(a),
        Command::Verify(a) => verify::run(cli, a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::new().parse_filters(&cli.log_level).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dnadoc: {e}");
            e.code()
        }
    }
}
