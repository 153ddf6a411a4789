use serde::{Deserialize, Serialize};

use super::TaskError;

/// Linear prompt-length curriculum over (LONG, MEDIUM, SHORT).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSchedule {
    pub start_dist: [f64; 3],
    pub end_dist: [f64; 3],
    pub total_steps: u64,
}

impl CurriculumSchedule {
    pub fn new(start_dist: [f64; 3], end_dist: [f64; 3], total_steps: u64) -> Result<Self, TaskError> {
        let s = Self {
            start_dist,
            end_dist,
            total_steps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        for (name, d) in [("start", &self.start_dist), ("end", &self.end_dist)] {
            if d.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || d.iter().sum::<f64>() <= 0.0 {
                return Err(TaskError::InvalidConfig(format!(
                    "{name} prompt-length distribution must be non-negative with positive sum"
                )));
            }
        }
        if self.total_steps == 0 {
            return Err(TaskError::InvalidConfig("annealing needs at least one step".into()));
        }
        Ok(())
    }
}

impl Default for CurriculumSchedule {
    fn default() -> Self {
        Self {
            start_dist: [0.2, 0.2, 0.6],
            end_dist: [0.1, 0.1, 0.8],
            total_steps: 112_500,
        }
    }
}

/// All knobs of the instance samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Unnormalized categorical weights over T1..T6.
    pub task_weights: [f64; 6],
    pub trunc_base: f64,
    pub trunc_max: f64,
    pub span_base_min: usize,
    pub span_base_max: usize,
    pub span_count_min: usize,
    pub span_count_max: usize,
    pub unique_lines: bool,
    pub query_len_min: usize,
    pub query_len_max: usize,
    pub allow_overlap: bool,
    /// Probability that a T5 query is drawn absent from the document.
    pub t5_negative_rate: f64,
    pub curriculum: CurriculumSchedule,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self::hg38_stage1()
    }
}

impl SamplerConfig {
    pub const PRESETS: [&'static str; 3] = ["hg38-stage1", "hg38-stage2", "rice"];

    pub fn hg38_stage1() -> Self {
        Self {
            task_weights: [0.25, 0.20, 0.15, 0.15, 0.15, 0.10],
            trunc_base: 0.0,
            trunc_max: 0.5,
            span_base_min: 1,
            span_base_max: 8,
            span_count_min: 1,
            span_count_max: 3,
            unique_lines: true,
            query_len_min: 6,
            query_len_max: 64,
            allow_overlap: true,
            t5_negative_rate: 0.1,
            curriculum: CurriculumSchedule::default(),
            seed: 0,
        }
    }

    pub fn hg38_stage2() -> Self {
        Self {
            task_weights: [0.17, 0.17, 0.17, 0.17, 0.17, 0.15],
            trunc_max: 0.98,
            query_len_max: 32,
            curriculum: CurriculumSchedule {
                total_steps: 1,
                ..CurriculumSchedule::default()
            },
            ..Self::hg38_stage1()
        }
    }

    pub fn rice() -> Self {
        Self {
            curriculum: CurriculumSchedule::default(),
            ..Self::hg38_stage2()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "hg38-stage1" => Some(Self::hg38_stage1()),
            "hg38-stage2" => Some(Self::hg38_stage2()),
            "rice" => Some(Self::rice()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        let bad = |msg: String| Err(TaskError::InvalidConfig(msg));
        if self.task_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("task weights must be finite and non-negative".into());
        }
        if self.task_weights.iter().sum::<f64>() <= 0.0 {
            return bad("task weights must have a positive sum".into());
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.trunc_base) || !unit(self.trunc_max) || self.trunc_base > self.trunc_max {
            return bad(format!(
                "tail truncation needs 0 <= base <= max <= 1, got ({}, {})",
                self.trunc_base, self.trunc_max
            ));
        }
        if !unit(self.t5_negative_rate) {
            return bad("t5_negative_rate must lie in [0, 1]".into());
        }
        for (name, lo, hi) in [
            ("line span base", self.span_base_min, self.span_base_max),
            ("line span count", self.span_count_min, self.span_count_max),
            ("subseq locate length", self.query_len_min, self.query_len_max),
        ] {
            if lo < 1 || lo > hi {
                return bad(format!("{name} range ({lo}, {hi}) needs 1 <= min <= max"));
            }
        }
        self.curriculum.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self, TaskError> {
        let file: SamplerConfigFile = toml::from_str(text).map_err(|e| TaskError::InvalidConfig(e.to_string()))?;
        let cfg = Self::from(file);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&SamplerConfigFile::from(self)).expect("sampler config serializes")
    }
}

/// On-disk form of [`SamplerConfig`], keyed like the hyperparameter
/// tables. Missing keys take the `hg38-stage1` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfigFile {
    pub task_sampling: [f64; 6],
    pub tail_truncation: [f64; 2],
    pub line_span_base: [usize; 2],
    pub line_span_samp: [usize; 2],
    pub unique_lines: bool,
    pub subseq_locate_length: [usize; 2],
    pub allow_overlap: bool,
    pub annealed_sampler_total_steps: u64,
    pub prompt_length_start: [f64; 3],
    pub prompt_length_end: [f64; 3],
    pub t5_negative_rate: f64,
    pub seed: u64,
}

impl Default for SamplerConfigFile {
    fn default() -> Self {
        Self::from(&SamplerConfig::hg38_stage1())
    }
}

impl From<&SamplerConfig> for SamplerConfigFile {
    fn from(c: &SamplerConfig) -> Self {
        Self {
            task_sampling: c.task_weights,
            tail_truncation: [c.trunc_base, c.trunc_max],
            line_span_base: [c.span_base_min, c.span_base_max],
            line_span_samp: [c.span_count_min, c.span_count_max],
            unique_lines: c.unique_lines,
            subseq_locate_length: [c.query_len_min, c.query_len_max],
            allow_overlap: c.allow_overlap,
            annealed_sampler_total_steps: c.curriculum.total_steps,
            prompt_length_start: c.curriculum.start_dist,
            prompt_length_end: c.curriculum.end_dist,
            t5_negative_rate: c.t5_negative_rate,
            seed: c.seed,
        }
    }
}

impl From<SamplerConfigFile> for SamplerConfig {
    fn from(f: SamplerConfigFile) -> Self {
        Self {
            task_weights: f.task_sampling,
            trunc_base: f.tail_truncation[0],
            trunc_max: f.tail_truncation[1],
            span_base_min: f.line_span_base[0],
            span_base_max: f.line_span_base[1],
            span_count_min: f.line_span_samp[0],
            span_count_max: f.line_span_samp[1],
            unique_lines: f.unique_lines,
            query_len_min: f.subseq_locate_length[0],
            query_len_max: f.subseq_locate_length[1],
            allow_overlap: f.allow_overlap,
            t5_negative_rate: f.t5_negative_rate,
            curriculum: CurriculumSchedule {
                start_dist: f.prompt_length_start,
                end_dist: f.prompt_length_end,
                total_steps: f.annealed_sampler_total_steps,
            },
            seed: f.seed,
        }
    }
}
