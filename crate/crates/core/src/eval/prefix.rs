use serde::{Deserialize, Serialize};

use super::metrics::edit_distance;
use super::EvalError;

/// Prefix length for ratio `k/10` of an `n`-base target: `ceil(k*n/10)`.
pub fn prefix_len(k: usize, n: usize) -> usize {
    (k * n).div_ceil(10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixRow {
    pub ratio: f64,
    pub em_rate: f64,
    pub cs_rate: f64,
}

/// EM and CS (both in percent) at prefix ratios 10%..100%.
///
/// CS is `100 * (1 - ED(gt[..L], pred[..L]) / max(L, |pred[..L]|))`, a
/// toolkit definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixReport {
    pub rows: Vec<PrefixRow>,
    pub n_samples: usize,
}

fn prefix(s: &str, l: usize) -> &str {
    &s[..l.min(s.len())]
}

fn sample_scores(gt: &str, pred: &str) -> Result<[(f64, f64); 10], EvalError> {
    if gt.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    if !gt.is_ascii() || !pred.is_ascii() {
        return Err(EvalError::InvalidInput("transcripts must be ASCII".into()));
    }
    let mut out = [(0.0, 0.0); 10];
    for (k, slot) in (1..=10).zip(out.iter_mut()) {
        let l = prefix_len(k, gt.len());
        let (g, p) = (&gt[..l], prefix(pred, l));
        let em = if g == p { 100.0 } else { 0.0 };
        let cs = 100.0 * (1.0 - edit_distance(g, p) as f64 / l.max(p.len()) as f64);
        *slot = (em, cs);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct PrefixAccumulator {
    n: usize,
    sums: [(f64, f64); 10],
}

impl PrefixAccumulator {
    pub fn push(&mut self, gt: &str, pred: &str) -> Result<(), EvalError> {
        let s = sample_scores(gt, pred)?;
        for (acc, (em, cs)) in self.sums.iter_mut().zip(s) {
            acc.0 += em;
            acc.1 += cs;
        }
        self.n += 1;
        Ok(())
    }

    pub fn finish(&self) -> PrefixReport {
        let n = self.n.max(1) as f64;
        PrefixReport {
            rows: self
                .sums
                .iter()
                .enumerate()
                .map(|(i, (em, cs))| PrefixRow {
                    ratio: (i + 1) as f64 / 10.0,
                    em_rate: em / n,
                    cs_rate: cs / n,
                })
                .collect(),
            n_samples: self.n,
        }
    }
}

pub fn evaluate_prefix_transcription(gt: &str, pred: &str) -> Result<PrefixReport, EvalError> {
    let mut acc = PrefixAccumulator::default();
    acc.push(gt, pred)?;
    Ok(acc.finish())
}
