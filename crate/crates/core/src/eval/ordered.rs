use serde::{Deserialize, Serialize};

use super::metrics::{edit_distance, iou, linf};
use super::EvalError;
use crate::tasks::TaskId;
use crate::wire::grammar::{parse_grounded_line, response_lines};
use crate::wire::GroundedItem;

pub const DEFAULT_T5_THRESHOLDS: [f64; 4] = [0.5, 0.9, 0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchCriteria {
    pub iou_threshold: f64,
}

impl MatchCriteria {
    pub fn new(iou_threshold: f64) -> Result<Self, EvalError> {
        if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
            return Err(EvalError::InvalidThreshold(iou_threshold));
        }
        Ok(Self { iou_threshold })
    }
}

impl Default for MatchCriteria {
    fn default() -> Self {
        Self { iou_threshold: 0.99 }
    }
}

/// One predicted line. Lines that fail the grammar stay in place so they
/// count against the metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictedLine {
    Item(GroundedItem),
    Malformed(String),
}

/// Splits a model response into lines and parses each independently.
/// For T5 every box becomes its own item.
pub fn parse_prediction_lines(text: &str, task: TaskId) -> Vec<PredictedLine> {
    let lines: Vec<PredictedLine> = response_lines(text)
        .into_iter()
        .enumerate()
        .map(|(i, l)| match parse_grounded_line(l, task, i + 1) {
            Ok(item) => PredictedLine::Item(item),
            Err(e) => PredictedLine::Malformed(e.to_string()),
        })
        .collect();
    if task != TaskId::T5 {
        return lines;
    }
    lines
        .into_iter()
        .flat_map(|p| match p {
            PredictedLine::Item(item) => expand_t5(&[item]).into_iter().map(PredictedLine::Item).collect(),
            m => vec![m],
        })
        .collect()
}

/// One item per box; an empty box list stays as one box-less item.
pub fn expand_t5(items: &[GroundedItem]) -> Vec<GroundedItem> {
    let mut out = Vec::new();
    for item in items {
        if item.boxes.is_empty() {
            out.push(item.clone());
        }
        for b in &item.boxes {
            out.push(GroundedItem {
                sequence: item.sequence.clone(),
                boxes: vec![*b],
            });
        }
    }
    out
}

/// Per-sample ordered-alignment results.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMetrics {
    pub lcm: bool,
    pub text: Vec<bool>,
    pub det: Vec<bool>,
    pub cer: Vec<f64>,
    /// IoU of the first boxes for aligned pairs where at least one side declares a box.
    pub ious: Vec<f64>,
    /// Coordinate ℓ∞ for aligned pairs where both sides declare a box.
    pub linfs: Vec<f64>,
}

fn mean(v: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

fn rate(v: &[bool]) -> f64 {
    mean(v.iter().map(|&b| f64::from(u8::from(b)))).unwrap_or(0.0)
}

impl SampleMetrics {
    pub fn joint(&self) -> Vec<bool> {
        self.text.iter().zip(&self.det).map(|(t, d)| *t && *d).collect()
    }

    pub fn text_em(&self) -> f64 {
        rate(&self.text)
    }

    pub fn det_acc(&self) -> f64 {
        rate(&self.det)
    }

    pub fn joint_rate(&self) -> f64 {
        rate(&self.joint())
    }

    pub fn strict(&self) -> bool {
        self.lcm && self.joint().iter().all(|&j| j)
    }

    pub fn text_cer(&self) -> f64 {
        mean(self.cer.iter().copied()).unwrap_or(0.0)
    }

    pub fn det_iou_avg(&self) -> Option<f64> {
        mean(self.ious.iter().copied())
    }

    pub fn linf_err(&self) -> Option<f64> {
        mean(self.linfs.iter().copied())
    }
}

fn pair_iou(g: &GroundedItem, p: &GroundedItem) -> f64 {
    match (g.boxes.first(), p.boxes.first()) {
        (Some(a), Some(b)) => iou(a, b).unwrap_or(0.0),
        _ => 0.0,
    }
}

fn boxes_match(g: &GroundedItem, p: &GroundedItem, tau: f64) -> bool {
    g.boxes.len() == p.boxes.len()
        && g.boxes
            .iter()
            .zip(&p.boxes)
            .all(|(a, b)| iou(a, b).is_ok_and(|v| v >= tau))
}

/// Scores `pred` against `gt` line by line. Item `i` of the prediction is
/// compared only with item `i` of the ground truth; extra predictions only
/// affect LCM.
pub fn evaluate_ordered(
    gt: &[GroundedItem],
    pred: &[PredictedLine],
    crit: &MatchCriteria,
) -> Result<SampleMetrics, EvalError> {
    if gt.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let n = gt.len();
    let mut m = SampleMetrics {
        lcm: pred.len() == n,
        text: Vec::with_capacity(n),
        det: Vec::with_capacity(n),
        cer: Vec::with_capacity(n),
        ious: Vec::new(),
        linfs: Vec::new(),
    };
    for (i, g) in gt.iter().enumerate() {
        if g.sequence.is_empty() {
            return Err(EvalError::EmptyGroundTruth);
        }
        match pred.get(i) {
            Some(PredictedLine::Item(p)) => {
                m.text.push(p.sequence == g.sequence);
                m.det.push(boxes_match(g, p, crit.iou_threshold));
                m.cer
                    .push(edit_distance(&g.sequence, &p.sequence) as f64 / g.sequence.chars().count() as f64);
                if !(g.boxes.is_empty() && p.boxes.is_empty()) {
                    m.ious.push(pair_iou(g, p));
                }
                if let (Some(a), Some(b)) = (g.boxes.first(), p.boxes.first()) {
                    m.linfs.push(linf(a, b));
                }
            }
            Some(PredictedLine::Malformed(_)) => {
                m.text.push(false);
                m.det.push(false);
                m.cer.push(1.0);
                if !g.boxes.is_empty() {
                    m.ious.push(0.0);
                }
            }
            None => {
                m.text.push(false);
                m.det.push(false);
                m.cer.push(1.0);
            }
        }
    }
    Ok(m)
}

/// Corpus means of the per-sample values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedEvalReport {
    pub lcm: f64,
    pub text_em: f64,
    pub text_cer: f64,
    pub det_acc: f64,
    pub det_iou_avg: f64,
    pub joint: f64,
    pub strict: f64,
    pub linf_err: f64,
    pub n_samples: usize,
}

/// Running sums for [`OrderedEvalReport`]. Samples are folded in the order
/// they are pushed.
#[derive(Debug, Clone, Default)]
pub struct OrderedAccumulator {
    n: usize,
    lcm: f64,
    text_em: f64,
    text_cer: f64,
    det_acc: f64,
    joint: f64,
    strict: f64,
    iou_sum: f64,
    iou_n: usize,
    linf_sum: f64,
    linf_n: usize,
}

impl OrderedAccumulator {
    pub fn push(&mut self, m: &SampleMetrics) {
        let b = |x: bool| f64::from(u8::from(x));
        self.n += 1;
        self.lcm += b(m.lcm);
        self.text_em += m.text_em();
        self.text_cer += m.text_cer();
        self.det_acc += m.det_acc();
        self.joint += m.joint_rate();
        self.strict += b(m.strict());
        if let Some(v) = m.det_iou_avg() {
            self.iou_sum += v;
            self.iou_n += 1;
        }
        if let Some(v) = m.linf_err() {
            self.linf_sum += v;
            self.linf_n += 1;
        }
    }

    pub fn finish(&self) -> OrderedEvalReport {
        let n = self.n.max(1) as f64;
        let avg = |s: f64, k: usize| if k == 0 { 0.0 } else { s / k as f64 };
        OrderedEvalReport {
            lcm: self.lcm / n,
            text_em: self.text_em / n,
            text_cer: self.text_cer / n,
            det_acc: self.det_acc / n,
            det_iou_avg: avg(self.iou_sum, self.iou_n),
            joint: self.joint / n,
            strict: self.strict / n,
            linf_err: avg(self.linf_sum, self.linf_n),
            n_samples: self.n,
        }
    }
}

pub fn evaluate_corpus(
    pairs: &[(Vec<GroundedItem>, Vec<PredictedLine>)],
    crit: &MatchCriteria,
) -> Result<OrderedEvalReport, EvalError> {
    let mut acc = OrderedAccumulator::default();
    for (gt, pred) in pairs {
        acc.push(&evaluate_ordered(gt, pred, crit)?);
    }
    Ok(acc.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub iou_threshold: f64,
    #[serde(flatten)]
    pub report: OrderedEvalReport,
}

/// One corpus report per threshold. Items should already be expanded with
/// [`expand_t5`] / [`parse_prediction_lines`].
pub fn evaluate_t5(
    pairs: &[(Vec<GroundedItem>, Vec<PredictedLine>)],
    thresholds: &[f64],
) -> Result<Vec<ThresholdRow>, EvalError> {
    thresholds
        .iter()
        .map(|&t| {
            let crit = MatchCriteria::new(t)?;
            Ok(ThresholdRow {
                iou_threshold: t,
                report: evaluate_corpus(pairs, &crit)?,
            })
        })
        .collect()
}

/// Fraction of exactly equal labels.
pub fn evaluate_t6<G: AsRef<str>, P: AsRef<str>>(gt: &[G], pred: &[P]) -> Result<f64, EvalError> {
    if gt.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gt: gt.len(),
            pred: pred.len(),
        });
    }
    if gt.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let hits = gt
        .iter()
        .zip(pred)
        .filter(|(g, p)| g.as_ref() == p.as_ref().trim())
        .count();
    Ok(hits as f64 / gt.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::{PixelBox, RegionRef};
    use proptest::prelude::*;

    fn item(seq: &str, x: u32) -> GroundedItem {
        GroundedItem {
            sequence: seq.into(),
            boxes: vec![RegionRef::new(0, PixelBox::new(x, 23, x + 9, 33))],
        }
    }

    fn as_pred(v: &[GroundedItem]) -> Vec<PredictedLine> {
        v.iter().cloned().map(PredictedLine::Item).collect()
    }

    fn gt4() -> Vec<GroundedItem> {
        vec![item("ACGT", 20), item("TTTT", 40), item("GGCA", 60), item("NACG", 80)]
    }

    #[test]
    fn perfect_prediction() {
        let g = gt4();
        let m = evaluate_ordered(&g, &as_pred(&g), &MatchCriteria::default()).unwrap();
        assert!(m.lcm && m.strict());
        assert_eq!(
            (m.text_em(), m.det_acc(), m.joint_rate(), m.text_cer()),
            (1.0, 1.0, 1.0, 0.0)
        );
        assert_eq!(m.linf_err(), Some(0.0));
        assert_eq!(m.det_iou_avg(), Some(1.0));
    }

    #[test]
    fn one_wrong_sequence() {
        let g = gt4();
        let mut p = g.clone();
        p[2].sequence = "GGCC".into();
        let m = evaluate_ordered(&g, &as_pred(&p), &MatchCriteria::default()).unwrap();
        assert_eq!(m.text_em(), 0.75);
        assert_eq!(m.joint_rate(), 0.75);
        assert_eq!(m.det_acc(), 1.0);
        assert!(!m.strict());
        assert!((m.text_cer() - 0.25 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn missing_line() {
        let g = gt4();
        let m = evaluate_ordered(&g, &as_pred(&g[..3]), &MatchCriteria::default()).unwrap();
        assert!(!m.lcm);
        assert!(!m.text[3] && !m.det[3]);
        assert_eq!(m.cer[3], 1.0);
        assert_eq!(m.linfs.len(), 3);
    }

    #[test]
    fn extra_lines_only_hit_lcm() {
        let g = gt4();
        let mut p = as_pred(&g);
        p.push(PredictedLine::Malformed("junk".into()));
        let m = evaluate_ordered(&g, &p, &MatchCriteria::default()).unwrap();
        assert!(!m.lcm);
        assert_eq!(m.joint_rate(), 1.0);
    }

    #[test]
    fn malformed_lines_are_wrong_but_present() {
        let g = gt4();
        let text = "<|ref|>ACGT<|/ref|><|det|>[[0,20,23,29,33]]<|/det|>\ngarbage\n\
            <|ref|>GGCA<|/ref|><|det|>[[0,60,23,69,33]]<|/det|>\n<|ref|>NACG<|/ref|><|det|>[[0,80,23,89,33]]<|/det|>";
        let p = parse_prediction_lines(text, TaskId::T2);
        assert!(matches!(p[1], PredictedLine::Malformed(_)));
        let m = evaluate_ordered(&g, &p, &MatchCriteria::default()).unwrap();
        assert!(m.lcm);
        assert_eq!(m.text, [true, false, true, true]);
        assert_eq!(m.det, [true, false, true, true]);
    }

    #[test]
    fn empty_gt_rejected() {
        assert_eq!(
            evaluate_ordered(&[], &[], &MatchCriteria::default()),
            Err(EvalError::EmptyGroundTruth)
        );
        assert!(MatchCriteria::new(0.0).is_err());
        assert!(MatchCriteria::new(1.0).is_ok());
    }

    #[test]
    fn t5_threshold_table() {
        let g = vec![GroundedItem {
            sequence: "ACGTAC".into(),
            boxes: vec![RegionRef::new(0, PixelBox::new(20, 23, 29, 33))],
        }];
        let p = vec![PredictedLine::Item(GroundedItem {
            sequence: "ACGTAC".into(),
            boxes: vec![RegionRef::new(0, PixelBox::new(21, 23, 30, 33))],
        })];
        let rows = evaluate_t5(&[(g.clone(), p)], &DEFAULT_T5_THRESHOLDS).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].report.det_acc, 1.0);
        assert_eq!(rows[1].report.det_acc, 0.0);
        assert_eq!(rows[3].report.det_acc, 0.0);
        assert!(rows.iter().all(|r| r.report.text_em == 1.0));
        let perfect = evaluate_t5(&[(g.clone(), as_pred(&g))], &DEFAULT_T5_THRESHOLDS).unwrap();
        assert!(perfect
            .iter()
            .all(|r| r.report.strict == 1.0 && r.report.det_acc == 1.0));
    }

    #[test]
    fn t5_expansion_and_empty_lists() {
        let text = "<|ref|>ACG<|/ref|><|det|>[[0,20,23,47,33],[0,47,23,74,33]]<|/det|>";
        let p = parse_prediction_lines(text, TaskId::T5);
        assert_eq!(p.len(), 2);
        let none = GroundedItem {
            sequence: "ACG".into(),
            boxes: vec![],
        };
        let m = evaluate_ordered(
            &expand_t5(&[none.clone()]),
            &as_pred(&[none]),
            &MatchCriteria::default(),
        )
        .unwrap();
        assert!(m.strict());
        assert!(m.ious.is_empty() && m.linfs.is_empty());
    }

    #[test]
    fn t6_accuracy() {
        assert_eq!(evaluate_t6(&["chr1", "chr2"], &["chr1", "chr2"]).unwrap(), 1.0);
        assert_eq!(
            evaluate_t6(&["chr1", "chr2", "chr3", "chrX"], &["chr1", "chr2", "chr3", "chrY"]).unwrap(),
            0.75
        );
        assert_eq!(evaluate_t6(&["chr1", "chrX"], &["unknown", "unknown"]).unwrap(), 0.0);
        assert_eq!(
            evaluate_t6(&["chr1"], &["chr1", "chr2"]),
            Err(EvalError::LengthMismatch { gt: 1, pred: 2 })
        );
    }

    #[test]
    fn corpus_means() {
        let g = gt4();
        let mut wrong = g.clone();
        wrong[0].sequence = "A".into();
        let r = evaluate_corpus(
            &[(g.clone(), as_pred(&g)), (g.clone(), as_pred(&wrong))],
            &MatchCriteria::default(),
        )
        .unwrap();
        assert_eq!(r.n_samples, 2);
        assert_eq!(r.strict, 0.5);
        assert_eq!(r.text_em, (1.0 + 0.75) / 2.0);
        assert_eq!(r.lcm, 1.0);
    }

    fn arb_items() -> impl Strategy<Value = Vec<GroundedItem>> {
        prop::collection::vec(("[ACGT]{1,6}", 0u32..100, 0u32..100, 1u32..20, 1u32..20), 1..6).prop_map(|v| {
            v.into_iter()
                .map(|(s, x, y, w, h)| GroundedItem {
                    sequence: s,
                    boxes: vec![RegionRef::new(0, PixelBox::new(x, y, x + w, y + h))],
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn self_evaluation_is_perfect(g in arb_items()) {
            let m = evaluate_ordered(&g, &as_pred(&g), &MatchCriteria::default()).unwrap();
            prop_assert!(m.strict());
            prop_assert_eq!(m.text_cer(), 0.0);
            prop_assert_eq!(m.linf_err(), Some(0.0));
        }

        #[test]
        fn orderings_hold(g in arb_items(), p in arb_items(), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let pred = as_pred(&p);
            let a = evaluate_ordered(&g, &pred, &MatchCriteria::new(lo).unwrap()).unwrap();
            let b = evaluate_ordered(&g, &pred, &MatchCriteria::new(hi).unwrap()).unwrap();
            prop_assert!(b.det_acc() <= a.det_acc());
            prop_assert_eq!(&a.text, &b.text);
            let strict = f64::from(u8::from(a.strict()));
            prop_assert!(strict <= a.joint_rate());
            prop_assert!(a.joint_rate() <= a.text_em().min(a.det_acc()));
        }
    }
}
