use super::EvalError;
use crate::render::{PixelBox, RegionRef};

/// Intersection over union of two half-open boxes on the same page.
pub fn box_iou(a: &PixelBox, b: &PixelBox) -> Result<f64, EvalError> {
    for x in [a, b] {
        if x.is_degenerate() {
            return Err(EvalError::DegenerateBox(x.coords()));
        }
    }
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    Ok(inter as f64 / union as f64)
}

/// [`box_iou`], or 0 when the boxes sit on different pages.
pub fn iou(a: &RegionRef, b: &RegionRef) -> Result<f64, EvalError> {
    let v = box_iou(&a.bbox, &b.bbox)?;
    Ok(if a.img_id == b.img_id { v } else { 0.0 })
}

/// Largest absolute coordinate difference.
pub fn linf(a: &RegionRef, b: &RegionRef) -> f64 {
    a.bbox
        .coords()
        .iter()
        .zip(b.bbox.coords())
        .map(|(x, y)| x.abs_diff(y))
        .max()
        .unwrap_or(0) as f64
}

/// Levenshtein distance with unit insert/delete/substitute costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

pub fn text_cer(gt: &str, pred: &str) -> Result<f64, EvalError> {
    if gt.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    Ok(edit_distance(gt, pred) as f64 / gt.chars().count() as f64)
}
