//! Deterministic page rendering with per-nucleotide pixel annotations.
//!
//! A [`DnaDocument`] is the rendered form of one sequence: an ordered list
//! of RGB pages plus one [`NucleotideAnnotation`] per base. The layout is a
//! fixed grid of glyph cells, so every box is known exactly without a font
//! engine.

mod document;
mod font;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use document::{page_capacity, render_document, DnaDocument, Page, RowSpan};
pub use font::{draw_glyph, glyph_bitmap, GLYPH_COLS, GLYPH_ROWS};

pub const WHITE: [u8; 3] = [255, 255, 255];
pub const BLACK: [u8; 3] = [0, 0, 0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("page geometry cannot fit a single glyph: {0}")]
    ConfigTooSmall(String),
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
    #[error("cannot render an empty sequence")]
    EmptySequence,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("region selects no glyphs")]
    EmptyRegion,
    #[error("region selects a non-contiguous set of bases")]
    NonContiguousSelection,
}

/// Half-open pixel rectangle `[x1, x2) x [y1, y2)`.
///
/// Serialized as a 4-element array `[x1, y1, x2, y2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct PixelBox {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl PixelBox {
    pub const fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> u32 {
        self.x2.saturating_sub(self.x1)
    }

    pub fn height(&self) -> u32 {
        self.y2.saturating_sub(self.y1)
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn is_degenerate(&self) -> bool {
        self.x1 >= self.x2 || self.y1 >= self.y2
    }

    pub fn union(&self, other: &PixelBox) -> PixelBox {
        PixelBox {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }

    pub fn intersection_area(&self, other: &PixelBox) -> u64 {
        let w = self.x2.min(other.x2).saturating_sub(self.x1.max(other.x1));
        let h = self.y2.min(other.y2).saturating_sub(self.y1.max(other.y1));
        w as u64 * h as u64
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x2 <= width && self.y2 <= height
    }

    /// Whether the box center lies inside `region` (half-open on both axes).
    pub fn center_in(&self, region: &PixelBox) -> bool {
        // doubled coordinates keep the center integral
        let cx = self.x1 + self.x2;
        let cy = self.y1 + self.y2;
        2 * region.x1 <= cx && cx < 2 * region.x2 && 2 * region.y1 <= cy && cy < 2 * region.y2
    }

    pub fn coords(&self) -> [u32; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }
}

impl From<[u32; 4]> for PixelBox {
    fn from(c: [u32; 4]) -> Self {
        PixelBox::new(c[0], c[1], c[2], c[3])
    }
}

impl From<PixelBox> for [u32; 4] {
    fn from(b: PixelBox) -> Self {
        b.coords()
    }
}

/// A box on a specific page, `[img_id, x1, y1, x2, y2]` on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 5]", into = "[u32; 5]")]
pub struct RegionRef {
    pub img_id: u32,
    pub bbox: PixelBox,
}

impl RegionRef {
    pub const fn new(img_id: u32, bbox: PixelBox) -> Self {
        Self { img_id, bbox }
    }

    pub fn to_array(&self) -> [u32; 5] {
        [self.img_id, self.bbox.x1, self.bbox.y1, self.bbox.x2, self.bbox.y2]
    }
}

impl From<[u32; 5]> for RegionRef {
    fn from(c: [u32; 5]) -> Self {
        RegionRef::new(c[0], PixelBox::new(c[1], c[2], c[3], c[4]))
    }
}

impl From<RegionRef> for [u32; 5] {
    fn from(r: RegionRef) -> Self {
        r.to_array()
    }
}

/// One glyph record. Field names match the annotation sidecar format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NucleotideAnnotation {
    #[serde(with = "char_as_string")]
    pub char: u8,
    pub char_index: usize,
    pub page_index: usize,
    pub page_char_index: usize,
    pub page_bbox: PixelBox,
}

mod char_as_string {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &u8, s: S) -> Result<S::Ok, S::Error> {
        let buf = [*c];
        s.serialize_str(std::str::from_utf8(&buf).map_err(serde::ser::Error::custom)?)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u8, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_bytes() {
            [c] if crate::genome_io::is_base(*c) => Ok(*c),
            _ => Err(D::Error::custom(format!("invalid nucleotide {s:?}"))),
        }
    }
}

/// Page geometry and typography.
///
/// Glyph metrics are given at `font_size = 14` and scale linearly with
/// `font_size / 14`, rounded to whole pixels. Row pitch is
/// `round(font_size * line_spacing)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub page_width: u32,
    pub page_height: u32,
    pub font_size: f64,
    pub line_spacing: f64,
    pub margin_x: u32,
    pub margin_y: u32,
    pub glyph_advance: u32,
    pub glyph_top_offset: u32,
    pub glyph_height: u32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            page_width: 640,
            page_height: 640,
            font_size: 14.0,
            line_spacing: 1.6,
            margin_x: 20,
            margin_y: 20,
            glyph_advance: 9,
            glyph_top_offset: 3,
            glyph_height: 10,
        }
    }
}

const BASE_FONT_SIZE: f64 = 14.0;

/// Resolved pixel geometry for a [`RenderConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub advance: u32,
    pub top_offset: u32,
    pub glyph_height: u32,
    pub row_pitch: u32,
    pub glyphs_per_row: u32,
    pub rows_per_page: u32,
}

impl Layout {
    pub fn capacity(&self) -> usize {
        self.glyphs_per_row as usize * self.rows_per_page as usize
    }
}

impl RenderConfig {
    /// Square page at the given resolution with otherwise default metrics.
    pub fn with_resolution(resolution: u32) -> Self {
        Self {
            page_width: resolution,
            page_height: resolution,
            ..Self::default()
        }
    }

    fn scaled(&self, px: u32) -> u32 {
        if self.font_size == BASE_FONT_SIZE {
            px
        } else {
            (px as f64 * self.font_size / BASE_FONT_SIZE).round() as u32
        }
    }

    pub fn layout(&self) -> Result<Layout, RenderError> {
        if !(self.font_size.is_finite() && self.font_size > 0.0) {
            return Err(RenderError::InvalidConfig(format!(
                "font_size must be positive, got {}",
                self.font_size
            )));
        }
        if !(self.line_spacing.is_finite() && self.line_spacing > 0.0) {
            return Err(RenderError::InvalidConfig(format!(
                "line_spacing must be positive, got {}",
                self.line_spacing
            )));
        }
        let advance = self.scaled(self.glyph_advance);
        let top_offset = self.scaled(self.glyph_top_offset);
        let glyph_height = self.scaled(self.glyph_height);
        let row_pitch = (self.font_size * self.line_spacing).round() as u32;
        if advance == 0 || glyph_height == 0 {
            return Err(RenderError::InvalidConfig(
                "glyph advance and height must be at least 1px".into(),
            ));
        }
        if row_pitch < glyph_height {
            return Err(RenderError::InvalidConfig(format!(
                "row pitch {row_pitch}px is smaller than glyph height {glyph_height}px"
            )));
        }

        let right = self.page_width.saturating_sub(self.margin_x);
        let bottom = self.page_height.saturating_sub(self.margin_y);
        let glyph_bottom = self.margin_y as u64 + top_offset as u64 + glyph_height as u64;
        if (self.margin_x as u64 + advance as u64) > right as u64 || glyph_bottom > bottom as u64 {
            return Err(RenderError::ConfigTooSmall(format!(
                "{}x{} page with margins ({}, {}) and {}x{} glyphs",
                self.page_width, self.page_height, self.margin_x, self.margin_y, advance, glyph_height
            )));
        }
        let glyphs_per_row = (right - self.margin_x) / advance;
        // rows r with margin_y + r*pitch + top + height <= bottom
        let rows_per_page = ((bottom as u64 - glyph_bottom) / row_pitch as u64) as u32 + 1;
        Ok(Layout {
            advance,
            top_offset,
            glyph_height,
            row_pitch,
            glyphs_per_row,
            rows_per_page,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout() {
        let l = RenderConfig::default().layout().unwrap();
        assert_eq!(l.row_pitch, 22);
        assert_eq!(l.glyphs_per_row, 66);
        assert_eq!(l.rows_per_page, 27);
    }

    #[test]
    fn scaled_metrics_round() {
        let cfg = RenderConfig {
            font_size: 21.0,
            ..RenderConfig::default()
        };
        let l = cfg.layout().unwrap();
        // 9 * 1.5 = 13.5 -> 14, 3 * 1.5 = 4.5 -> 5, 10 * 1.5 = 15
        assert_eq!((l.advance, l.top_offset, l.glyph_height), (14, 5, 15));
        assert_eq!(l.row_pitch, 34);
    }

    #[test]
    fn box_center_uses_half_open_bounds() {
        let glyph = PixelBox::new(20, 23, 29, 33);
        assert!(glyph.center_in(&glyph));
        assert!(!glyph.center_in(&PixelBox::new(25, 23, 29, 33)));
        assert!(glyph.center_in(&PixelBox::new(24, 28, 25, 29)));
    }

    #[test]
    fn region_wire_shape() {
        let r = RegionRef::new(1, PixelBox::new(20, 23, 29, 33));
        assert_eq!(serde_json::to_string(&r).unwrap(), "[1,20,23,29,33]");
        let back: RegionRef = serde_json::from_str("[1,20,23,29,33]").unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn rejects_bad_font() {
        let cfg = RenderConfig {
            font_size: 0.0,
            ..RenderConfig::default()
        };
        assert!(matches!(cfg.layout(), Err(RenderError::InvalidConfig(_))));
    }
}
