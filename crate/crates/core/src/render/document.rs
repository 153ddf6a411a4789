use image::{Rgb, RgbImage};

use super::font::draw_glyph;
use super::{NucleotideAnnotation, PixelBox, RegionRef, RenderConfig, RenderError, WHITE};
use crate::genome_io::DnaSequence;

/// One rendered page and the glyph records drawn on it, in reading order.
#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub image: RgbImage,
    pub annotations: Vec<NucleotideAnnotation>,
}

/// A maximal run of glyphs sharing one rendered row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSpan {
    pub page: usize,
    /// Global index of the first base on the row.
    pub first_char: usize,
    pub len: usize,
    /// Position of the row's first glyph in `Page::annotations`.
    pub offset: usize,
}

impl RowSpan {
    pub fn end_char(&self) -> usize {
        self.first_char + self.len
    }
}

/// A sequence rendered into pages. Immutable once built; masking returns a
/// new document.
#[derive(Debug, Clone, PartialEq)]
pub struct DnaDocument {
    pages: Vec<Page>,
    config: RenderConfig,
    source_label: String,
    rows: Vec<RowSpan>,
}

/// Bases that fit on one page under `config`.
pub fn page_capacity(config: &RenderConfig) -> Result<usize, RenderError> {
    Ok(config.layout()?.capacity())
}

/// Renders `seq` left-to-right, top-to-bottom, continuing onto new pages.
///
/// Each glyph box is `(cursor_x, row_y + top, cursor_x + advance,
/// row_y + top + height)`; the cursor then moves to the box's right edge.
/// A row wraps when the next glyph would pass `page_width - margin_x`, and
/// a page breaks when the next row's glyph bottom would pass
/// `page_height - margin_y`.
pub fn render_document(seq: &DnaSequence, config: &RenderConfig) -> Result<DnaDocument, RenderError> {
    if seq.is_empty() {
        return Err(RenderError::EmptySequence);
    }
    let layout = config.layout()?;
    let right = config.page_width - config.margin_x;
    let bottom = config.page_height - config.margin_y;
    let (w, h) = (config.page_width, config.page_height);
    let blank = || RgbImage::from_raw(w, h, vec![WHITE[0]; w as usize * h as usize * 3]).expect("buffer size");

    let mut pages = Vec::with_capacity(seq.len().div_ceil(layout.capacity()));
    let mut image = blank();
    let mut annotations = Vec::with_capacity(layout.capacity().min(seq.len()));
    let mut cursor_x = config.margin_x;
    let mut row_y = config.margin_y;

    for (char_index, base) in seq.bases().bytes().enumerate() {
        if cursor_x + layout.advance > right {
            cursor_x = config.margin_x;
            row_y += layout.row_pitch;
        }
        if row_y + layout.top_offset + layout.glyph_height > bottom {
            pages.push(Page {
                image: std::mem::replace(&mut image, blank()),
                annotations: std::mem::take(&mut annotations),
            });
            cursor_x = config.margin_x;
            row_y = config.margin_y;
        }
        let y1 = row_y + layout.top_offset;
        let bbox = PixelBox::new(cursor_x, y1, cursor_x + layout.advance, y1 + layout.glyph_height);
        draw_glyph(&mut image, &bbox, base);
        annotations.push(NucleotideAnnotation {
            char: base,
            char_index,
            page_index: pages.len(),
            page_char_index: annotations.len(),
            page_bbox: bbox,
        });
        cursor_x = bbox.x2;
    }
    pages.push(Page { image, annotations });

    Ok(DnaDocument::from_parts(pages, config.clone(), seq.source_label()))
}

fn index_rows(pages: &[Page]) -> Vec<RowSpan> {
    let mut rows = Vec::new();
    for (page, p) in pages.iter().enumerate() {
        let mut current: Option<RowSpan> = None;
        for (pos, ann) in p.annotations.iter().enumerate() {
            let continues = current.is_some_and(|row| {
                let prev = &p.annotations[row.offset + row.len - 1];
                prev.page_bbox.y1 == ann.page_bbox.y1
                    && prev.page_bbox.x2 == ann.page_bbox.x1
                    && prev.char_index + 1 == ann.char_index
            });
            match current.as_mut() {
                Some(row) if continues => row.len += 1,
                _ => {
                    rows.extend(current.take());
                    current = Some(RowSpan {
                        page,
                        first_char: ann.char_index,
                        len: 1,
                        offset: pos,
                    });
                }
            }
        }
        rows.extend(current);
    }
    rows
}

impl DnaDocument {
    /// Assembles a document from stored pages; row structure is recovered
    /// from the annotation boxes.
    pub fn from_parts(pages: Vec<Page>, config: RenderConfig, source_label: impl Into<String>) -> Self {
        let rows = index_rows(&pages);
        Self {
            pages,
            config,
            source_label: source_label.into(),
            rows,
        }
    }

    pub fn pages(&self) -> &[Page] {
        &self.pages
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    pub fn config(&self) -> &RenderConfig {
        &self.config
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn rows(&self) -> &[RowSpan] {
        &self.rows
    }

    pub fn total_bases(&self) -> usize {
        self.pages.iter().map(|p| p.annotations.len()).sum()
    }

    /// All annotations in document order.
    pub fn annotations(&self) -> impl Iterator<Item = &NucleotideAnnotation> {
        self.pages.iter().flat_map(|p| p.annotations.iter())
    }

    /// Concatenated glyph characters in reading order.
    pub fn text(&self) -> String {
        self.annotations().map(|a| a.char as char).collect()
    }

    pub fn row_annotations(&self, row: &RowSpan) -> &[NucleotideAnnotation] {
        &self.pages[row.page].annotations[row.offset..row.offset + row.len]
    }

    pub fn row_text(&self, row: &RowSpan) -> String {
        self.row_annotations(row).iter().map(|a| a.char as char).collect()
    }

    /// Union box of a whole row as a page region.
    pub fn row_region(&self, row: &RowSpan) -> RegionRef {
        let anns = self.row_annotations(row);
        RegionRef::new(
            row.page as u32,
            anns[0].page_bbox.union(&anns[anns.len() - 1].page_bbox),
        )
    }

    fn row_of(&self, char_index: usize) -> Option<usize> {
        let r = self.rows.partition_point(|row| row.end_char() <= char_index);
        (r < self.rows.len() && self.rows[r].first_char <= char_index).then_some(r)
    }

    pub fn annotation(&self, char_index: usize) -> Option<&NucleotideAnnotation> {
        let row = &self.rows[self.row_of(char_index)?];
        Some(&self.pages[row.page].annotations[row.offset + char_index - row.first_char])
    }

    /// Interval-to-region mapping: one region per row segment of `[i, j)`,
    /// in reading order. Each region is the union of the segment's glyph
    /// boxes.
    pub fn interval_to_regions(&self, i: usize, j: usize) -> Result<Vec<RegionRef>, RenderError> {
        if i >= j {
            return Err(RenderError::IndexOutOfRange(format!("empty interval [{i}, {j})")));
        }
        let mut out = Vec::new();
        let mut pos = i;
        while pos < j {
            let r = self
                .row_of(pos)
                .ok_or_else(|| RenderError::IndexOutOfRange(format!("base {pos} is not on any page")))?;
            let row = self.rows[r];
            let end = j.min(row.end_char());
            let anns = self.row_annotations(&row);
            let first = &anns[pos - row.first_char].page_bbox;
            let last = &anns[end - 1 - row.first_char].page_bbox;
            out.push(RegionRef::new(row.page as u32, first.union(last)));
            pos = end;
        }
        Ok(out)
    }

    fn check_region(&self, region: &RegionRef) -> Result<(), RenderError> {
        let p = region.img_id as usize;
        if p >= self.pages.len() {
            return Err(RenderError::IndexOutOfRange(format!(
                "img_id {p} with {} pages",
                self.pages.len()
            )));
        }
        let (w, h) = self.pages[p].image.dimensions();
        if !region.bbox.fits_within(w, h) || region.bbox.is_degenerate() {
            return Err(RenderError::IndexOutOfRange(format!(
                "box {:?} outside {w}x{h} page",
                region.bbox.coords()
            )));
        }
        Ok(())
    }

    /// Region-to-interval mapping: the half-open global interval of every
    /// glyph whose box center lies in `region`.
    pub fn regions_to_interval(&self, region: &RegionRef) -> Result<(usize, usize), RenderError> {
        self.check_region(region)?;
        let mut selected = self.pages[region.img_id as usize]
            .annotations
            .iter()
            .filter(|a| a.page_bbox.center_in(&region.bbox))
            .map(|a| a.char_index);
        let first = selected.next().ok_or(RenderError::EmptyRegion)?;
        let mut last = first;
        for idx in selected {
            if idx != last + 1 {
                return Err(RenderError::NonContiguousSelection);
            }
            last = idx;
        }
        Ok((first, last + 1))
    }

    /// Returns a copy whose pixels inside every region are white. Annotations
    /// are kept, so supervision still refers to the original bases.
    pub fn mask_regions(&self, regions: &[RegionRef]) -> Result<DnaDocument, RenderError> {
        for r in regions {
            self.check_region(r)?;
        }
        let mut out = self.clone();
        for r in regions {
            out.whiteout(r);
        }
        Ok(out)
    }

    pub(crate) fn whiteout(&mut self, region: &RegionRef) {
        let img = &mut self.pages[region.img_id as usize].image;
        let b = region.bbox;
        for y in b.y1..b.y2.min(img.height()) {
            for x in b.x1..b.x2.min(img.width()) {
                img.put_pixel(x, y, Rgb(WHITE));
            }
        }
    }

    /// Keeps the pages flagged in `keep`, renumbering them contiguously from
    /// zero. Returns the old-to-new page map.
    pub(crate) fn retain_pages(&self, keep: &[bool]) -> (DnaDocument, Vec<Option<usize>>) {
        let mut remap = vec![None; self.pages.len()];
        let mut pages = Vec::new();
        for (old, page) in self.pages.iter().enumerate() {
            if !keep.get(old).copied().unwrap_or(false) {
                continue;
            }
            let new = pages.len();
            remap[old] = Some(new);
            let mut page = page.clone();
            for a in &mut page.annotations {
                a.page_index = new;
            }
            pages.push(page);
        }
        (
            DnaDocument::from_parts(pages, self.config.clone(), self.source_label.clone()),
            remap,
        )
    }
}
