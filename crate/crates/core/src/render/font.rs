//! Embedded 5x7 bitmap glyphs for the nucleotide alphabet.

use image::{Rgb, RgbImage};

use super::{PixelBox, BLACK};

pub const GLYPH_COLS: usize = 5;
pub const GLYPH_ROWS: usize = 7;

type Bitmap = [&'static str; GLYPH_ROWS];

const A: Bitmap = [".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"];
const C: Bitmap = [".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."];
const G: Bitmap = [".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."];
const T: Bitmap = ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."];
const N: Bitmap = ["#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"];

/// Bitmap rows for a base, `#` marking ink. Non-alphabet bytes render as `N`.
pub fn glyph_bitmap(base: u8) -> &'static Bitmap {
    match base {
        b'A' => &A,
        b'C' => &C,
        b'G' => &G,
        b'T' => &T,
        _ => &N,
    }
}

fn ink(bitmap: &Bitmap, row: usize, col: usize) -> bool {
    bitmap[row].as_bytes()[col] == b'#'
}

/// Draws `base` into its glyph cell. Ink never leaves `cell`.
///
/// The bitmap is scaled nearest-neighbour into an inner rectangle inset
/// 2/9 of the width on each side and 1/10 of the height top and bottom,
/// which at the default 9x10 cell is an exact 5x7 copy.
pub fn draw_glyph(img: &mut RgbImage, cell: &PixelBox, base: u8) {
    let (w, h) = (cell.width(), cell.height());
    let mut x0 = cell.x1 + w * 2 / 9;
    let mut x1 = cell.x1 + w * 7 / 9;
    if x1 <= x0 {
        x0 = cell.x1;
        x1 = cell.x2;
    }
    let mut y0 = cell.y1 + h / 10;
    let mut y1 = cell.y1 + h * 8 / 10;
    if y1 <= y0 {
        y0 = cell.y1;
        y1 = cell.y2;
    }
    let (iw, ih) = ((x1 - x0) as usize, (y1 - y0) as usize);
    let bitmap = glyph_bitmap(base);
    for py in y0..y1 {
        let row = (py - y0) as usize * GLYPH_ROWS / ih;
        for px in x0..x1 {
            let col = (px - x0) as usize * GLYPH_COLS / iw;
            if ink(bitmap, row, col) {
                img.put_pixel(px, py, Rgb(BLACK));
            }
        }
    }
}
