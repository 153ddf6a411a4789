//! FASTA ingestion and fixed-length window extraction.
//!
//! Sequences are normalized to the five-letter rendering alphabet
//! `A/C/G/T/N`: lowercase is folded to uppercase and IUPAC ambiguity codes
//! collapse to `N`.

use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The rendering alphabet.
pub const ALPHABET: [u8; 5] = *b"ACGTN";

#[derive(Debug, Error)]
pub enum FastaError {
    #[error("input contains no FASTA records")]
    EmptyInput,
    #[error("illegal character {ch:?} in record `{record}` at base offset {offset}")]
    IllegalCharacter { record: String, offset: usize, ch: char },
    #[error("sequence data before the first `>` header (line {line})")]
    MissingHeader { line: usize },
    #[error("failed to read FASTA input: {0}")]
    Io(#[from] std::io::Error),
}

/// Returns true if `b` is one of `A/C/G/T/N` (uppercase only).
#[inline]
pub fn is_base(b: u8) -> bool {
    matches!(b, b'A' | b'C' | b'G' | b'T' | b'N')
}

/// Maps a raw FASTA byte to the rendering alphabet.
///
/// `None` means the byte is not a nucleotide code at all.
pub fn normalize_base(b: u8) -> Option<u8> {
    match b.to_ascii_uppercase() {
        c @ (b'A' | b'C' | b'G' | b'T' | b'N') => Some(c),
        b'R' | b'Y' | b'S' | b'W' | b'K' | b'M' | b'B' | b'D' | b'H' | b'V' | b'U' => Some(b'N'),
        _ => None,
    }
}

/// A validated DNA sequence over `A/C/G/T/N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnaSequence {
    bases: String,
    source_label: String,
}

impl DnaSequence {
    /// Builds a sequence, normalizing case and ambiguity codes.
    pub fn new(label: impl Into<String>, raw: &str) -> Result<Self, FastaError> {
        let label = label.into();
        let mut bases = String::with_capacity(raw.len());
        for (offset, b) in raw.bytes().enumerate() {
            match normalize_base(b) {
                Some(c) => bases.push(c as char),
                None => {
                    return Err(FastaError::IllegalCharacter {
                        record: label,
                        offset,
                        ch: b as char,
                    })
                }
            }
        }
        Ok(Self {
            bases,
            source_label: label,
        })
    }

    pub fn bases(&self) -> &str {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    /// Copies out `[start, start + len)` as a new sequence with the same label.
    pub fn slice(&self, start: usize, len: usize) -> DnaSequence {
        DnaSequence {
            bases: self.bases[start..start + len].to_string(),
            source_label: self.source_label.clone(),
        }
    }
}

/// Parses every record of a FASTA stream.
///
/// The record id is the header text up to the first whitespace. Whitespace
/// inside sequence lines is ignored; `;` comment lines are skipped.
pub fn parse_fasta<R: Read>(input: R) -> Result<Vec<DnaSequence>, FastaError> {
    let reader = BufReader::new(input);
    let mut records: Vec<DnaSequence> = Vec::new();
    let mut current: Option<DnaSequence> = None;

    for (line_no, line) in reader.split(b'\n').enumerate() {
        let line = line?;
        let line = line.strip_suffix(b"\r").unwrap_or(&line);
        if let Some(header) = line.strip_prefix(b">") {
            if let Some(done) = current.take() {
                records.push(done);
            }
            let header = String::from_utf8_lossy(header);
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            current = Some(DnaSequence {
                bases: String::new(),
                source_label: id,
            });
            continue;
        }
        if line.first() == Some(&b';') {
            continue;
        }
        let Some(rec) = current.as_mut() else {
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            return Err(FastaError::MissingHeader { line: line_no + 1 });
        };
        for &b in line {
            if b.is_ascii_whitespace() {
                continue;
            }
            match normalize_base(b) {
                Some(c) => rec.bases.push(c as char),
                None => {
                    return Err(FastaError::IllegalCharacter {
                        record: rec.source_label.clone(),
                        offset: rec.bases.len(),
                        ch: b as char,
                    })
                }
            }
        }
    }
    if let Some(done) = current.take() {
        records.push(done);
    }
    if records.is_empty() {
        return Err(FastaError::EmptyInput);
    }
    Ok(records)
}

/// One fixed-length window cut from a source record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenomeWindow {
    pub sequence: DnaSequence,
    pub start_offset: usize,
}

impl GenomeWindow {
    pub fn window_length(&self) -> usize {
        self.sequence.len()
    }

    pub fn source_label(&self) -> &str {
        self.sequence.source_label()
    }
}

/// Window/stride pairs exposed as named profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPreset {
    pub window: usize,
    pub stride: usize,
}

impl WindowPreset {
    /// Non-overlapping 2048-bp tiling.
    pub const HG38: WindowPreset = WindowPreset {
        window: 2048,
        stride: 2048,
    };
    /// 2048-bp windows overlapping by 1920 bp.
    pub const RICE: WindowPreset = WindowPreset {
        window: 2048,
        stride: 128,
    };

    pub fn by_name(name: &str) -> Option<WindowPreset> {
        match name {
            "hg38" | "hg38-stage1" | "hg38-stage2" => Some(Self::HG38),
            "rice" => Some(Self::RICE),
            _ => None,
        }
    }
}

/// Number of windows `extract_windows` yields for a record of `len` bases.
pub fn window_count(len: usize, window: usize, stride: usize) -> usize {
    if window == 0 || stride == 0 || len < window {
        0
    } else {
        (len - window) / stride + 1
    }
}

/// Cuts windows at offsets `0, stride, 2*stride, ...`, dropping any trailing
/// partial window. A record shorter than `window` yields nothing, as does a
/// zero window or stride.
pub fn extract_windows(seq: &DnaSequence, window: usize, stride: usize) -> Vec<GenomeWindow> {
    (0..window_count(seq.len(), window, stride))
        .map(|k| {
            let start = k * stride;
            GenomeWindow {
                sequence: seq.slice(start, window),
                start_offset: start,
            }
        })
        .collect()
}
