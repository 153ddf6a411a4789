//! The grounding line grammar.
//!
//! ```text
//! line    := "<|ref|>" SEQ "<|/ref|>" "<|det|>" boxlist "<|/det|>"
//! boxlist := "[]" | "[" box ("," box)* "]"
//! box     := "[" int "," int "," int "," int "," int "]"
//! ```
//!
//! Whitespace is allowed around every separator.

use serde::{Deserialize, Serialize};

use super::WireError;
use crate::genome_io::is_base;
use crate::render::RegionRef;
use crate::tasks::{is_chromosome_label, SupervisionItem, TaskId};

pub const REF_OPEN: &str = "<|ref|>";
pub const REF_CLOSE: &str = "<|/ref|>";
pub const DET_OPEN: &str = "<|det|>";
pub const DET_CLOSE: &str = "<|/det|>";
pub const GROUNDING: &str = "<|grounding|>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundedItem {
    pub sequence: String,
    pub boxes: Vec<RegionRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Items(Vec<GroundedItem>),
    Text(String),
    Label(String),
}

/// A parsed assistant turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseDoc {
    pub task: TaskId,
    pub payload: Payload,
}

impl ResponseDoc {
    pub fn items(&self) -> &[GroundedItem] {
        match &self.payload {
            Payload::Items(v) => v,
            _ => &[],
        }
    }

    pub fn into_items(self) -> Vec<GroundedItem> {
        match self.payload {
            Payload::Items(v) => v,
            _ => Vec::new(),
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.payload {
            Payload::Text(t) => Some(t),
            _ => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match &self.payload {
            Payload::Label(l) => Some(l),
            _ => None,
        }
    }
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line_no: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> WireError {
        WireError::MalformedLine {
            line_no: self.line_no,
            reason: format!("{} at column {}", reason.into(), self.pos + 1),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), WireError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tok}`")))
        }
    }

    fn int(&mut self) -> Result<u32, WireError> {
        self.skip_ws();
        let digits = self.s[self.pos..].bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.err("expected a non-negative integer"));
        }
        let v = self.s[self.pos..self.pos + digits]
            .parse()
            .map_err(|_| self.err("integer out of range"))?;
        self.pos += digits;
        Ok(v)
    }

    fn region(&mut self) -> Result<RegionRef, WireError> {
        self.expect("[")?;
        let mut c = [0u32; 5];
        for (k, slot) in c.iter_mut().enumerate() {
            if k > 0 {
                self.expect(",")?;
            }
            *slot = self.int()?;
        }
        self.expect("]")?;
        Ok(RegionRef::from(c))
    }

    fn box_list(&mut self) -> Result<Vec<RegionRef>, WireError> {
        self.expect("[")?;
        let mut boxes = Vec::new();
        if self.eat("]") {
            return Ok(boxes);
        }
        loop {
            boxes.push(self.region()?);
            if self.eat("]") {
                return Ok(boxes);
            }
            self.expect(",")?;
        }
    }
}

fn check_sequence(seq: &str, line_no: usize) -> Result<(), WireError> {
    match seq.chars().find(|&c| !(c.is_ascii() && is_base(c as u8))) {
        Some(ch) => Err(WireError::IllegalSequenceChar { line_no, ch }),
        None => Ok(()),
    }
}

/// Parses one grounded line. `line_no` is 1-based and only used in errors.
pub fn parse_grounded_line(line: &str, task: TaskId, line_no: usize) -> Result<GroundedItem, WireError> {
    let mut c = Cursor {
        s: line,
        pos: 0,
        line_no,
    };
    c.expect(REF_OPEN)?;
    let start = c.pos;
    let len = c.s[start..]
        .find(REF_CLOSE)
        .ok_or_else(|| c.err(format!("expected `{REF_CLOSE}`")))?;
    let sequence = c.s[start..start + len].trim();
    c.pos = start + len + REF_CLOSE.len();
    if sequence.is_empty() {
        return Err(WireError::MalformedLine {
            line_no,
            reason: "empty sequence".into(),
        });
    }
    check_sequence(sequence, line_no)?;
    c.expect(DET_OPEN)?;
    let boxes = c.box_list()?;
    c.expect(DET_CLOSE)?;
    c.skip_ws();
    if c.pos != c.s.len() {
        return Err(c.err("trailing characters"));
    }
    if task != TaskId::T5 {
        if boxes.is_empty() {
            return Err(WireError::EmptyBoxListOutsideT5 { line_no });
        }
        if boxes.len() > 1 {
            return Err(WireError::MultipleBoxesOutsideT5 {
                line_no,
                count: boxes.len(),
            });
        }
    }
    Ok(GroundedItem {
        sequence: sequence.to_string(),
        boxes,
    })
}

/// Splits a response into lines, dropping one trailing newline and any
/// trailing `\r`.
pub(crate) fn response_lines(text: &str) -> Vec<&str> {
    let body = text.trim_end_matches(['\n', '\r', ' ', '\t']);
    if body.is_empty() {
        return Vec::new();
    }
    body.split('\n').map(|l| l.trim_end_matches('\r')).collect()
}

/// Parses a T2..T5 response.
pub fn parse_grounded_response(text: &str, task: TaskId) -> Result<ResponseDoc, WireError> {
    if !task.is_grounded() {
        return Err(WireError::WrongTask(task));
    }
    let lines = response_lines(text);
    if lines.is_empty() {
        return Err(WireError::MalformedLine {
            line_no: 1,
            reason: "empty response".into(),
        });
    }
    if task == TaskId::T5 && lines.len() != 1 {
        return Err(WireError::MalformedLine {
            line_no: 2,
            reason: format!("T5 expects exactly one line, got {}", lines.len()),
        });
    }
    let items = lines
        .iter()
        .enumerate()
        .map(|(i, l)| parse_grounded_line(l, task, i + 1))
        .collect::<Result<_, _>>()?;
    Ok(ResponseDoc {
        task,
        payload: Payload::Items(items),
    })
}

/// Parses a T1 transcript or a T6 label.
pub fn parse_plain_response(text: &str, task: TaskId) -> Result<ResponseDoc, WireError> {
    match task {
        TaskId::T1 => {
            let lines = response_lines(text);
            for (i, l) in lines.iter().enumerate() {
                check_sequence(l.trim(), i + 1)?;
            }
            let raw: Vec<&str> = lines.iter().map(|l| l.trim()).collect();
            Ok(ResponseDoc {
                task,
                payload: Payload::Text(raw.join("\n")),
            })
        }
        TaskId::T6 => {
            let label = text.trim();
            if !is_chromosome_label(label) {
                return Err(WireError::UnknownLabel(label.to_string()));
            }
            Ok(ResponseDoc {
                task,
                payload: Payload::Label(label.to_string()),
            })
        }
        other => Err(WireError::WrongTask(other)),
    }
}

/// Parses any task's response.
pub fn parse_response(text: &str, task: TaskId) -> Result<ResponseDoc, WireError> {
    if task.is_grounded() {
        parse_grounded_response(text, task)
    } else {
        parse_plain_response(text, task)
    }
}

/// Checks an assistant string against its task grammar.
pub fn validate_response(text: &str, task: TaskId) -> Result<(), WireError> {
    parse_response(text, task).map(|_| ())
}

/// Compact box list, e.g. `[[0,20,23,56,33]]`.
pub fn format_det(boxes: &[RegionRef]) -> String {
    let inner: Vec<String> = boxes
        .iter()
        .map(|r| {
            let [p, x1, y1, x2, y2] = r.to_array();
            format!("[{p},{x1},{y1},{x2},{y2}]")
        })
        .collect();
    format!("[{}]", inner.join(","))
}

pub fn format_grounded_line(sequence: &str, boxes: &[RegionRef]) -> String {
    format!(
        "{REF_OPEN}{sequence}{REF_CLOSE}{DET_OPEN}{}{DET_CLOSE}",
        format_det(boxes)
    )
}

/// One line per item, joined by `\n`.
pub fn format_grounded_lines(items: &[SupervisionItem]) -> String {
    items
        .iter()
        .map(|i| format_grounded_line(&i.sequence, &i.regions))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn format_response(doc: &ResponseDoc) -> String {
    match &doc.payload {
        Payload::Items(items) => items
            .iter()
            .map(|i| format_grounded_line(&i.sequence, &i.boxes))
            .collect::<Vec<_>>()
            .join("\n"),
        Payload::Text(t) | Payload::Label(t) => t.clone(),
    }
}
