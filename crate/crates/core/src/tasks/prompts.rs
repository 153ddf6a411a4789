//! Instruction templates for every task and verbosity level.

use crate::render::RegionRef;

use super::{PromptVariant, TaskId};

pub const IMAGE_PLACEHOLDER: &str = "<image>";

const T1_SHORT: &str = "Free OCR.";
const T1_MEDIUM: &str = "Free OCR.\nReturn only DNA sequence.";
const T1_LONG: &str = "Free OCR.\n\
Return only the DNA sequence (A/C/G/T/N).\n\
Keep line breaks if present. No extra words.";

const T2_SHORT: &str = "<|grounding|>Read all DNA text and locate each line.";
const T2_MEDIUM: &str = "<|grounding|>Read all DNA text and locate each line.\n\
Output per line: <|ref|>SEQ<|/ref|><|det|>[[img_id,x1,y1,x2,y2]]<|/det|>.";
const T2_LONG: &str = "<|grounding|>Read all DNA text and locate each text line or block.\n\
Output one line per region in reading order (top-to-bottom, left-to-right).\n\
For each region, output EXACTLY:\n\
<|ref|>SEQUENCE<|/ref|><|det|>[[img_id,x1,y1,x2,y2]]<|/det|>\n\
Rules:\n\
- det MUST be a list-of-boxes. Even one box must be written as [[...]].\n\
- img_id is 0-based index into the images list. If NUM_IMAGES==1, img_id MUST be 0.\n\
Only output these lines. No extra text.";

const T3_SHORT: &str = "<|grounding|>OCR DNA for boxes (in order): {boxes}";
const T3_MEDIUM: &str = "<|grounding|>OCR DNA text for each box in the SAME order.\n\
Boxes:\n\
{boxes}\n\
Output one line per box: <|ref|>SEQ<|/ref|><|det|>[[img_id,x1,y1,x2,y2]]<|/det|>";
const T3_LONG: &str = "<|grounding|>OCR DNA text for each bounding box below, in the SAME order.\n\
Boxes:\n\
{boxes}\n\
Output one line per box using EXACTLY:\n\
<|ref|>SEQUENCE<|/ref|><|det|>[[img_id,x1,y1,x2,y2]]<|/det|>\n\
Rules:\n\
- det MUST be list-of-boxes: [[...]] for a single box.\n\
- img_id is 0-based index into the images list. If NUM_IMAGES==1, img_id MUST be 0.\n\
No extra text.";

const T4_SHORT: &str = "<|grounding|>Predict masked DNA for boxes (in order): {boxes}";
const T4_MEDIUM: &str = "<|grounding|>Predict ORIGINAL DNA for masked boxes in the SAME order.\n\
Boxes:\n\
{boxes}\n\
Output: <|ref|>SEQ<|/ref|><|det|>[[img_id,x1,y1,x2,y2]]<|/det|>";
const T4_LONG: &str = "<|grounding|>The DNA text inside each box is masked/occluded.\n\
Predict the ORIGINAL DNA sequence for each masked region.\n\
Masked boxes:\n\
{boxes}\n\
Output in the SAME order as the boxes.\n\
Use only A/C/G/T/N (use N if uncertain).\n\
For each box, output EXACTLY one line:\n\
<|ref|>PREDICTED_SEQUENCE<|/ref|><|det|>[[img_id,x1,y1,x2,y2]]<|/det|>\n\
Rules: \n\
- det MUST be list-of-boxes: [[...]] for a single box.\n\
- img_id is 0-based index into the images list. If NUM_IMAGES==1, img_id MUST be 0.\n\
No extra text.";

const T5_SHORT: &str = "<|grounding|>Locate <|ref|>{query}<|/ref|>.";
const T5_MEDIUM: &str = "<|grounding|>Locate <|ref|>{query}<|/ref|>.\n\
Output exactly one line: <|ref|>QUERY<|/ref|><|det|>[...]<|/det|> (or [] if not found).";
const T5_LONG: &str = "<|grounding|>Locate the DNA subsequence <|ref|>{query}<|/ref|>.\n\
Return ALL bounding boxes where it appears.\n\
Output EXACTLY one line:\n\
<|ref|>{query}<|/ref|><|det|>[[img_id,x1,y1,x2,y2],[img_id,x1,y1,x2,y2]]<|/det|>\n\
If not found, output:\n\
<|ref|>{query}<|/ref|><|det|>[]<|/det|>\n\
Rules:\n\
- Each box MUST be [img_id,x1,y1,x2,y2].\n\
- img_id is 0-based index into the images list. If NUM_IMAGES==1, img_id MUST be 0.\n\
No extra text.";

const T6_SHORT: &str = "Which chromosome?";
const T6_MEDIUM: &str = "Predict chromosome label (chr1-22, chrX, chrY, or unknown).";
const T6_LONG: &str = "Classify this DNA sequence: which human chromosome does it belong to?\n\
Answer with one label only: chr1-chr22, chrX, chrY, or unknown.";

/// The raw template, with `{boxes}` / `{query}` placeholders intact.
pub fn template(task: TaskId, variant: PromptVariant) -> &'static str {
    use PromptVariant::*;
    use TaskId::*;
    match (task, variant) {
        (T1, Short) => T1_SHORT,
        (T1, Medium) => T1_MEDIUM,
        (T1, Long) => T1_LONG,
        (T2, Short) => T2_SHORT,
        (T2, Medium) => T2_MEDIUM,
        (T2, Long) => T2_LONG,
        (T3, Short) => T3_SHORT,
        (T3, Medium) => T3_MEDIUM,
        (T3, Long) => T3_LONG,
        (T4, Short) => T4_SHORT,
        (T4, Medium) => T4_MEDIUM,
        (T4, Long) => T4_LONG,
        (T5, Short) => T5_SHORT,
        (T5, Medium) => T5_MEDIUM,
        (T5, Long) => T5_LONG,
        (T6, Short) => T6_SHORT,
        (T6, Medium) => T6_MEDIUM,
        (T6, Long) => T6_LONG,
    }
}

/// Python-style nested list, e.g. `[[0, 30, 915, 960, 945], [0, 32, 960, 880, 990]]`.
pub fn format_box_list(regions: &[RegionRef]) -> String {
    let inner: Vec<String> = regions
        .iter()
        .map(|r| {
            let [p, x1, y1, x2, y2] = r.to_array();
            format!("[{p}, {x1}, {y1}, {x2}, {y2}]")
        })
        .collect();
    format!("[{}]", inner.join(", "))
}

/// Fills the template for `task`/`variant`.
pub fn instruction(task: TaskId, variant: PromptVariant, boxes: &[RegionRef], query: &str) -> String {
    let t = template(task, variant);
    match task {
        TaskId::T3 | TaskId::T4 => t.replace("{boxes}", &format_box_list(boxes)),
        TaskId::T5 => t.replace("{query}", query),
        _ => t.to_string(),
    }
}

/// `<image>` plus the page-count meta line, then the instruction.
pub fn user_content(instruction: &str, num_images: usize) -> String {
    format!("{IMAGE_PLACEHOLDER}\nNUM_IMAGES={num_images}.\n{instruction}")
}

/// Reads `P` back out of a user turn built by [`user_content`].
pub fn num_images_in(user_content: &str) -> Option<usize> {
    let rest = user_content
        .strip_prefix(IMAGE_PLACEHOLDER)?
        .strip_prefix("\nNUM_IMAGES=")?;
    let end = rest.find('.')?;
    rest[..end].parse().ok()
}

/// Parses the `{boxes}` list back out of a T3/T4 user turn.
pub fn boxes_in(user_content: &str) -> Option<Vec<RegionRef>> {
    let start = user_content.find("[[")?;
    let end = user_content[start..].find("]]")? + start + 2;
    let parsed: Vec<[u32; 5]> = serde_json::from_str(&user_content[start..end]).ok()?;
    Some(parsed.into_iter().map(RegionRef::from).collect())
}

/// Reads the `{query}` back out of a T5 user turn.
pub fn query_in(user_content: &str) -> Option<&str> {
    let start = user_content.find("<|ref|>")? + "<|ref|>".len();
    let end = user_content[start..].find("<|/ref|>")? + start;
    Some(&user_content[start..end])
}
