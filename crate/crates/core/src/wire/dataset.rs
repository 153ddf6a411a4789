//! JSONL shards with page PNGs and annotation sidecars.
//!
//! ```text
//! out_dir/
//!   shard-00000.jsonl
//!   images/<id>_p<k>.png
//!   annotations/<id>.json
//! ```
//!
//! Paths inside records are relative to `out_dir`.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::ImageFormat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::{DnaDocument, NucleotideAnnotation, Page, RenderConfig};
use crate::tasks::{PromptVariant, TaskId, TaskInstance};

pub const USER_ROLE: &str = "<|User|>";
pub const ASSISTANT_ROLE: &str = "<|Assistant|>";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Image { path: PathBuf, msg: String },
    #[error("{path}:{line}: {msg}")]
    Json { path: PathBuf, line: usize, msg: String },
    #[error("invalid record {id:?}: {msg}")]
    Invalid { id: String, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<String>>,
}

/// Exactly one user turn followed by one assistant turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Conversation {
    pub messages: [Message; 2],
}

impl Conversation {
    pub fn user(&self) -> &Message {
        &self.messages[0]
    }

    pub fn assistant(&self) -> &Message {
        &self.messages[1]
    }

    fn check(&self) -> Result<(), String> {
        let [u, a] = &self.messages;
        if u.role != USER_ROLE || a.role != ASSISTANT_ROLE {
            return Err(format!("roles must be [{USER_ROLE}, {ASSISTANT_ROLE}]"));
        }
        if u.images.as_ref().is_none_or(|v| v.is_empty()) {
            return Err("user turn carries no images".into());
        }
        if a.images.is_some() {
            return Err("assistant turn carries images".into());
        }
        Ok(())
    }
}

/// One JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub task: TaskId,
    pub prompt_variant: PromptVariant,
    pub conversation: Conversation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub source_label: String,
    pub render_config: RenderConfig,
}

impl DatasetRecord {
    pub fn assistant_content(&self) -> &str {
        &self.conversation.assistant().content
    }

    pub fn image_paths(&self) -> &[String] {
        self.conversation.user().images.as_deref().unwrap_or(&[])
    }

    pub fn annotation_path(&self) -> String {
        format!("annotations/{}.json", self.id)
    }
}

fn check_id(id: &str) -> Result<(), DatasetError> {
    let ok = !id.is_empty()
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b"-_.".contains(&b))
        && id != "."
        && id != "..";
    if ok {
        Ok(())
    } else {
        Err(DatasetError::Invalid {
            id: id.to_string(),
            msg: "ids may only use [A-Za-z0-9._-]".into(),
        })
    }
}

/// Writes the page PNGs and annotation sidecar for `inst` and returns the
/// record to append to a shard.
pub fn serialize_instance(inst: &TaskInstance, out_dir: &Path, id: &str) -> Result<DatasetRecord, DatasetError> {
    check_id(id)?;
    let images_dir = out_dir.join("images");
    let ann_dir = out_dir.join("annotations");
    fs::create_dir_all(&images_dir).map_err(io_err(&images_dir))?;
    fs::create_dir_all(&ann_dir).map_err(io_err(&ann_dir))?;

    let doc = &inst.document;
    let mut images = Vec::with_capacity(doc.page_count());
    for (k, page) in doc.pages().iter().enumerate() {
        let rel = format!("images/{id}_p{k}.png");
        let path = out_dir.join(&rel);
        page.image
            .save_with_format(&path, ImageFormat::Png)
            .map_err(|e| DatasetError::Image {
                path: path.clone(),
                msg: e.to_string(),
            })?;
        images.push(rel);
    }

    let anns: Vec<&NucleotideAnnotation> = doc.annotations().collect();
    let ann_path = out_dir.join(format!("annotations/{id}.json"));
    let body = serde_json::to_vec(&anns).expect("annotations serialize");
    fs::write(&ann_path, body).map_err(io_err(&ann_path))?;

    Ok(DatasetRecord {
        id: id.to_string(),
        task: inst.task,
        prompt_variant: inst.prompt_variant,
        conversation: Conversation {
            messages: [
                Message {
                    role: USER_ROLE.into(),
                    content: inst.user_content.clone(),
                    images: Some(images),
                },
                Message {
                    role: ASSISTANT_ROLE.into(),
                    content: inst.assistant_content.clone(),
                    images: None,
                },
            ],
        },
        label: inst.label.clone(),
        source_label: doc.source_label().to_string(),
        render_config: doc.config().clone(),
    })
}

/// Rebuilds the [`TaskInstance`] behind a record from its files.
pub fn load_instance(out_dir: &Path, rec: &DatasetRecord) -> Result<TaskInstance, DatasetError> {
    let invalid = |msg: String| DatasetError::Invalid {
        id: rec.id.clone(),
        msg,
    };
    rec.conversation.check().map_err(invalid)?;

    let mut pages = Vec::new();
    for rel in rec.image_paths() {
        let path = out_dir.join(rel);
        let img = image::open(&path).map_err(|e| DatasetError::Image {
            path: path.clone(),
            msg: e.to_string(),
        })?;
        pages.push(Page {
            image: img.to_rgb8(),
            annotations: Vec::new(),
        });
    }

    let ann_path = out_dir.join(rec.annotation_path());
    let text = fs::read_to_string(&ann_path).map_err(io_err(&ann_path))?;
    let anns: Vec<NucleotideAnnotation> = serde_json::from_str(&text).map_err(|e| DatasetError::Json {
        path: ann_path.clone(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    for a in anns {
        let n = pages.len();
        let page = pages
            .get_mut(a.page_index)
            .ok_or_else(|| invalid(format!("annotation on page {} but only {n} images", a.page_index)))?;
        page.annotations.push(a);
    }

    Ok(TaskInstance {
        task: rec.task,
        prompt_variant: rec.prompt_variant,
        user_content: rec.conversation.user().content.clone(),
        assistant_content: rec.assistant_content().to_string(),
        document: DnaDocument::from_parts(pages, rec.render_config.clone(), rec.source_label.clone()),
        label: rec.label.clone(),
    })
}

/// Reads every record of one shard.
pub fn read_shard(path: &Path) -> Result<Vec<DatasetRecord>, DatasetError> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| DatasetError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Appends records to `shard-<n>.jsonl`, rolling over every `shard_size`
/// lines.
pub struct ShardWriter {
    dir: PathBuf,
    shard_size: usize,
    in_shard: usize,
    current: Option<BufWriter<File>>,
    paths: Vec<PathBuf>,
}

impl ShardWriter {
    pub fn new(dir: &Path, shard_size: usize) -> Result<Self, DatasetError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            shard_size: shard_size.max(1),
            in_shard: 0,
            current: None,
            paths: Vec::new(),
        })
    }

    pub fn shard_name(n: usize) -> String {
        format!("shard-{n:05}.jsonl")
    }

    fn roll(&mut self) -> Result<(), DatasetError> {
        self.flush_current()?;
        let path = self.dir.join(Self::shard_name(self.paths.len()));
        let f = File::create(&path).map_err(io_err(&path))?;
        self.current = Some(BufWriter::new(f));
        self.paths.push(path);
        self.in_shard = 0;
        Ok(())
    }

    fn flush_current(&mut self) -> Result<(), DatasetError> {
        if let Some(mut w) = self.current.take() {
            let path = self.paths.last().cloned().unwrap_or_default();
            w.flush().map_err(io_err(&path))?;
        }
        Ok(())
    }

    pub fn append(&mut self, rec: &DatasetRecord) -> Result<(), DatasetError> {
        if self.current.is_none() || self.in_shard == self.shard_size {
            self.roll()?;
        }
        let path = self.paths.last().cloned().unwrap_or_default();
        let w = self.current.as_mut().expect("shard open");
        serde_json::to_writer(&mut *w, rec).expect("record serializes");
        w.write_all(b"\n").map_err(io_err(&path))?;
        self.in_shard += 1;
        Ok(())
    }

    /// Flushes and returns the shard paths. Always leaves at least one
    /// (possibly empty) shard.
    pub fn finish(mut self) -> Result<Vec<PathBuf>, DatasetError> {
        if self.paths.is_empty() {
            self.roll()?;
        }
        self.flush_current()?;
        Ok(std::mem::take(&mut self.paths))
    }
}
