use std::fs;
use std::path::PathBuf;

use clap::Args;
use image::ImageFormat;

use super::{io_error, read_fasta, Cli, CliError, LayoutArgs};
use crate::genome_io::{extract_windows, GenomeWindow};
use crate::render::{render_document, RenderError};

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// FASTA file, or - for standard input.
    pub fasta: PathBuf,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

fn file_stem(label: &str, start: usize) -> String {
    let safe: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}_{start}")
}

pub fn run(cli: &Cli, args: &RenderArgs) -> Result<(), CliError> {
    let cfg = args.layout.render_config()?;
    let records = read_fasta(&args.fasta)?;
    let windows: Vec<GenomeWindow> = match args.layout.windowing(None)? {
        Some(w) => records
            .iter()
            .flat_map(|r| extract_windows(r, w.window, w.stride))
            .collect(),
        None => records
            .into_iter()
            .map(|sequence| GenomeWindow {
                sequence,
                start_offset: 0,
            })
            .collect(),
    };
    fs::create_dir_all(&cli.out).map_err(|e| io_error(&cli.out, e))?;

    let mut total_pages = 0;
    for w in &windows {
        let doc = match render_document(&w.sequence, &cfg) {
            Ok(d) => d,
            Err(RenderError::EmptySequence) => continue,
            Err(e) => return Err(CliError::Config(e.to_string())),
        };
        let stem = file_stem(w.source_label(), w.start_offset);
        for (k, page) in doc.pages().iter().enumerate() {
            let path = cli.out.join(format!("{stem}_p{k}.png"));
            page.image
                .save_with_format(&path, ImageFormat::Png)
                .map_err(|e| io_error(&path, e))?;
        }
        let anns: Vec<_> = doc.annotations().collect();
        let path = cli.out.join(format!("{stem}.json"));
        fs::write(&path, serde_json::to_vec(&anns).expect("annotations serialize")).map_err(|e| io_error(&path, e))?;
        println!(
            "{}:{} {} bases {} pages",
            w.source_label(),
            w.start_offset,
            doc.total_bases(),
            doc.page_count()
        );
        total_pages += doc.page_count();
    }
    println!("rendered {} documents, {} pages", windows.len(), total_pages);
    Ok(())
}
