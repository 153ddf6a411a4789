/// The 25 chromosome classes, in canonical order.
pub const CHROMOSOME_LABELS: [&str; 25] = [
    "chr1", "chr2", "chr3", "chr4", "chr5", "chr6", "chr7", "chr8", "chr9", "chr10", "chr11", "chr12", "chr13",
    "chr14", "chr15", "chr16", "chr17", "chr18", "chr19", "chr20", "chr21", "chr22", "chrX", "chrY", "unknown",
];

pub const UNKNOWN_LABEL: &str = "unknown";

pub fn is_chromosome_label(s: &str) -> bool {
    CHROMOSOME_LABELS.contains(&s)
}

/// Maps a FASTA record id to a class label.
///
/// An optional case-insensitive `chr` prefix is stripped, then `1`..`22`,
/// `X` or `Y` name the class; anything else is `unknown`.
pub fn chromosome_label(source_label: &str) -> &'static str {
    let s = source_label.trim();
    let rest = match s.get(..3) {
        Some(p) if p.eq_ignore_ascii_case("chr") => &s[3..],
        _ => s,
    };
    if rest.eq_ignore_ascii_case("x") {
        return "chrX";
    }
    if rest.eq_ignore_ascii_case("y") {
        return "chrY";
    }
    if !rest.is_empty() && !rest.starts_with('0') && rest.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(n @ 1..=22) = rest.parse::<usize>() {
            return CHROMOSOME_LABELS[n - 1];
        }
    }
    UNKNOWN_LABEL
}
