//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dnadoc::eval::{
    edit_distance, evaluate_ordered, parse_prediction_lines, text_cer, token_budget, MatchCriteria, PredictedLine,
};
use dnadoc::render::{page_capacity, render_document, DnaDocument, PixelBox, RegionRef, RenderConfig, WHITE};
use dnadoc::rng::sample_rng;
use dnadoc::tasks::{
    anneal_prompt_length, build_instance, find_occurrences, sample_task, truncate_tail, CurriculumSchedule,
    PromptVariant, SamplerConfig, SupervisionItem, TaskError, TaskId,
};
use dnadoc::wire::{format_response, load_instance, parse_response, serialize_instance, GroundedItem};
use dnadoc::DnaSequence;

type Outcome = Result<String, String>;

fn random_bases(rng: &mut ChaCha8Rng, n: usize, alphabet: &[u8]) -> String {
    (0..n)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())] as char)
        .collect()
}

fn render(label: &str, bases: &str) -> DnaDocument {
    render_document(&DnaSequence::new(label, bases).unwrap(), &RenderConfig::default()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1
fn annotation_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1, 2, 66, 67, 1782, 1783, 2048, 5000] {
        let doc = render("chr1", &random_bases(&mut rng, n, b"ACGTN"));
        let a = doc.annotation(0).ok_or("no first annotation")?;
        ensure(
            a.char_index == 0
                && a.page_index == 0
                && a.page_char_index == 0
                && a.page_bbox == PixelBox::new(20, 23, 29, 33),
            || format!("n={n}: first record {a:?}"),
        )?;
    }
    Ok("first base {char_index 0, page_index 0, page_char_index 0, bbox (20,23,29,33)}".into())
}

// 2
fn capacity_claim() -> Outcome {
    let cap = page_capacity(&RenderConfig::default()).map_err(|e| e.to_string())?;
    ensure((1700..=2100).contains(&cap), || {
        format!("capacity {cap} outside [1700, 2100]")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let doc = render("chr1", &random_bases(&mut rng, 2048, b"ACGT"));
    ensure(doc.page_count() == 2, || {
        format!("2048 bases gave {} pages", doc.page_count())
    })?;
    Ok(format!(
        "capacity {cap} bases/page; 2048-base window renders to 2 pages"
    ))
}

// 3
fn token_budget_table() -> Outcome {
    let res = [512, 640, 1024, 1280];
    let tokens = [64, 100, 256, 400];
    let pages = [370, 226, 84, 53];
    let ratios = [19.0, 19.9, 20.9, 21.2];
    let mut got = Vec::new();
    for i in 0..4 {
        let b = token_budget(res[i], pages[i], 450_000).map_err(|e| e.to_string())?;
        ensure(b.tokens_per_page == tokens[i], || {
            format!("{}px: T={}", res[i], b.tokens_per_page)
        })?;
        ensure((b.compression - ratios[i]).abs() <= 0.05, || {
            format!("{}px: compression {:.4} vs {}", res[i], b.compression, ratios[i])
        })?;
        got.push(format!("{}:{}/{:.2}", res[i], b.tokens_per_page, b.compression));
    }
    Ok(format!("T and N/(P*T) within 0.05: {}", got.join(" ")))
}

// 4
fn round_trip_suite() -> Outcome {
    const CASES: u64 = 1000;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut disk = 0;
    for case in 0..CASES {
        let mut rng = sample_rng(4, case, 0);
        let n = rng.gen_range(1..=5000);
        let bases = random_bases(&mut rng, n, b"ACGTN");
        let doc = render("chr9", &bases);

        // (a)
        ensure(doc.text() == bases && doc.annotations().count() == n, || {
            format!("case {case}: annotations != sequence")
        })?;

        // (b)
        let row = doc.rows()[rng.gen_range(0..doc.rows().len())];
        let i = row.first_char + rng.gen_range(0..row.len);
        let j = rng.gen_range(i + 1..=row.end_char());
        let regions = doc.interval_to_regions(i, j).map_err(|e| format!("case {case}: {e}"))?;
        ensure(regions.len() == 1, || {
            format!("case {case}: single-row interval gave {} regions", regions.len())
        })?;
        let back = doc
            .regions_to_interval(&regions[0])
            .map_err(|e| format!("case {case}: {e}"))?;
        ensure(back == (i, j), || {
            format!("case {case}: ({i},{j}) came back as {back:?}")
        })?;

        // (c) + (d)
        let cfg = SamplerConfig::hg38_stage2();
        for task in TaskId::ALL {
            let variant = PromptVariant::ORDER[(case as usize + task.index()) % 3];
            let mut trng = sample_rng(4, case, 100 + task.index() as u64);
            let inst = match build_instance(task, &doc, variant, &cfg, &mut trng) {
                Ok(i) => i,
                Err(TaskError::AllItemsTruncated(_)) => continue,
                Err(e) => return Err(format!("case {case} {task}: {e}")),
            };
            let parsed = parse_response(&inst.assistant_content, task)
                .map_err(|e| format!("case {case} {task}: generator output rejected: {e}"))?;
            ensure(format_response(&parsed) == inst.assistant_content, || {
                format!("case {case} {task}: format(parse(x)) != x")
            })?;
            if case % 50 == 0 {
                let id = format!("c{case}-{task}");
                let rec = serialize_instance(&inst, dir.path(), &id).map_err(|e| e.to_string())?;
                let line = serde_json::to_string(&rec).map_err(|e| e.to_string())?;
                let rec = serde_json::from_str(&line).map_err(|e| e.to_string())?;
                let loaded = load_instance(dir.path(), &rec).map_err(|e| e.to_string())?;
                ensure(loaded == inst, || {
                    format!("case {case} {task}: disk round trip differs")
                })?;
                disk += 1;
            }
        }
    }
    Ok(format!(
        "{CASES} cases x 6 tasks, {disk} full disk round trips, 0 failures"
    ))
}

// 5: direct transcription of the ordered-alignment formulas.
struct OracleMetrics {
    lcm: bool,
    text: Vec<bool>,
    det: Vec<bool>,
    strict: bool,
    linf: Option<f64>,
    cer: f64,
}

fn oracle_iou(a: &RegionRef, b: &RegionRef) -> f64 {
    if a.img_id != b.img_id {
        return 0.0;
    }
    let (a, b) = (a.bbox, b.bbox);
    let ix = (a.x2.min(b.x2) as i64 - a.x1.max(b.x1) as i64).max(0);
    let iy = (a.y2.min(b.y2) as i64 - a.y1.max(b.y1) as i64).max(0);
    let inter = (ix * iy) as f64;
    let area = |p: PixelBox| ((p.x2 - p.x1) as i64 * (p.y2 - p.y1) as i64) as f64;
    inter / (area(a) + area(b) - inter)
}

fn oracle_ed(a: &[u8], b: &[u8]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, r) in t.iter_mut().enumerate() {
        r[0] = i;
    }
    for j in 0..=b.len() {
        t[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = (t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]))
                .min(t[i - 1][j] + 1)
                .min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

fn oracle(gt: &[GroundedItem], pred: &[GroundedItem], tau: f64) -> OracleMetrics {
    let n = gt.len();
    let lcm = pred.len() == n;
    let mut text = vec![false; n];
    let mut det = vec![false; n];
    let mut cer_sum = 0.0;
    let mut linf_sum = 0.0;
    let mut linf_n = 0;
    for i in 0..n {
        let Some(p) = pred.get(i) else {
            cer_sum += 1.0;
            continue;
        };
        let g = &gt[i];
        text[i] = p.sequence == g.sequence;
        det[i] =
            p.boxes.len() == g.boxes.len() && (0..g.boxes.len()).all(|k| oracle_iou(&g.boxes[k], &p.boxes[k]) >= tau);
        cer_sum += oracle_ed(g.sequence.as_bytes(), p.sequence.as_bytes()) as f64 / g.sequence.len() as f64;
        if let (Some(a), Some(b)) = (g.boxes.first(), p.boxes.first()) {
            let c = |r: &RegionRef| [r.bbox.x1 as i64, r.bbox.y1 as i64, r.bbox.x2 as i64, r.bbox.y2 as i64];
            let (ca, cb) = (c(a), c(b));
            linf_sum += (0..4).map(|k| (ca[k] - cb[k]).abs()).max().unwrap() as f64;
            linf_n += 1;
        }
    }
    let strict = lcm && (0..n).all(|i| text[i] && det[i]);
    OracleMetrics {
        lcm,
        text,
        det,
        strict,
        linf: (linf_n > 0).then(|| linf_sum / linf_n as f64),
        cer: cer_sum / n as f64,
    }
}

fn mutate(rng: &mut ChaCha8Rng, gt: &[GroundedItem]) -> (Vec<GroundedItem>, &'static str) {
    let mut p = gt.to_vec();
    let kind = ["text", "jitter", "insert", "delete", "mixed"][rng.gen_range(0..5)];
    let edits = rng.gen_range(1..=3);
    for _ in 0..edits {
        let k = rng.gen_range(0..p.len().max(1));
        match kind {
            "text" | "mixed" if !p.is_empty() => {
                let mut s = p[k].sequence.clone().into_bytes();
                let pos = rng.gen_range(0..s.len());
                match rng.gen_range(0..3) {
                    0 => s[pos] = b"ACGTN"[rng.gen_range(0..5)],
                    1 => s.insert(pos, b"ACGT"[rng.gen_range(0..4)]),
                    _ if s.len() > 1 => {
                        s.remove(pos);
                    }
                    _ => s.push(b'A'),
                }
                p[k].sequence = String::from_utf8(s).unwrap();
            }
            "jitter" if !p.is_empty() => {
                let b = &mut p[k].boxes[0].bbox;
                let d = rng.gen_range(0..=3);
                match rng.gen_range(0..4) {
                    0 => b.x1 = b.x1.saturating_sub(d),
                    1 => b.x2 += d,
                    2 => b.y1 = b.y1.saturating_sub(d),
                    _ => b.y2 += d,
                }
            }
            "insert" => {
                let at = rng.gen_range(0..=p.len());
                let mut extra = gt[rng.gen_range(0..gt.len())].clone();
                extra.sequence.push('C');
                p.insert(at, extra);
            }
            "delete" if !p.is_empty() => {
                p.remove(k);
            }
            _ => {}
        }
    }
    if kind == "mixed" && !p.is_empty() {
        let b = &mut p[0].boxes[0].bbox;
        b.x2 += rng.gen_range(0..=2);
    }
    (p, kind)
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for case in 0..500 {
        let n = rng.gen_range(1..=30);
        let bases = {
            let n = rng.gen_range(200..=4000);
            random_bases(&mut rng, n, b"ACGT")
        };
        let doc = render("chr5", &bases);
        let gt: Vec<GroundedItem> = doc.rows()[..n.min(doc.rows().len())]
            .iter()
            .map(|r| GroundedItem {
                sequence: doc.row_text(r),
                boxes: vec![doc.row_region(r)],
            })
            .collect();
        let (pred, kind) = mutate(&mut rng, &gt);
        *kinds.entry(kind).or_default() += 1;
        let text = format_response(&dnadoc::wire::ResponseDoc {
            task: TaskId::T2,
            payload: dnadoc::wire::Payload::Items(pred.clone()),
        });
        let lines: Vec<PredictedLine> = if pred.is_empty() {
            Vec::new()
        } else {
            parse_prediction_lines(&text, TaskId::T2)
        };
        for tau in [0.5, 0.9, 0.99] {
            let m = evaluate_ordered(&gt, &lines, &MatchCriteria::new(tau).unwrap()).map_err(|e| e.to_string())?;
            let o = oracle(&gt, &pred, tau);
            ensure(
                m.lcm == o.lcm && m.text == o.text && m.det == o.det && m.strict() == o.strict,
                || format!("case {case} ({kind}, tau {tau}): indicator mismatch"),
            )?;
            let joint: Vec<bool> = o.text.iter().zip(&o.det).map(|(a, b)| *a && *b).collect();
            ensure(m.joint() == joint, || format!("case {case}: joint mismatch"))?;
            ensure((m.text_cer() - o.cer).abs() <= 1e-9, || {
                format!("case {case}: CER {} vs {}", m.text_cer(), o.cer)
            })?;
            let linf_ok = match (m.linf_err(), o.linf) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
                (None, None) => true,
                _ => false,
            };
            ensure(linf_ok, || {
                format!("case {case}: linf {:?} vs {:?}", m.linf_err(), o.linf)
            })?;
        }
    }
    let mix: Vec<String> = kinds.iter().map(|(k, v)| format!("{k}={v}")).collect();
    Ok(format!("500 cases x 3 thresholds agree ({})", mix.join(" ")))
}

// 6
fn edit_distance_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..10_000 {
        let a = {
            let n = rng.gen_range(0..=12);
            random_bases(&mut rng, n, b"ACG")
        };
        let b = {
            let n = rng.gen_range(0..=12);
            random_bases(&mut rng, n, b"ACG")
        };
        let want = oracle_ed(a.as_bytes(), b.as_bytes());
        ensure(edit_distance(&a, &b) == want, || format!("pair {k}: {a:?} {b:?}"))?;
        if !a.is_empty() {
            let cer = text_cer(&a, &b).map_err(|e| e.to_string())?;
            ensure(cer == want as f64 / a.len() as f64, || format!("pair {k}: CER {cer}"))?;
        }
    }
    Ok("10000 pairs, lengths 0..=12 over {A,C,G}, 0 mismatches".into())
}

// 7
fn sampler_statistics() -> Outcome {
    let cfg = SamplerConfig::hg38_stage1();
    let target = [0.25, 0.20, 0.15, 0.15, 0.15, 0.10];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = [0usize; 6];
    const DRAWS: usize = 100_000;
    for _ in 0..DRAWS {
        counts[sample_task(&cfg, &mut rng).index()] += 1;
    }
    let mut worst: f64 = 0.0;
    for t in 0..6 {
        let f = counts[t] as f64 / DRAWS as f64;
        worst = worst.max((f - target[t]).abs());
        ensure((f - target[t]).abs() <= 0.01, || {
            format!("T{}: {f} vs {}", t + 1, target[t])
        })?;
    }
    let sched = CurriculumSchedule::default();
    ensure(anneal_prompt_length(&sched, 0) == [0.2, 0.2, 0.6], || {
        "s=0 distribution".into()
    })?;
    for s in [sched.total_steps, sched.total_steps + 1, 10 * sched.total_steps] {
        ensure(anneal_prompt_length(&sched, s) == [0.1, 0.1, 0.8], || {
            format!("s={s} distribution")
        })?;
    }
    Ok(format!(
        "max |freq - pi| = {worst:.4} over 100k draws; anneal endpoints exact"
    ))
}

// 8
fn naive_occurrences(text: &str, q: &str, overlap: bool) -> Vec<usize> {
    let (t, q) = (text.as_bytes(), q.as_bytes());
    let mut out = Vec::new();
    let mut i = 0;
    while i + q.len() <= t.len() {
        if &t[i..i + q.len()] == q {
            out.push(i);
            i += if overlap { 1 } else { q.len() };
        } else {
            i += 1;
        }
    }
    out
}

fn glyph_union_regions(doc: &DnaDocument, start: usize, len: usize) -> Vec<RegionRef> {
    let mut out: Vec<RegionRef> = Vec::new();
    for g in start..start + len {
        let a = doc.annotation(g).unwrap();
        match out.last_mut() {
            Some(r) if r.img_id == a.page_index as u32 && r.bbox.y1 == a.page_bbox.y1 => r.bbox.x2 = a.page_bbox.x2,
            _ => out.push(RegionRef::new(a.page_index as u32, a.page_bbox)),
        }
    }
    out
}

fn occurrence_oracle() -> Outcome {
    let mut total = 0;
    for case in 0..1000u64 {
        let mut rng = sample_rng(8, case, 0);
        let alphabet: &[u8] = [&b"ACGT"[..], b"AC", b"A", b"ACGTN"][rng.gen_range(0..4)];
        let text = {
            let n = rng.gen_range(1..=4000);
            random_bases(&mut rng, n, alphabet)
        };
        let ql = rng.gen_range(6..=64);
        let query = if rng.gen_bool(0.7) && text.len() >= ql {
            let s = rng.gen_range(0..=text.len() - ql);
            text[s..s + ql].to_string()
        } else {
            random_bases(&mut rng, ql, alphabet)
        };
        let doc = render("chr8", &text);
        for overlap in [true, false] {
            let got = find_occurrences(&doc, &query, overlap).map_err(|e| e.to_string())?;
            let want = naive_occurrences(&text, &query, overlap);
            let pos: Vec<usize> = got.iter().map(|o| o.position).collect();
            ensure(pos == want, || {
                format!("case {case} overlap={overlap}: {} vs {} matches", pos.len(), want.len())
            })?;
            for o in &got {
                ensure(o.regions == glyph_union_regions(&doc, o.position, query.len()), || {
                    format!("case {case}: regions at {}", o.position)
                })?;
            }
            total += want.len();
        }
    }
    Ok(format!("1000 cases, both overlap modes, {total} matches, 0 mismatches"))
}

// 9
fn truncation_semantics() -> Outcome {
    let mut dropped_pages = 0;
    for case in 0..200u64 {
        let mut rng = sample_rng(9, case, 0);
        let bases = {
            let n = rng.gen_range(1..=6000);
            random_bases(&mut rng, n, b"ACGT")
        };
        let doc = render("chr3", &bases);
        let items: Vec<SupervisionItem> = if rng.gen_bool(0.5) {
            doc.rows()
                .iter()
                .map(|r| SupervisionItem {
                    sequence: doc.row_text(r),
                    regions: vec![doc.row_region(r)],
                    start: Some(r.first_char),
                })
                .collect()
        } else {
            let mut v: Vec<SupervisionItem> = (0..rng.gen_range(1..=12))
                .map(|_| {
                    let r = doc.rows()[rng.gen_range(0..doc.rows().len())];
                    let len = rng.gen_range(1..=8).min(r.len);
                    let s = r.first_char + rng.gen_range(0..=r.len - len);
                    SupervisionItem {
                        sequence: bases[s..s + len].to_string(),
                        regions: doc.interval_to_regions(s, s + len).unwrap(),
                        start: Some(s),
                    }
                })
                .collect();
            v.sort_by_key(|i| i.start);
            v
        };
        let m = items.len();
        let rho: f64 = rng.gen();
        let k = (rho * m as f64).floor() as usize;
        let result = truncate_tail(&doc, &items, rho);
        if k == m {
            ensure(result == Err(TaskError::AllItemsTruncated(m)), || {
                format!("case {case}: expected AllItemsTruncated")
            })?;
            continue;
        }
        let (out, kept) = result.map_err(|e| format!("case {case}: {e}"))?;
        ensure(kept.len() == m - k, || {
            format!("case {case}: kept {} of {m}, rho {rho}", kept.len())
        })?;

        // surviving items are the prefix, with pages renumbered
        let mut used: Vec<usize> = items[..m - k]
            .iter()
            .flat_map(|i| i.regions.iter().map(|r| r.img_id as usize))
            .collect();
        used.sort();
        used.dedup();
        for (a, b) in items[..m - k].iter().zip(&kept) {
            ensure(a.sequence == b.sequence && a.regions.len() == b.regions.len(), || {
                format!("case {case}: item changed")
            })?;
            for (ra, rb) in a.regions.iter().zip(&b.regions) {
                let new = if k == 0 {
                    ra.img_id
                } else {
                    used.binary_search(&(ra.img_id as usize)).unwrap() as u32
                };
                ensure(ra.bbox == rb.bbox && rb.img_id == new, || {
                    format!("case {case}: region remap")
                })?;
            }
        }
        let expected_pages = if k == 0 { doc.page_count() } else { used.len() };
        ensure(out.page_count() == expected_pages, || {
            format!("case {case}: {} pages, expected {expected_pages}", out.page_count())
        })?;
        if k > 0 {
            dropped_pages += doc.page_count() - out.page_count();
        }
        for (p, page) in out.pages().iter().enumerate() {
            ensure(page.annotations.iter().all(|a| a.page_index == p), || {
                format!("case {case}: page_index not contiguous")
            })?;
        }

        // pixel scan
        let covered = |g: usize, set: &[SupervisionItem]| {
            set.iter().any(|i| {
                let s = i.start.unwrap();
                g >= s && g < s + i.sequence.len()
            })
        };
        let old_to_new = |p: usize| if k == 0 { Some(p) } else { used.binary_search(&p).ok() };
        for g in 0..bases.len() {
            let a = doc.annotation(g).unwrap();
            let Some(np) = old_to_new(a.page_index) else { continue };
            let b = a.page_bbox;
            let img = &out.pages()[np].image;
            let orig = &doc.pages()[a.page_index].image;
            let whited = covered(g, &items[m - k..]) && !covered(g, &items[..m - k]);
            for y in b.y1..b.y2 {
                for x in b.x1..b.x2 {
                    let px = img.get_pixel(x, y).0;
                    if whited {
                        ensure(px == WHITE, || {
                            format!("case {case}: glyph {g} not whited at ({x},{y})")
                        })?;
                    } else {
                        ensure(px == orig.get_pixel(x, y).0, || {
                            format!("case {case}: glyph {g} altered at ({x},{y})")
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!(
        "200 cases, floor(rho*M) suffix removed, pixels scanned, {dropped_pages} pages dropped and re-indexed"
    ))
}

// 10
fn synthetic_fasta(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut s = String::new();
    for (label, n) in [
        ("chr1", 9000),
        ("chr7", 6000),
        ("chrX", 5000),
        ("chr22", 4500),
        ("chrUn_gl000220", 4200),
    ] {
        s.push_str(&format!(">{label} synthetic\n"));
        let bases = random_bases(&mut rng, n, b"ACGT");
        for chunk in bases.as_bytes().chunks(70) {
            s.push_str(std::str::from_utf8(chunk).unwrap());
            s.push('\n');
        }
    }
    std::fs::write(path, s).unwrap();
}

fn dnadoc(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dnadoc"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "dnadoc {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fasta = tmp.path().join("synthetic.fa");
    synthetic_fasta(&fasta);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let ev = tmp.path().join("eval");
    let p = |x: &Path| x.to_str().unwrap().to_string();
    let gen = |out: &Path| {
        dnadoc(&[
            "gen-dataset",
            &p(&fasta),
            "--preset",
            "hg38-stage1",
            "--count",
            "600",
            "--seed",
            "20240",
            "--out",
            &p(out),
        ])
    };
    gen(&a)?;
    dnadoc(&["verify", &p(&a)])?;
    let shard = a.join("shard-00000.jsonl");
    dnadoc(&["eval", &p(&a), &p(&shard), "--out", &p(&ev)])?;

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ev.join("report.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let tasks = &report["tasks"];
    for t in ["T2", "T3", "T4", "T5"] {
        let rows = tasks[t]["thresholds"]
            .as_array()
            .ok_or(format!("{t} missing from report"))?;
        let row = rows
            .iter()
            .find(|r| r["iou_threshold"].as_f64() == Some(0.99))
            .ok_or(format!("{t}: no tau=0.99 row"))?;
        for key in ["lcm", "text_em", "det_acc", "joint", "strict"] {
            ensure(row[key].as_f64() == Some(1.0), || format!("{t} {key} = {}", row[key]))?;
        }
        ensure(
            row["linf_err"].as_f64() == Some(0.0) && row["text_cer"].as_f64() == Some(0.0),
            || format!("{t}: linf {} cer {}", row["linf_err"], row["text_cer"]),
        )?;
    }
    ensure(tasks["T5"]["thresholds"].as_array().map(Vec::len) == Some(4), || {
        "T5 table needs 4 rows".into()
    })?;
    ensure(tasks["T6"]["accuracy"].as_f64() == Some(1.0), || {
        format!("T6 accuracy {}", tasks["T6"]["accuracy"])
    })?;
    ensure(tasks["T1"]["text_em"].as_f64() == Some(1.0), || "T1 exact match".into())?;

    gen(&b)?;
    let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
    ensure(ta == tb, || "rerun with the same seed differs".into())?;
    Ok(format!(
        "600 samples, self-eval perfect at tau=0.99 for T2-T5, T6 acc 1.0, rerun byte-identical over {} files",
        ta.len()
    ))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("annotation fidelity", Duration::from_secs(1), annotation_fidelity),
        ("capacity claim", Duration::from_secs(1), capacity_claim),
        ("token budget", Duration::from_secs(1), token_budget_table),
        ("round-trip property suite", Duration::from_secs(60), round_trip_suite),
        ("metric oracle equivalence", Duration::from_secs(30), metric_oracle),
        ("edit distance oracle", Duration::from_secs(30), edit_distance_oracle),
        ("sampler statistics", Duration::from_secs(10), sampler_statistics),
        ("T5 occurrence correctness", Duration::from_secs(30), occurrence_oracle),
        ("truncation semantics", Duration::from_secs(30), truncation_semantics),
        ("end-to-end smoke", Duration::from_secs(300), end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let dt = t0.elapsed();
        let outcome = match outcome {
            Ok(msg) if dt > *budget => Err(format!("{msg}; but took {dt:.2?} (budget {budget:?})")),
            o => o,
        };
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} [{dt:.2?}]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{dt:.2?}]: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
