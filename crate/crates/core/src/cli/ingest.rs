//! `ingest` and `demo-corpus`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CliError, DemoCorpusArgs, ExitStatus, IngestArgs};
use crate::synth::{demo_corpus, Manifest, ManifestEntry};
use crate::table::{load_table_file, Table, Tokenizer, WhitespaceTokenizer};

const EXTENSIONS: [&str; 3] = ["csv", "md", "markdown"];

fn has_table_extension(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>, errors: &mut Vec<String>) {
    if path.is_dir() {
        let entries = match std::fs::read_dir(path) {
            Ok(e) => e,
            Err(e) => {
                errors.push(format!("{}: {e}", path.display()));
                return;
            }
        };
        let mut children: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        children.sort();
        for c in children {
            if c.is_dir() {
                collect_files(&c, out, errors);
            } else if has_table_extension(&c) {
                out.push(c);
            }
        }
    } else {
        out.push(path.to_path_buf());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub min: usize,
    pub median: f64,
    pub mean: f64,
    pub max: usize,
}

impl Distribution {
    fn of(mut values: Vec<usize>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_unstable();
        let n = values.len();
        let median = if n % 2 == 1 {
            values[n / 2] as f64
        } else {
            (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
        };
        Some(Self {
            min: values[0],
            median,
            mean: values.iter().sum::<usize>() as f64 / n as f64,
            max: values[n - 1],
        })
    }
}

/// Corpus statistics over data cells (headers excluded).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub tables: usize,
    pub rows: Option<Distribution>,
    pub columns: Option<Distribution>,
    pub cells: usize,
    pub empty_cells: usize,
    pub tokens: usize,
    pub tokens_per_cell: f64,
    pub bytes: usize,
    pub bytes_per_cell: f64,
    pub non_ascii_bytes: usize,
    pub non_ascii_fraction: f64,
    pub errors: Vec<String>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn corpus_stats(tables: &[Table], tokenizer: &dyn Tokenizer) -> CorpusStats {
    let (mut cells, mut empty, mut tokens, mut bytes, mut non_ascii) = (0, 0, 0, 0, 0);
    for cell in tables.iter().flat_map(|t| t.rows().iter().flatten()) {
        cells += 1;
        empty += usize::from(cell.trim().is_empty());
        tokens += tokenizer.count(cell);
        bytes += cell.len();
        non_ascii += cell.bytes().filter(|b| !b.is_ascii()).count();
    }
    CorpusStats {
        tables: tables.len(),
        rows: Distribution::of(tables.iter().map(Table::n_rows).collect()),
        columns: Distribution::of(tables.iter().map(Table::n_cols).collect()),
        cells,
        empty_cells: empty,
        tokens,
        tokens_per_cell: ratio(tokens, cells),
        bytes,
        bytes_per_cell: ratio(bytes, cells),
        non_ascii_bytes: non_ascii,
        non_ascii_fraction: ratio(non_ascii, bytes),
        errors: Vec::new(),
    }
}

fn write_stats(s: &CorpusStats, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "tables: {}", s.tables)?;
    for (label, d) in [("rows", &s.rows), ("columns", &s.columns)] {
        if let Some(d) = d {
            writeln!(
                out,
                "{label}: min {} median {} mean {:.2} max {}",
                d.min, d.median, d.mean, d.max
            )?;
        }
    }
    writeln!(out, "cells: {} ({} empty)", s.cells, s.empty_cells)?;
    writeln!(out, "tokens per cell: {:.3}", s.tokens_per_cell)?;
    writeln!(
        out,
        "bytes: {} ({:.3} per cell, {:.4} non-ascii)",
        s.bytes, s.bytes_per_cell, s.non_ascii_fraction
    )?;
    writeln!(out, "errors: {}", s.errors.len())
}

/// Path of `file` relative to `dir` when it lies below it, absolute otherwise.
fn manifest_path(file: &Path, dir: &Path) -> PathBuf {
    let abs = std::path::absolute(file).unwrap_or_else(|_| file.to_path_buf());
    let base = std::path::absolute(dir).unwrap_or_else(|_| dir.to_path_buf());
    abs.strip_prefix(&base).map(Path::to_path_buf).unwrap_or(abs)
}

pub(super) fn run(args: &IngestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let mut files = Vec::new();
    let mut errors = Vec::new();
    for p in &args.paths {
        if !p.exists() {
            errors.push(format!("{}: no such file or directory", p.display()));
            continue;
        }
        collect_files(p, &mut files, &mut errors);
    }
    let manifest_dir = args.manifest.parent().unwrap_or(Path::new("."));
    let mut seen = BTreeSet::new();
    let mut tables = Vec::new();
    let mut manifest = Manifest::default();
    for f in &files {
        let table = match load_table_file(f) {
            Ok(t) => t,
            Err(crate::table::IngestError::Io { source, .. }) => {
                errors.push(format!("{}: {source}", f.display()));
                continue;
            }
            Err(e) => {
                errors.push(format!("{}: {e}", f.display()));
                continue;
            }
        };
        // Same stem in two directories: suffix the later one.
        let mut name = table.name().to_string();
        let mut k = 2;
        while !seen.insert(name.to_lowercase()) {
            name = format!("{}_{k}", table.name());
            k += 1;
        }
        let table = table.with_name(name.clone()).map_err(|e| CliError::Data(e.to_string()))?;
        manifest.tables.push(ManifestEntry {
            name,
            path: manifest_path(f, manifest_dir),
            tags: args.tags.clone(),
        });
        tables.push(table);
    }
    for e in &errors {
        writeln!(err, "skipped: {e}")?;
    }
    let mut stats = corpus_stats(&tables, &WhitespaceTokenizer);
    stats.errors = errors;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&stats).expect("stats serialize"))?;
    } else {
        write_stats(&stats, out)?;
    }
    if tables.is_empty() {
        return Err(CliError::Data("no tables loaded".into()));
    }
    manifest.save(&args.manifest)?;
    Ok(ExitStatus::Success)
}

pub(super) fn demo(args: &DemoCorpusArgs, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(args.out.display(), e))?;
    let corpus = demo_corpus(args.seed, args.count);
    let mut manifest = Manifest::default();
    for t in corpus.tables() {
        let file = format!("{}.csv", t.name());
        let path = args.out.join(&file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let csv_err = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
        w.write_record(t.headers()).map_err(csv_err)?;
        for row in t.rows() {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(path.display(), e))?;
        manifest.tables.push(ManifestEntry {
            name: t.name().to_string(),
            path: file.into(),
            tags: vec!["demo".into()],
        });
    }
    let manifest_path = args.out.join("manifest.toml");
    manifest.save(&manifest_path)?;
    writeln!(
        out,
        "wrote {} tables and {} (digest {})",
        corpus.len(),
        manifest_path.display(),
        corpus.digest()
    )?;
    Ok(ExitStatus::Success)
}
