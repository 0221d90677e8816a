//! Context rendering for table sets.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::markdown::{format_row, separator_row};
use super::Table;
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderVariant {
    /// Pipe-delimited rows with a `| --- |` separator.
    CanonicalMarkdown,
    /// Header and cell tokens joined by single spaces.
    NoDelimiter,
    /// No-delimiter text with noise snippets inserted at data-cell boundaries.
    NoiseInjected,
    /// Markdown layout over tables of unrelated words (see
    /// [`generate_no_semantic`](super::generate_no_semantic)).
    NoSemantic,
}

impl RenderVariant {
    pub const ALL: [RenderVariant; 4] = [
        RenderVariant::CanonicalMarkdown,
        RenderVariant::NoDelimiter,
        RenderVariant::NoiseInjected,
        RenderVariant::NoSemantic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RenderVariant::CanonicalMarkdown => "canonical-markdown",
            RenderVariant::NoDelimiter => "no-delimiter",
            RenderVariant::NoiseInjected => "noise-injected",
            RenderVariant::NoSemantic => "no-semantic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }
}

impl std::fmt::Display for RenderVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("nothing to render: empty table set")]
    EmptyTableSet,
    #[error("noise rate {0} outside [0, 1]")]
    NoiseRate(f64),
    #[error("noise rate > 0 requires a non-empty noise corpus")]
    EmptyNoiseCorpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub variant: RenderVariant,
    #[serde(default)]
    pub noise_rate: f64,
    #[serde(default)]
    pub noise_corpus: Vec<String>,
    #[serde(default)]
    pub rng_seed: u64,
    /// Emit each table's name on its own line above the table body.
    #[serde(default = "default_titles")]
    pub titles: bool,
}

fn default_titles() -> bool {
    true
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self::new(RenderVariant::CanonicalMarkdown)
    }
}

impl RenderOptions {
    pub fn new(variant: RenderVariant) -> Self {
        Self {
            variant,
            noise_rate: 0.0,
            noise_corpus: Vec::new(),
            rng_seed: 0,
            titles: true,
        }
    }

    pub fn noise(rate: f64, corpus: Vec<String>, seed: u64) -> Self {
        Self {
            variant: RenderVariant::NoiseInjected,
            noise_rate: rate,
            noise_corpus: corpus,
            rng_seed: seed,
            titles: true,
        }
    }

    pub fn without_titles(mut self) -> Self {
        self.titles = false;
        self
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(RenderError::NoiseRate(self.noise_rate));
        }
        if self.noise_rate > 0.0 && self.noise_corpus.is_empty() {
            return Err(RenderError::EmptyNoiseCorpus);
        }
        Ok(())
    }
}

/// Counts tokens of rendered text for length budgets.
pub trait Tokenizer {
    fn count(&self, text: &str) -> usize;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub token_count: usize,
    /// Noise snippets inserted (noise-injected variant only).
    pub noise_inserts: usize,
    /// Data-region boundaries eligible for noise.
    pub noise_boundaries: usize,
}

/// Render a table set with the default whitespace tokenizer.
pub fn render(tables: &[Table], options: &RenderOptions) -> Result<Rendered, RenderError> {
    render_with(tables, options, &WhitespaceTokenizer)
}

/// Render a table set; tables are separated by a blank line.
///
/// Noise draws for each table come from a stream keyed by the table name,
/// so a table renders identically wherever it sits in the set.
pub fn render_with(
    tables: &[Table],
    options: &RenderOptions,
    tokenizer: &dyn Tokenizer,
) -> Result<Rendered, RenderError> {
    options.validate()?;
    if tables.is_empty() {
        return Err(RenderError::EmptyTableSet);
    }
    let mut text = String::new();
    let mut inserts = 0;
    let mut boundaries = 0;
    for (i, table) in tables.iter().enumerate() {
        if i > 0 {
            text.push_str("\n\n");
        }
        let block = render_block(table, options);
        text.push_str(&block.text);
        inserts += block.noise_inserts;
        boundaries += block.noise_boundaries;
    }
    let token_count = tokenizer.count(&text);
    Ok(Rendered {
        text,
        token_count,
        noise_inserts: inserts,
        noise_boundaries: boundaries,
    })
}

struct Block {
    text: String,
    noise_inserts: usize,
    noise_boundaries: usize,
}

fn render_block(table: &Table, options: &RenderOptions) -> Block {
    let mut text = String::new();
    if options.titles {
        text.push_str(table.name());
        text.push('\n');
    }
    match options.variant {
        RenderVariant::CanonicalMarkdown | RenderVariant::NoSemantic => {
            text.push_str(&markdown_block(table));
            Block {
                text,
                noise_inserts: 0,
                noise_boundaries: 0,
            }
        }
        RenderVariant::NoDelimiter => {
            text.push_str(&plain_tokens(table).join(" "));
            Block {
                text,
                noise_inserts: 0,
                noise_boundaries: 0,
            }
        }
        RenderVariant::NoiseInjected => {
            let (body, inserts, boundaries) = noisy_block(table, options);
            text.push_str(&body);
            Block {
                text,
                noise_inserts: inserts,
                noise_boundaries: boundaries,
            }
        }
    }
}

/// Header, separator and one line per row: `n + 2` lines.
pub(crate) fn markdown_block(table: &Table) -> String {
    let mut lines = Vec::with_capacity(table.n_rows() + 2);
    lines.push(format_row(table.headers()));
    lines.push(separator_row(table.n_cols()));
    for row in table.rows() {
        lines.push(format_row(row));
    }
    lines.join("\n")
}

fn plain_tokens(table: &Table) -> Vec<&str> {
    table
        .headers()
        .iter()
        .chain(table.rows().iter().flatten())
        .map(String::as_str)
        .collect()
}

fn noisy_block(table: &Table, options: &RenderOptions) -> (String, usize, usize) {
    let tokens = plain_tokens(table);
    let m = table.n_cols();
    let mut rng = stream_rng(options.rng_seed, &format!("noise/{}", table.name()), 0);
    let mut out: Vec<&str> = Vec::with_capacity(tokens.len() * 2);
    let mut inserts = 0;
    let mut boundaries = 0;
    for (i, tok) in tokens.iter().enumerate() {
        out.push(tok);
        // Boundaries between two data-region cells only.
        if i >= m && i + 1 < tokens.len() {
            boundaries += 1;
            if options.noise_rate > 0.0 && rng.random::<f64>() < options.noise_rate {
                let pick = rng.random_range(0..options.noise_corpus.len());
                out.push(&options.noise_corpus[pick]);
                inserts += 1;
            }
        }
    }
    (out.join(" "), inserts, boundaries)
}
