//! Tables, row-major linearization and the position/column combinatorics of
//! the linearized sequence.
//!
//! Positions are 1-based throughout this module, matching the convention
//! that the header region occupies positions `1..=m` and the data region
//! `m+1..=L` with `L = m(n+1)`.

mod ingest;
pub mod markdown;
mod no_semantic;
mod render;

pub use ingest::{load_table_file, parse_markdown_table, read_csv_table, IngestError};
pub(crate) use no_semantic::lookup_question;
#[cfg(test)]
pub(crate) use render::markdown_block;
pub use no_semantic::{
    default_word_pool, generate_no_semantic, generate_no_semantic_numbered, NoSemanticTask,
    NoSemanticError, CORNER_HEADER,
};
pub use render::{
    render, render_with, RenderError, RenderOptions, RenderVariant, Rendered, Tokenizer,
    WhitespaceTokenizer,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("table `{0}` has no columns")]
    NoColumns(String),
    #[error("table `{0}` has no rows")]
    NoRows(String),
    #[error("table `{table}`: header {index} is empty")]
    EmptyHeader { table: String, index: usize },
    #[error("table `{table}`: row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("table name must not be empty")]
    EmptyName,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PositionError {
    #[error("position {t} lies in the header region (m = {m})")]
    HeaderRegion { t: usize, m: usize },
    #[error("position {t} is past the end of the sequence (L = {len})")]
    OutOfRange { t: usize, len: usize },
    #[error("column count must be at least 1")]
    NoColumns,
    #[error("a same-column pair needs at least two rows, got {0}")]
    TooFewRows(usize),
}

/// An `n × m` grid of cell strings with column headers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct Table {
    name: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    name: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TryFrom<RawTable> for Table {
    type Error = TableError;
    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        Table::new(raw.name, raw.headers, raw.rows)
    }
}

impl From<Table> for RawTable {
    fn from(t: Table) -> Self {
        RawTable {
            name: t.name,
            headers: t.headers,
            rows: t.rows,
        }
    }
}

impl Table {
    pub fn new(
        name: impl Into<String>,
        headers: Vec<String>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self, TableError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(TableError::EmptyName);
        }
        if headers.is_empty() {
            return Err(TableError::NoColumns(name));
        }
        if rows.is_empty() {
            return Err(TableError::NoRows(name));
        }
        if let Some(index) = headers.iter().position(|h| h.trim().is_empty()) {
            return Err(TableError::EmptyHeader { table: name, index });
        }
        for (row, cells) in rows.iter().enumerate() {
            if cells.len() != headers.len() {
                return Err(TableError::RaggedRow {
                    table: name,
                    row,
                    expected: headers.len(),
                    found: cells.len(),
                });
            }
        }
        Ok(Self {
            name,
            headers,
            rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.headers.len()
    }

    /// Zero-based cell access.
    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.rows[row][col]
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Result<Self, TableError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(TableError::EmptyName);
        }
        self.name = name;
        Ok(self)
    }

    /// Row-major linearization: headers, then every row left to right.
    /// Each cell is one atomic token, however many words it contains.
    pub fn linearize(&self) -> LinearizedSequence {
        let mut tokens = Vec::with_capacity(self.n_cols() * (self.n_rows() + 1));
        tokens.extend(self.headers.iter().cloned());
        for row in &self.rows {
            tokens.extend(row.iter().cloned());
        }
        LinearizedSequence {
            tokens,
            n_rows: self.n_rows(),
            n_cols: self.n_cols(),
            variant: RenderVariant::CanonicalMarkdown,
        }
    }
}

/// The token sequence `W_1..W_L` of a linearized table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedSequence {
    tokens: Vec<String>,
    n_rows: usize,
    n_cols: usize,
    variant: RenderVariant,
}

impl LinearizedSequence {
    /// Wrap an externally produced token stream. The length must be `m(n+1)`.
    pub fn from_tokens(tokens: Vec<String>, n_rows: usize, n_cols: usize) -> Option<Self> {
        if n_cols == 0 || n_rows == 0 || tokens.len() != n_cols * (n_rows + 1) {
            return None;
        }
        Some(Self {
            tokens,
            n_rows,
            n_cols,
            variant: RenderVariant::CanonicalMarkdown,
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// `(n, m)` of the source table.
    pub fn source_dims(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn variant(&self) -> RenderVariant {
        self.variant
    }

    /// Token at 1-based position `t`.
    pub fn token_at(&self, t: usize) -> Option<&str> {
        t.checked_sub(1)
            .and_then(|i| self.tokens.get(i))
            .map(String::as_str)
    }

    /// The data-region tokens `W_{m+1}..W_L`.
    pub fn data_tokens(&self) -> &[String] {
        &self.tokens[self.n_cols..]
    }

    /// Column of 1-based data-region position `t`.
    pub fn column_at(&self, t: usize) -> Result<usize, PositionError> {
        if t > self.len() {
            return Err(PositionError::OutOfRange { t, len: self.len() });
        }
        column_of(t, self.n_cols)
    }
}

/// `col(t) = ((t - m - 1) mod m) + 1` for a 1-based data-region position.
pub fn column_of(t: usize, m: usize) -> Result<usize, PositionError> {
    if m == 0 {
        return Err(PositionError::NoColumns);
    }
    if t <= m {
        return Err(PositionError::HeaderRegion { t, m });
    }
    Ok((t - m - 1) % m + 1)
}

/// Linearized distance between the row-1 and row-n cells of one column.
pub fn same_column_span(n: usize, m: usize) -> Result<usize, PositionError> {
    if m == 0 {
        return Err(PositionError::NoColumns);
    }
    if n < 2 {
        return Err(PositionError::TooFewRows(n));
    }
    Ok((n - 1) * m)
}
