//! Task synthesis: (tables, question, SQL, answer) instances with controlled
//! difficulty.
//!
//! ```
//! use tabula::synth::{build_instance, demo_corpus, SynthConfig, TaskDimension};
//!
//! let corpus = demo_corpus(7, 40);
//! let config = SynthConfig::default();
//! let inst = build_instance(TaskDimension::MultiHop, &config, &corpus, 99).unwrap();
//! assert!(inst.verify(Some(&config.difficulty)).is_empty());
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod build;
pub mod corpus;
pub mod pack;
pub mod templates;

pub use build::{
    build_instance, instance_seed, plan_instance, synthesize, DimensionMix, InstanceMeta, InstancePlan,
    SynthConfig, TaskInstance,
};
pub use corpus::{demo_corpus, Corpus, Manifest, ManifestEntry};
pub use pack::{pack_context, PackedContext};
pub use templates::{generate_query, instantiate, GeneratedQuery, Template};

use crate::external::CommandError;
use crate::sql::SqlError;
use crate::table::{IngestError, NoSemanticError, RenderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskDimension {
    PreciseRetrieval,
    MultiHop,
    Grounding,
}

impl TaskDimension {
    pub const ALL: [TaskDimension; 3] = [
        TaskDimension::PreciseRetrieval,
        TaskDimension::MultiHop,
        TaskDimension::Grounding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskDimension::PreciseRetrieval => "precise-retrieval",
            TaskDimension::MultiHop => "multi-hop",
            TaskDimension::Grounding => "grounding",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

impl std::fmt::Display for TaskDimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Involved-cell difficulty buckets. The open-ended top bucket is capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellBucket {
    #[serde(rename = "0-30", alias = "small")]
    Small,
    #[serde(rename = "0-100", alias = "medium")]
    Medium,
    #[serde(rename = "300+", alias = "large")]
    Large,
}

impl CellBucket {
    pub const ALL: [CellBucket; 3] = [CellBucket::Small, CellBucket::Medium, CellBucket::Large];
    pub const LARGE_CAP: usize = 5000;

    /// Inclusive bounds.
    pub fn bounds(self) -> (usize, usize) {
        match self {
            CellBucket::Small => (0, 30),
            CellBucket::Medium => (0, 100),
            CellBucket::Large => (101, Self::LARGE_CAP),
        }
    }

    pub fn contains(self, cells: usize) -> bool {
        let (lo, hi) = self.bounds();
        (lo..=hi).contains(&cells)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellBucket::Small => "0-30",
            CellBucket::Medium => "0-100",
            CellBucket::Large => "300+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCountRange {
    pub min: usize,
    pub max: usize,
}

impl TableCountRange {
    pub const LIMIT: usize = 30;

    pub fn contains(self, n: usize) -> bool {
        (self.min..=self.max).contains(&n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DifficultyConfig {
    pub cell_bucket: CellBucket,
    pub table_count: TableCountRange,
    pub target_tokens: usize,
    pub rng_seed: u64,
}

impl Default for DifficultyConfig {
    fn default() -> Self {
        Self {
            cell_bucket: CellBucket::Medium,
            table_count: TableCountRange { min: 1, max: 30 },
            target_tokens: 4096,
            rng_seed: 0,
        }
    }
}

impl DifficultyConfig {
    pub const MIN_BUDGET: usize = 256;

    pub fn validate(&self) -> Result<(), SynthError> {
        let r = self.table_count;
        if r.min < 1 || r.min > r.max || r.max > TableCountRange::LIMIT {
            return Err(SynthError::Config(format!(
                "table count range [{}, {}] must satisfy 1 <= min <= max <= {}",
                r.min,
                r.max,
                TableCountRange::LIMIT
            )));
        }
        if self.target_tokens < Self::MIN_BUDGET {
            return Err(SynthError::Config(format!(
                "token budget {} below {}",
                self.target_tokens,
                Self::MIN_BUDGET
            )));
        }
        Ok(())
    }

    /// `[round(0.9 B), round(1.1 B)]`.
    pub fn token_bounds(&self) -> (usize, usize) {
        token_bounds(self.target_tokens)
    }
}

pub fn token_bounds(budget: usize) -> (usize, usize) {
    let b = budget as f64;
    ((0.9 * b).round() as usize, (1.1 * b).round() as usize)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("no {dimension} template applies: {reason}")]
    NoTemplate { dimension: TaskDimension, reason: String },
    #[error("primary tables alone take {tokens} tokens, above the limit {limit}")]
    Overflow { tokens: usize, limit: usize },
    #[error("{primary} primary tables exceed the table-count maximum {max}")]
    TooManyPrimaries { primary: usize, max: usize },
    #[error("distractor `{0}` has the same name as a primary table")]
    NameClash(String),
    #[error("{dimension}: gave up after {attempts} attempts ({})", histogram_line(.histogram))]
    Exhausted {
        dimension: TaskDimension,
        attempts: u32,
        histogram: BTreeMap<String, u32>,
    },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("duplicate table name `{0}` in corpus")]
    DuplicateTable(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Ingest(String),
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    NoSemantic(#[from] NoSemanticError),
    #[error(transparent)]
    Command(#[from] CommandError),
}

impl From<IngestError> for SynthError {
    fn from(e: IngestError) -> Self {
        SynthError::Ingest(e.to_string())
    }
}

fn histogram_line(h: &BTreeMap<String, u32>) -> String {
    h.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join(", ")
}

/// Short phrases used as default noise snippets.
pub fn default_noise_corpus() -> Vec<String> {
    [
        "see note below",
        "as listed earlier",
        "n/a",
        "figures are provisional",
        "continued",
        "source unknown",
        "revised",
        "approx.",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_bounds() {
        assert_eq!(token_bounds(4096), (3686, 4506));
        assert_eq!(token_bounds(16384), (14746, 18022));
        assert_eq!(token_bounds(8192), (7373, 9011));
    }

    #[test]
    fn config_validation() {
        let mut c = DifficultyConfig::default();
        assert!(c.validate().is_ok());
        c.table_count = TableCountRange { min: 3, max: 2 };
        assert!(c.validate().is_err());
        c.table_count = TableCountRange { min: 1, max: 31 };
        assert!(c.validate().is_err());
        c = DifficultyConfig {
            target_tokens: 255,
            ..DifficultyConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn buckets() {
        assert!(CellBucket::Small.contains(0) && CellBucket::Small.contains(30));
        assert!(!CellBucket::Small.contains(31));
        assert!(!CellBucket::Large.contains(100) && CellBucket::Large.contains(101));
        assert!(!CellBucket::Large.contains(5001));
        let b: CellBucket = toml::from_str::<BTreeMap<String, CellBucket>>("b = \"large\"").unwrap()["b"];
        assert_eq!(b, CellBucket::Large);
    }
}
