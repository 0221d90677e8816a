//! Instance assembly: template, execution, packing, metadata.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pack::pack_context;
use super::templates::{generate_query, Template};
use super::{default_noise_corpus, CellBucket, Corpus, DifficultyConfig, SynthError, TaskDimension};
use crate::external::ExternalCommand;
use crate::seed::{derive_seed, stream_rng};
use crate::sql::ast::{CmpOp, ColumnRef, Expr, SelectItem, SelectQuery};
use crate::sql::{execute, involved_cells, parse, serialize_result, Relation, Store, Value};
use crate::table::{
    default_word_pool, generate_no_semantic_numbered, lookup_question, RenderOptions, RenderVariant, Table, Tokenizer,
    WhitespaceTokenizer, CORNER_HEADER,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub difficulty: DifficultyConfig,
    /// Render variants drawn uniformly per instance.
    pub variants: Vec<RenderVariant>,
    #[serde(default)]
    pub noise_rate: f64,
    /// Defaults to [`default_noise_corpus`] when empty.
    #[serde(default)]
    pub noise_corpus: Vec<String>,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Optional question rewriter: question on stdin, rewritten question on stdout.
    #[serde(default)]
    pub rewriter: Option<ExternalCommand>,
}

fn default_retries() -> u32 {
    32
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            difficulty: DifficultyConfig::default(),
            variants: vec![RenderVariant::CanonicalMarkdown],
            noise_rate: 0.0,
            noise_corpus: Vec::new(),
            max_retries: default_retries(),
            rewriter: None,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        self.difficulty.validate()?;
        if self.variants.is_empty() {
            return Err(SynthError::Config("no render variants".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(SynthError::Config(format!("noise rate {} outside [0, 1]", self.noise_rate)));
        }
        if self.max_retries == 0 {
            return Err(SynthError::Config("max_retries must be at least 1".into()));
        }
        Ok(())
    }

    fn render_options(&self, variant: RenderVariant, seed: u64) -> RenderOptions {
        let mut o = RenderOptions::new(variant);
        o.rng_seed = derive_seed(seed, "render", 0);
        if variant == RenderVariant::NoiseInjected {
            o.noise_rate = self.noise_rate;
            o.noise_corpus = if self.noise_corpus.is_empty() {
                default_noise_corpus()
            } else {
                self.noise_corpus.clone()
            };
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub dimension: TaskDimension,
    pub involved_cells: usize,
    pub table_count: usize,
    pub token_length: usize,
    pub render_variant: RenderVariant,
    pub seed: u64,
    #[serde(default)]
    pub cell_bucket: Option<CellBucket>,
    #[serde(default)]
    pub template: Option<Template>,
    #[serde(default)]
    pub under_budget: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskInstance {
    pub id: String,
    pub context: String,
    pub tables: Vec<Table>,
    pub question: String,
    pub sql: String,
    /// Serialized gold result.
    pub answer: String,
    pub meta: InstanceMeta,
}

impl TaskInstance {
    /// Recompute everything recomputable; returns the list of violations.
    pub fn verify(&self, config: Option<&DifficultyConfig>) -> Vec<String> {
        let mut problems = Vec::new();
        let q = match parse(&self.sql) {
            Ok(q) => q,
            Err(e) => return vec![format!("gold SQL does not parse: {e}")],
        };
        let store = match Store::from_tables(&self.tables) {
            Ok(s) => s,
            Err(e) => return vec![format!("tables do not re-ingest: {e}")],
        };
        match execute(&q, &store) {
            Ok(r) if serialize_result(&r) == self.answer => {}
            Ok(_) => problems.push("re-execution differs from the stored answer".into()),
            Err(e) => problems.push(format!("gold SQL fails: {e}")),
        }
        match involved_cells(&q, &store) {
            Ok(n) if n == self.meta.involved_cells => {}
            Ok(n) => problems.push(format!("involved cells {n} != recorded {}", self.meta.involved_cells)),
            Err(e) => problems.push(format!("involved-cell count fails: {e}")),
        }
        let tokens = WhitespaceTokenizer.count(&self.context);
        if tokens != self.meta.token_length {
            problems.push(format!("token length {tokens} != recorded {}", self.meta.token_length));
        }
        if self.tables.len() != self.meta.table_count {
            problems.push("table count mismatch".into());
        }
        if let Some(p) = dimension_violation(self.meta.dimension, &q) {
            problems.push(p);
        }
        if let Some(c) = config {
            if !c.cell_bucket.contains(self.meta.involved_cells) {
                problems.push(format!(
                    "{} involved cells outside bucket {}",
                    self.meta.involved_cells,
                    c.cell_bucket.as_str()
                ));
            }
            let (lo, hi) = c.token_bounds();
            if !self.meta.under_budget && !(lo..=hi).contains(&self.meta.token_length) {
                problems.push(format!("{} tokens outside [{lo}, {hi}] and not flagged", self.meta.token_length));
            }
            if !self.meta.under_budget && !c.table_count.contains(self.meta.table_count) {
                problems.push(format!("{} tables outside the configured range", self.meta.table_count));
            }
        }
        problems
    }
}

/// AST check that the query has its dimension's shape.
pub(crate) fn dimension_violation(dimension: TaskDimension, q: &SelectQuery) -> Option<String> {
    match dimension {
        TaskDimension::PreciseRetrieval if q.selection.is_none() || q.has_aggregate() => {
            Some("retrieval needs a WHERE and no aggregate".into())
        }
        TaskDimension::MultiHop if !q.has_aggregate() => Some("multi-hop needs an aggregate".into()),
        TaskDimension::Grounding if q.joins.is_empty() => Some("grounding needs a JOIN".into()),
        _ => None,
    }
}

/// Successful attempt before packing.
struct Drafted {
    dimension: TaskDimension,
    template: Option<Template>,
    primary: Vec<Table>,
    query: SelectQuery,
    question: String,
}

fn bump(h: &mut BTreeMap<String, u32>, key: &str) {
    *h.entry(key.to_string()).or_insert(0) += 1;
}

/// Row-count preference that makes a bucket hit likely.
fn suits_bucket(bucket: CellBucket, t: &Table) -> bool {
    match bucket {
        CellBucket::Small => t.n_rows() <= 12,
        CellBucket::Medium => t.n_rows() <= 45,
        CellBucket::Large => t.n_rows() >= 50,
    }
}

fn shares_header(a: &Table, b: &Table) -> bool {
    a.name() != b.name()
        && a
            .headers()
            .iter()
            .any(|h| b.headers().iter().any(|g| g.eq_ignore_ascii_case(h)))
}

/// Build one instance. `seed` fixes every random choice; retries draw fresh
/// sub-seeds from it.
pub fn build_instance(
    dimension: TaskDimension,
    config: &SynthConfig,
    corpus: &Corpus,
    seed: u64,
) -> Result<TaskInstance, SynthError> {
    build_with_variant(dimension, config.variants[0], config, corpus, seed)
}

pub(crate) fn build_with_variant(
    dimension: TaskDimension,
    variant: RenderVariant,
    config: &SynthConfig,
    corpus: &Corpus,
    seed: u64,
) -> Result<TaskInstance, SynthError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(SynthError::EmptyCorpus);
    }
    let mut histogram = BTreeMap::new();
    let bucket = config.difficulty.cell_bucket;
    let options = config.render_options(variant, seed);
    for attempt in 0..config.max_retries {
        let mut rng = stream_rng(seed, "attempt", u64::from(attempt));
        let result = if variant == RenderVariant::NoSemantic {
            no_semantic_attempt(config, &options, &mut rng)
        } else {
            draft(dimension, bucket, corpus, &mut rng).and_then(|d| finish(d, corpus, config, &options, &mut rng))
        };
        match result {
            Ok(Some(mut inst)) => {
                inst.meta.seed = seed;
                inst.id = format!("{}-{seed:016x}", inst.meta.dimension.as_str());
                if let Some(cmd) = &config.rewriter {
                    match cmd.run(&inst.question) {
                        Ok(out) if !out.trim().is_empty() => inst.question = out.trim().to_string(),
                        Ok(_) => inst.meta.warnings.push("rewriter returned nothing; kept template question".into()),
                        Err(e) => inst.meta.warnings.push(format!("rewriter failed, kept template question: {e}")),
                    }
                }
                return Ok(inst);
            }
            Ok(None) => bump(&mut histogram, "bucket-miss"),
            Err(SynthError::NoTemplate { .. }) => bump(&mut histogram, "no-template"),
            Err(SynthError::Overflow { .. } | SynthError::TooManyPrimaries { .. }) => bump(&mut histogram, "overflow"),
            Err(e) => return Err(e),
        }
    }
    Err(SynthError::Exhausted {
        dimension: if variant == RenderVariant::NoSemantic {
            TaskDimension::PreciseRetrieval
        } else {
            dimension
        },
        attempts: config.max_retries,
        histogram,
    })
}

fn draft<R: Rng + ?Sized>(
    dimension: TaskDimension,
    bucket: CellBucket,
    corpus: &Corpus,
    rng: &mut R,
) -> Result<Drafted, SynthError> {
    let all: Vec<&Table> = corpus.tables().iter().collect();
    let preferred: Vec<&Table> = all.iter().copied().filter(|t| suits_bucket(bucket, t)).collect();
    let candidates = if preferred.is_empty() { &all } else { &preferred };
    let no_template = |reason: &str| SynthError::NoTemplate {
        dimension,
        reason: reason.into(),
    };
    let first = *candidates.choose(rng).ok_or_else(|| no_template("empty corpus"))?;
    let mut primary = vec![first.clone()];
    if dimension == TaskDimension::Grounding {
        let partners: Vec<&Table> = all.iter().copied().filter(|t| shares_header(first, t)).collect();
        let small: Vec<&Table> = partners.iter().copied().filter(|t| suits_bucket(bucket, t)).collect();
        let pool = if small.is_empty() { &partners } else { &small };
        let second = *pool.choose(rng).ok_or_else(|| no_template("no table shares a column"))?;
        primary.push(second.clone());
    }
    let rels: Vec<Relation> = primary.iter().map(Relation::ingest).collect::<Result<_, _>>()?;
    let refs: Vec<&Relation> = rels.iter().collect();
    let g = generate_query(dimension, &refs, rng)?;
    Ok(Drafted {
        dimension,
        template: Some(g.template),
        primary,
        query: g.query,
        question: g.question,
    })
}

/// Execute, check the bucket, pack. `Ok(None)` is a bucket miss.
fn finish<R: Rng + ?Sized>(
    d: Drafted,
    corpus: &Corpus,
    config: &SynthConfig,
    options: &RenderOptions,
    rng: &mut R,
) -> Result<Option<TaskInstance>, SynthError> {
    let store = Store::from_tables(&d.primary)?;
    let involved = involved_cells(&d.query, &store)?;
    if !config.difficulty.cell_bucket.contains(involved) {
        return Ok(None);
    }
    let answer = serialize_result(&execute(&d.query, &store)?);
    let pool: Vec<&Table> = corpus
        .tables()
        .iter()
        .filter(|t| !d.primary.iter().any(|p| p.name().eq_ignore_ascii_case(t.name())))
        .collect();
    let packed = pack_context(&d.primary, &pool, &config.difficulty, options, rng)?;
    Ok(Some(TaskInstance {
        id: String::new(),
        context: packed.rendered.text.clone(),
        question: d.question,
        sql: d.query.to_string(),
        answer,
        meta: InstanceMeta {
            dimension: d.dimension,
            involved_cells: involved,
            table_count: packed.table_count(),
            token_length: packed.token_length(),
            render_variant: options.variant,
            seed: 0,
            cell_bucket: Some(config.difficulty.cell_bucket),
            template: d.template,
            under_budget: packed.under_budget,
            warnings: Vec::new(),
        },
        tables: packed.tables,
    }))
}

/// Lookup tasks over tables of unrelated words. Always a retrieval task;
/// the tables are renamed `Table 1..` by their position in the context.
fn no_semantic_attempt<R: Rng + ?Sized>(
    config: &SynthConfig,
    options: &RenderOptions,
    rng: &mut R,
) -> Result<Option<TaskInstance>, SynthError> {
    let bucket = config.difficulty.cell_bucket;
    let pool_words = default_word_pool();
    // The query reads the row-name column plus one answer cell: n + 1 cells.
    let n = match bucket {
        CellBucket::Small => rng.random_range(2..=12),
        CellBucket::Medium => rng.random_range(2..=45),
        CellBucket::Large => rng.random_range(100..=150),
    };
    let m = rng.random_range(3..=6);
    let base = rng.random::<u64>();
    let task = generate_no_semantic_numbered(n, m, &pool_words, base, 0)?;
    let max = config.difficulty.table_count.max;
    let distractors: Vec<Table> = (1..max as u64)
        .map(|j| {
            let dn = rng.random_range(3..=20);
            let dm = rng.random_range(3..=6);
            generate_no_semantic_numbered(dn, dm, &pool_words, base, j as usize).map(|t| t.table)
        })
        .collect::<Result<_, _>>()?;
    let pool: Vec<&Table> = distractors.iter().collect();
    let packed = pack_context(std::slice::from_ref(&task.table), &pool, &config.difficulty, options, rng)?;

    let tables: Vec<Table> = packed
        .tables
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.with_name(format!("Table {}", i + 1)).expect("non-empty name"))
        .collect();
    let pos = packed.primary_positions[0];
    let name = tables[pos].name().to_string();
    let store = Store::from_tables(std::slice::from_ref(&tables[pos]))?;
    let rel = store.get(&name).expect("just inserted");
    let row = task
        .table
        .rows()
        .iter()
        .position(|r| r[0] == task.row_name)
        .expect("row name comes from the table");
    let key = match &rel.rows()[row][0] {
        Value::Number(x) => Expr::number(*x),
        _ => Expr::text(task.row_name.as_str()),
    };
    let mut query = SelectQuery::star(name.as_str());
    query.projections = vec![SelectItem::Expr {
        expr: Expr::column(task.column_name.as_str()),
        alias: None,
    }];
    query.selection = Some(Expr::compare(
        CmpOp::Eq,
        Expr::Column(ColumnRef::new(CORNER_HEADER)),
        key,
    ));
    let involved = involved_cells(&query, &store)?;
    if !bucket.contains(involved) {
        return Ok(None);
    }
    let answer = serialize_result(&execute(&query, &store)?);
    let rendered = crate::table::render(&tables, options)?;
    Ok(Some(TaskInstance {
        id: String::new(),
        context: rendered.text,
        question: lookup_question(&task.row_name, &task.column_name, pos + 1),
        sql: query.to_string(),
        answer,
        meta: InstanceMeta {
            dimension: TaskDimension::PreciseRetrieval,
            involved_cells: involved,
            table_count: tables.len(),
            token_length: rendered.token_count,
            render_variant: RenderVariant::NoSemantic,
            seed: 0,
            cell_bucket: Some(bucket),
            template: Some(Template::LookupCells),
            under_budget: packed.under_budget,
            warnings: Vec::new(),
        },
        tables,
    }))
}

/// Weights over the three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionMix {
    pub precise_retrieval: f64,
    pub multi_hop: f64,
    pub grounding: f64,
}

impl Default for DimensionMix {
    fn default() -> Self {
        Self {
            precise_retrieval: 1.0,
            multi_hop: 1.0,
            grounding: 1.0,
        }
    }
}

impl DimensionMix {
    pub fn weights(&self) -> [f64; 3] {
        [self.precise_retrieval, self.multi_hop, self.grounding]
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let w = self.weights();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().all(|x| *x == 0.0) {
            return Err(SynthError::Config(format!(
                "dimension weights {w:?} must be nonnegative and not all zero"
            )));
        }
        Ok(())
    }
}

/// Per-instance seed under a root seed.
pub fn instance_seed(root: u64, index: u64) -> u64 {
    derive_seed(root, "instance", index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstancePlan {
    pub index: u64,
    pub dimension: TaskDimension,
    pub variant: RenderVariant,
    pub seed: u64,
}

/// The draws for instance `index`, independent of every other index.
pub fn plan_instance(root: u64, index: u64, mix: &DimensionMix, variants: &[RenderVariant]) -> InstancePlan {
    let dist = WeightedIndex::new(mix.weights()).expect("validated weights");
    let dimension = TaskDimension::ALL[dist.sample(&mut stream_rng(root, "dimension", index))];
    let variant = *variants
        .choose(&mut stream_rng(root, "variant", index))
        .expect("non-empty variants");
    InstancePlan {
        index,
        dimension,
        variant,
        seed: instance_seed(root, index),
    }
}

impl InstancePlan {
    /// Build this planned instance. Plans are independent, so callers may
    /// build them in any order or in parallel.
    pub fn build(&self, config: &SynthConfig, corpus: &Corpus) -> Result<TaskInstance, SynthError> {
        build_with_variant(self.dimension, self.variant, config, corpus, self.seed)
    }
}

/// Lazily build `count` instances under `root`.
pub fn synthesize<'a>(
    config: &'a SynthConfig,
    mix: DimensionMix,
    corpus: &'a Corpus,
    root: u64,
    count: u64,
) -> Result<impl Iterator<Item = (InstancePlan, Result<TaskInstance, SynthError>)> + 'a, SynthError> {
    config.validate()?;
    mix.validate()?;
    Ok((0..count).map(move |i| {
        let plan = plan_instance(root, i, &mix, &config.variants);
        let built = plan.build(config, corpus);
        (plan, built)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{demo_corpus, TableCountRange};

    fn small_config() -> SynthConfig {
        SynthConfig {
            difficulty: DifficultyConfig {
                cell_bucket: CellBucket::Small,
                table_count: TableCountRange { min: 1, max: 30 },
                target_tokens: 4096,
                rng_seed: 0,
            },
            ..SynthConfig::default()
        }
    }

    #[test]
    fn every_dimension_builds_and_verifies() {
        let corpus = demo_corpus(11, 60);
        let config = small_config();
        for d in TaskDimension::ALL {
            for seed in 0..5 {
                let inst = build_instance(d, &config, &corpus, seed).unwrap();
                assert_eq!(inst.verify(Some(&config.difficulty)), Vec::<String>::new(), "{}", inst.sql);
                assert!(inst.meta.involved_cells <= 30);
            }
        }
    }

    #[test]
    fn equal_seeds_equal_instances() {
        let corpus = demo_corpus(11, 30);
        let config = SynthConfig::default();
        let a = build_instance(TaskDimension::Grounding, &config, &corpus, 4).unwrap();
        let b = build_instance(TaskDimension::Grounding, &config, &corpus, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exhaustion_carries_a_histogram() {
        // Text-free grounding is impossible on a single table.
        let corpus = Corpus::new(vec![demo_corpus(1, 1).tables()[0].clone()]).unwrap();
        let config = SynthConfig {
            max_retries: 4,
            ..SynthConfig::default()
        };
        match build_instance(TaskDimension::Grounding, &config, &corpus, 0) {
            Err(SynthError::Exhausted { attempts: 4, histogram, .. }) => {
                assert_eq!(histogram.values().sum::<u32>(), 4);
                assert_eq!(histogram["no-template"], 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn no_semantic_instances_are_lookups() {
        let corpus = demo_corpus(1, 5);
        let config = SynthConfig {
            variants: vec![RenderVariant::NoSemantic],
            ..small_config()
        };
        let inst = build_instance(TaskDimension::MultiHop, &config, &corpus, 3).unwrap();
        assert_eq!(inst.meta.dimension, TaskDimension::PreciseRetrieval);
        assert!(inst.question.starts_with("What is the element in row"));
        assert!(inst.verify(Some(&config.difficulty)).is_empty(), "{:?}", inst.verify(None));
    }

    #[test]
    fn weights_are_validated() {
        let zero = DimensionMix {
            precise_retrieval: 0.0,
            multi_hop: 0.0,
            grounding: 0.0,
        };
        assert!(zero.validate().is_err());
        let neg = DimensionMix {
            grounding: -1.0,
            ..DimensionMix::default()
        };
        assert!(neg.validate().is_err());
    }
}
