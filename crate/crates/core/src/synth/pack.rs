//! Packing primary tables among distractors up to a token budget.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DifficultyConfig, SynthError};
use crate::table::{render_with, RenderOptions, Rendered, Table, Tokenizer, WhitespaceTokenizer};

#[derive(Debug, Clone, PartialEq)]
pub struct PackedContext {
    pub tables: Vec<Table>,
    pub rendered: Rendered,
    /// Indexes of the primary tables within `tables`.
    pub primary_positions: Vec<usize>,
    /// Set when the pool ran out before the budget or table minimum was met.
    pub under_budget: bool,
}

impl PackedContext {
    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn token_length(&self) -> usize {
        self.rendered.token_count
    }
}

/// Sample distractors without replacement until the rendered context lands
/// in `[0.9 B, 1.1 B]` tokens, then drop each primary table at a uniform
/// position. A distractor that would overshoot the upper bound is skipped.
pub fn pack_context<R: Rng + ?Sized>(
    primary: &[Table],
    pool: &[&Table],
    config: &DifficultyConfig,
    options: &RenderOptions,
    rng: &mut R,
) -> Result<PackedContext, SynthError> {
    pack_context_with(primary, pool, config, options, &WhitespaceTokenizer, rng)
}

pub fn pack_context_with<R: Rng + ?Sized>(
    primary: &[Table],
    pool: &[&Table],
    config: &DifficultyConfig,
    options: &RenderOptions,
    tokenizer: &dyn Tokenizer,
    rng: &mut R,
) -> Result<PackedContext, SynthError> {
    config.validate()?;
    options.validate()?;
    let range = config.table_count;
    if primary.len() > range.max {
        return Err(SynthError::TooManyPrimaries {
            primary: primary.len(),
            max: range.max,
        });
    }
    if let Some(clash) = pool
        .iter()
        .find(|d| primary.iter().any(|p| p.name().eq_ignore_ascii_case(d.name())))
    {
        return Err(SynthError::NameClash(clash.name().to_string()));
    }
    let (lo, hi) = config.token_bounds();
    let cost = |t: &Table| -> Result<usize, SynthError> {
        Ok(render_with(std::slice::from_ref(t), options, tokenizer)?.token_count)
    };
    let mut total = 0;
    for p in primary {
        total += cost(p)?;
    }
    if total > hi {
        return Err(SynthError::Overflow { tokens: total, limit: hi });
    }

    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    let mut tables: Vec<Table> = Vec::new();
    let mut count = primary.len();
    for i in order {
        if (total >= lo && count >= range.min) || count >= range.max {
            break;
        }
        let c = cost(pool[i])?;
        if total + c > hi {
            continue;
        }
        tables.push(pool[i].clone());
        total += c;
        count += 1;
    }
    let under_budget = total < lo || count < range.min;

    let mut primary_positions = Vec::with_capacity(primary.len());
    for p in primary {
        let pos = rng.random_range(0..=tables.len());
        for q in primary_positions.iter_mut() {
            if *q >= pos {
                *q += 1;
            }
        }
        tables.insert(pos, p.clone());
        primary_positions.push(pos);
    }
    let rendered = render_with(&tables, options, tokenizer)?;
    debug_assert_eq!(rendered.token_count, total, "token counts are additive across tables");
    Ok(PackedContext {
        tables,
        rendered,
        primary_positions,
        under_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use crate::synth::{demo_corpus, CellBucket, TableCountRange};
    use crate::table::RenderVariant;

    fn config(min: usize, max: usize, budget: usize) -> DifficultyConfig {
        DifficultyConfig {
            cell_bucket: CellBucket::Medium,
            table_count: TableCountRange { min, max },
            target_tokens: budget,
            rng_seed: 0,
        }
    }

    #[test]
    fn lands_in_budget_with_a_large_pool() {
        let corpus = demo_corpus(3, 120);
        let small = corpus.tables().iter().min_by_key(|t| t.n_rows()).unwrap().clone();
        let pool: Vec<&Table> = corpus.tables().iter().filter(|t| t.name() != small.name()).collect();
        for seed in 0..10 {
            let packed = pack_context(
                std::slice::from_ref(&small),
                &pool,
                &config(1, 30, 4096),
                &RenderOptions::default(),
                &mut rng_from_seed(seed),
            )
            .unwrap();
            assert!(!packed.under_budget);
            let recount = WhitespaceTokenizer.count(&packed.rendered.text);
            assert_eq!(recount, packed.token_length());
            assert!((3686..=4506).contains(&recount), "{recount}");
            assert_eq!(packed.tables[packed.primary_positions[0]], small);
        }
    }

    #[test]
    fn single_table_range() {
        let corpus = demo_corpus(3, 10);
        let t = corpus.tables()[0].clone();
        let pool: Vec<&Table> = corpus.tables()[1..].iter().collect();
        let packed = pack_context(
            std::slice::from_ref(&t),
            &pool,
            &config(1, 1, 4096),
            &RenderOptions::default(),
            &mut rng_from_seed(0),
        )
        .unwrap();
        assert_eq!(packed.tables, vec![t]);
        assert!(packed.under_budget);
    }

    #[test]
    fn exhausted_pool_is_flagged() {
        let corpus = demo_corpus(4, 3);
        let t = corpus.tables()[0].clone();
        let pool: Vec<&Table> = corpus.tables()[1..].iter().collect();
        let packed = pack_context(
            std::slice::from_ref(&t),
            &pool,
            &config(1, 30, 100_000),
            &RenderOptions::new(RenderVariant::NoDelimiter),
            &mut rng_from_seed(0),
        )
        .unwrap();
        assert!(packed.under_budget);
        assert_eq!(packed.table_count(), 3);
    }

    #[test]
    fn overflow_and_clash() {
        let corpus = demo_corpus(5, 40);
        let big = corpus.tables().iter().max_by_key(|t| t.n_rows()).unwrap().clone();
        assert!(matches!(
            pack_context(
                std::slice::from_ref(&big),
                &[],
                &config(1, 30, 256),
                &RenderOptions::default(),
                &mut rng_from_seed(0)
            ),
            Err(SynthError::Overflow { .. })
        ));
        assert!(matches!(
            pack_context(
                std::slice::from_ref(&big),
                &[&big],
                &config(1, 30, 100_000),
                &RenderOptions::default(),
                &mut rng_from_seed(0)
            ),
            Err(SynthError::NameClash(_))
        ));
    }
}
