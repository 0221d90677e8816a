//! Build a seeded batch of instances over the demo corpus and check each one.
//!
//! cargo run --example synthesize -- [count] [bucket]

use std::collections::BTreeMap;

use tabula::synth::{demo_corpus, synthesize, CellBucket, DimensionMix, SynthConfig};
use tabula::table::RenderVariant;

fn main() {
    let mut args = std::env::args().skip(1);
    let count: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let bucket = match args.next().as_deref() {
        Some("small") => CellBucket::Small,
        Some("large") => CellBucket::Large,
        _ => CellBucket::Medium,
    };
    let corpus = demo_corpus(1, 150);
    let mut config = SynthConfig {
        variants: RenderVariant::ALL.to_vec(),
        noise_rate: 0.1,
        ..SynthConfig::default()
    };
    config.difficulty.cell_bucket = bucket;

    let mut histogram: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut failures = 0;
    let mut flagged = 0;
    for (plan, built) in synthesize(&config, DimensionMix::default(), &corpus, 7, count).unwrap() {
        match built {
            Ok(inst) => {
                let problems = inst.verify(Some(&config.difficulty));
                assert!(problems.is_empty(), "{}: {problems:?}", inst.id);
                flagged += usize::from(inst.meta.under_budget);
                *histogram
                    .entry((inst.meta.dimension.to_string(), inst.meta.render_variant.to_string()))
                    .or_default() += 1;
                if plan.index < 2 && inst.answer.lines().count() < 12 {
                    println!("--- {} ({} cells, {} tokens)", inst.id, inst.meta.involved_cells, inst.meta.token_length);
                    println!("{}\n{}\n{}\n", inst.question, inst.sql, inst.answer);
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("instance {}: {e}", plan.index);
            }
        }
    }
    for ((d, v), n) in &histogram {
        println!("{d:>18} {v:>20} {n:>5}");
    }
    println!("built {} of {count}, {flagged} under budget, {failures} failed", count as usize - failures);
}
