//! One table in each render variant, with token counts.
//!
//! cargo run --example render_variants

use tabula::synth::demo_corpus;
use tabula::table::{render, RenderOptions, RenderVariant};

fn main() {
    let corpus = demo_corpus(5, 5);
    let table = corpus.tables().iter().min_by_key(|t| t.n_rows()).unwrap();
    let snippets = vec!["see note".to_string(), "n/a".to_string(), "(revised)".to_string()];
    for variant in [RenderVariant::CanonicalMarkdown, RenderVariant::NoDelimiter, RenderVariant::NoiseInjected] {
        let mut options = RenderOptions::noise(0.15, snippets.clone(), 42);
        options.variant = variant;
        let r = render(std::slice::from_ref(table), &options).unwrap();
        println!("== {variant}: {} tokens", r.token_count);
        if variant == RenderVariant::NoiseInjected {
            println!("   {} snippets over {} boundaries", r.noise_inserts, r.noise_boundaries);
        }
        println!("{}\n", r.text);
    }
    let zero = render(std::slice::from_ref(table), &RenderOptions::noise(0.0, snippets, 42)).unwrap();
    let plain = render(std::slice::from_ref(table), &RenderOptions::new(RenderVariant::NoDelimiter)).unwrap();
    println!("noise rate 0 equals no-delimiter: {}", zero.text == plain.text);
}
