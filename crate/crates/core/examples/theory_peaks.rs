//! Analytic lag profile of a random column model: the peaks at multiples of
//! the column count all sit at the same-column MI, and text-like power-law
//! dependency is eventually dominated.
//!
//! cargo run --example theory_peaks -- [m] [alphabet] [rows]

use tabula::info::{
    analytic_lag_profile, dominance_ratio, effective_distance, ColumnModel, DependencySource, PowerLawModel,
};
use tabula::seed::rng_from_seed;

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let m = args.next().flatten().unwrap_or(5);
    let k = args.next().flatten().unwrap_or(8);
    let n = args.next().flatten().unwrap_or(200);

    let model = ColumnModel::random(m, k, &mut rng_from_seed(1));
    let i_same = model.i_same();
    let profile = analytic_lag_profile(&model, n, (n - 1) * m).unwrap();
    println!("m = {m}, |V| = {k}, n = {n}, i_same = {i_same:.6} nats");
    println!("column-type MI = {:.6}, sigma^2 = {:.6}", model.column_type_mi(), model.cross_column_variance().sigma_squared);

    println!("\nfirst two periods of the profile:");
    for v in profile.values().iter().take(2 * m) {
        let mark = if v.lag % m == 0 { "  <- peak" } else { "" };
        println!("  d = {:>3}  {:.6}{mark}", v.lag, v.value);
    }
    let worst = (1..n)
        .map(|k| (profile.value(k * m).unwrap() - i_same).abs())
        .fold(0.0, f64::max);
    println!("max |peak - i_same| over all {} peaks: {worst:.2e}", n - 1);

    let tau = i_same / 2.0;
    let text = PowerLawModel::new(1.0, 0.5).unwrap();
    let table = effective_distance(DependencySource::Table { profile: &profile, i_same }, tau).unwrap();
    let prose = effective_distance(DependencySource::Text(&text), tau).unwrap();
    println!("\ntau = {tau:.6}");
    println!("  table: last lag above tau {:?}, unbounded {}", table.finite_supremum, table.unbounded_asymptotic);
    println!("  text:  last lag above tau {:?}", prose.finite_supremum);

    println!("\ndominance i_same / I_text(k m):");
    for k in [1, 10, 100, (n - 1) as u64] {
        println!("  k = {k:>4}  {:.3}", dominance_ratio(&model, &text, k).unwrap());
    }
}
