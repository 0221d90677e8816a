//! Estimate the lag profile from sampled tables and compare it with the
//! analytic one. Lags with too few pooled pairs are flagged, not dropped.
//!
//! cargo run --release --example empirical_profile -- [samples] [rows]

use tabula::info::{analytic_lag_profile, empirical_lag_profile, ColumnModel, EmpiricalOptions};
use tabula::seed::{rng_from_seed, stream_rng};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let samples = args.next().flatten().unwrap_or(200);
    let n = args.next().flatten().unwrap_or(200);
    let model = ColumnModel::random(5, 8, &mut rng_from_seed(1));
    let m = model.n_cols();

    let seqs: Vec<_> = (0..samples as u64)
        .map(|i| model.sample_sequence(n, &mut stream_rng(1, "example-sample", i)))
        .collect();
    let d_max = (n - 1) * m;
    let options = EmpiricalOptions { min_pairs: Some(100_000) };
    let empirical = empirical_lag_profile(&seqs, d_max, options).unwrap();
    let analytic = analytic_lag_profile(&model, n, d_max).unwrap();

    let mut worst: f64 = 0.0;
    let mut unreliable = 0;
    for (e, a) in empirical.values().iter().zip(analytic.values()) {
        if e.reliable {
            worst = worst.max((e.value - a.value).abs());
        } else {
            unreliable += 1;
        }
    }
    println!("{samples} tables of {n} x {m}, lags 1..={d_max}");
    println!("max |empirical - analytic| over reliable lags: {worst:.4} nats");
    println!("{unreliable} lags below 1e5 pairs (flagged)");
    for lag in [1, 2, m, 2 * m, 100 * m] {
        if let (Some(e), Some(a)) = (empirical.at(lag), analytic.at(lag)) {
            println!("  d = {lag:>4}  empirical {:.5}  analytic {:.5}  pairs {:>7}  reliable {}", e.value, a.value, e.pairs, e.reliable);
        }
    }
}
